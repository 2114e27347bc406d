#pragma once

// Threshold problems for nested automata: each (f, g, problem) triple has one
// route to a flattening plus a decision on the resulting automaton, or an error.

#include "nqa/clipping.hpp"
#include "nqa/errors.hpp"
#include "nqa/flatten.hpp"
#include "nqa/multiset.hpp"
#include "nqa/nested.hpp"
#include "nqa/qa_decisions.hpp"
#include "nqa/silent_elimination.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace nqa {

enum class Problem { Emptiness, Universality };

enum class Route {
    ExtremalThreshold,   // threshold flattening, emptiness at 1
    ExtremalRegular,     // value-guessing flattening, emptiness at lambda
    AverageRegular,      // value-guessing flattening, mean-cycle emptiness
    AverageUnbounded,    // unboundedness check, then the bounded-sum route
    AverageMultiset,     // determinize, synchronize, multiset flattening
    UniversalRegular,    // value-guessing flattening, antichain universality
    UniversalClipped,    // clip sums to SumB, then UniversalRegular
    UnsupportedOpen,
    Undecidable,
};

inline std::string to_string(Route r) {
    switch (r) {
        case Route::ExtremalThreshold: return "extremal-threshold";
        case Route::ExtremalRegular: return "extremal-regular";
        case Route::AverageRegular: return "average-regular";
        case Route::AverageUnbounded: return "average-unbounded";
        case Route::AverageMultiset: return "average-multiset";
        case Route::UniversalRegular: return "universal-regular";
        case Route::UniversalClipped: return "universal-clipped";
        case Route::UnsupportedOpen: return "unsupported-open";
        case Route::Undecidable: return "undecidable";
    }
    return "?";
}

inline Route route_for(Problem p, InfiniteValueFn f, FiniteValueFn::Kind g) {
    using K = FiniteValueFn::Kind;
    const bool sum = g == K::SumPlus || g == K::SumMinus;
    if (p == Problem::Universality) {
        if (is_limit_average(f)) return Route::Undecidable;
        return sum ? Route::UniversalClipped : Route::UniversalRegular;
    }
    if (is_extremal(f)) return g == K::SumB ? Route::ExtremalRegular : Route::ExtremalThreshold;
    if (!sum) return Route::AverageRegular;
    if (g == K::SumMinus) return Route::AverageMultiset;
    return f == InfiniteValueFn::LimSupAvg ? Route::AverageUnbounded : Route::UnsupportedOpen;
}

struct QueryOptions {
    bool scc_optimization = true;
    /// Multiplicity bound of the multiset flattening; the merged child's state count when absent.
    std::optional<std::size_t> multiplicity_cap;
    Cancellation* cancel = nullptr;
    std::size_t max_states = 4000000;
};

struct PipelineStats {
    Route route = Route::Undecidable;
    std::size_t flat_states = 0;
    std::size_t flat_transitions = 0;
    std::size_t qa_states = 0;
    std::size_t qa_transitions = 0;
    /// Wall time per phase in seconds, in pipeline order.
    std::vector<std::pair<std::string, double>> phases;
    std::optional<bool> unbounded;
    std::optional<std::size_t> multiplicity_cap;
};

struct NqaEmptinessResult {
    bool nonempty = false;
    /// A word of value at least lambda; absent when no finite witness was produced.
    std::optional<Lasso> witness;
    PipelineStats stats;
};

struct NqaUniversalityResult {
    bool universal = false;
    std::optional<Lasso> counterexample;
    PipelineStats stats;
};

namespace detail {

class PhaseTimer {
public:
    explicit PhaseTimer(PipelineStats& s) : stats_(s), start_(std::chrono::steady_clock::now()) {}
    void lap(const std::string& name) {
        auto now = std::chrono::steady_clock::now();
        stats_.phases.emplace_back(name, std::chrono::duration<double>(now - start_).count());
        start_ = now;
    }

private:
    PipelineStats& stats_;
    std::chrono::steady_clock::time_point start_;
};

/// Eliminates silent weights from `flat`, decides emptiness at `lambda` and maps the witness back.
inline NqaEmptinessResult decide_flat(const SilentQA& flat, InfiniteValueFn f, const Weight& lambda,
                                      const QueryOptions& opt, PipelineStats& stats, PhaseTimer& timer) {
    stats.flat_states = flat.num_states();
    stats.flat_transitions = flat.num_transitions();
    auto e = eliminate_silent(flat, f, opt.scc_optimization, opt.cancel);
    stats.qa_states = e.qa.num_states();
    stats.qa_transitions = e.qa.num_transitions();
    timer.lap("silent-elim");
    NqaEmptinessResult out;
    auto r = qa_emptiness(e.qa, f, lambda, {false, opt.cancel});
    timer.lap("decide");
    out.nonempty = r.nonempty;
    if (r.run) out.witness = e.expand(flat, *r.run);
    out.stats = stats;
    return out;
}

inline void check_nqa(const NestedAutomaton& n) {
    auto ds = validate_nqa(n);
    if (has_errors(ds)) throw InvalidInput(first_error(ds));
}

inline FlattenOptions flatten_options(const QueryOptions& opt) { return {opt.cancel, opt.max_states}; }

}  // namespace detail

/// Is there a word whose value is at least lambda?
inline NqaEmptinessResult nqa_emptiness(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                        const Weight& lambda, const QueryOptions& opt = {}) {
    detail::check_nqa(n);
    PipelineStats stats;
    stats.route = route_for(Problem::Emptiness, f, g.kind());
    stats.phases.reserve(4);
    detail::PhaseTimer timer(stats);
    const auto fo = detail::flatten_options(opt);
    switch (stats.route) {
        case Route::ExtremalThreshold: {
            auto flat = flatten_extremal_threshold(n, f, g, lambda, fo);
            timer.lap("flatten");
            return detail::decide_flat(flat, f, Weight(1), opt, stats, timer);
        }
        case Route::ExtremalRegular:
        case Route::AverageRegular: {
            auto flat = flatten_regular(n, f, g, fo);
            timer.lap("flatten");
            return detail::decide_flat(flat, f, lambda, opt, stats, timer);
        }
        case Route::AverageUnbounded: {
            auto u = childsum_unbounded(n, f, g, fo);
            stats.unbounded = u.unbounded;
            timer.lap("unboundedness");
            if (u.unbounded) {
                NqaEmptinessResult out;
                out.nonempty = true;
                out.stats = std::move(stats);
                return out;
            }
            NestedAutomaton bounded = detail::map_child_weights(n, false);
            auto flat = flatten_regular(bounded, f, FiniteValueFn::sum_bounded(u.lambda_star), fo);
            timer.lap("flatten");
            return detail::decide_flat(flat, f, lambda, opt, stats, timer);
        }
        case Route::AverageMultiset: {
            std::optional<ExtendedNqa> ext;
            if (!is_deterministic(n)) ext = determinize_alphabet_extension(n);
            auto sync = synchronize_children(ext ? ext->nqa : n);
            std::size_t cap = opt.multiplicity_cap.value_or(default_multiplicity_bound(sync));
            stats.multiplicity_cap = cap;
            auto flat = multiset_flatten_graph(sync, f, cap, opt.cancel, opt.max_states).qa;
            timer.lap("flatten");
            auto out = detail::decide_flat(flat, f, lambda, opt, stats, timer);
            if (ext && out.witness) out.witness = ext->project(*out.witness);
            return out;
        }
        case Route::UnsupportedOpen: throw UnsupportedError("(LimInfAvg, Sum+) emptiness is open");
        default: break;
    }
    throw std::logic_error("unreachable");
}

/// The automaton with silent weights that the emptiness route for (f, g) decides;
/// lambda is needed by the threshold route only.
inline SilentQA nqa_flatten(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                            const std::optional<Weight>& lambda, const QueryOptions& opt = {}) {
    detail::check_nqa(n);
    const auto fo = detail::flatten_options(opt);
    switch (route_for(Problem::Emptiness, f, g.kind())) {
        case Route::ExtremalThreshold:
            if (!lambda) throw InvalidInput("the threshold flattening needs a threshold");
            return flatten_extremal_threshold(n, f, g, *lambda, fo);
        case Route::ExtremalRegular:
        case Route::AverageRegular: return flatten_regular(n, f, g, fo);
        case Route::AverageUnbounded: {
            auto u = childsum_unbounded(n, f, g, fo);
            return flatten_regular(detail::map_child_weights(n, false), f, FiniteValueFn::sum_bounded(u.lambda_star), fo);
        }
        case Route::AverageMultiset: {
            auto sync = synchronize_children(is_deterministic(n) ? n : determinize_alphabet_extension(n).nqa);
            return multiset_flatten(sync, f, opt.multiplicity_cap.value_or(default_multiplicity_bound(sync)), opt.cancel);
        }
        case Route::UnsupportedOpen: throw UnsupportedError("(LimInfAvg, Sum+) emptiness is open");
        default: break;
    }
    throw std::logic_error("unreachable");
}

/// Does every word have value at least lambda?
inline NqaUniversalityResult nqa_universality(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                              const Weight& lambda, const QueryOptions& opt = {}) {
    detail::check_nqa(n);
    PipelineStats stats;
    stats.route = route_for(Problem::Universality, f, g.kind());
    if (stats.route == Route::Undecidable) throw UndecidableError("limit-average universality");
    detail::PhaseTimer timer(stats);
    const NestedAutomaton* source = &n;
    FiniteValueFn g2 = g;
    Weight lambda2 = lambda;
    std::optional<ClipResult> clipped;
    if (stats.route == Route::UniversalClipped) {
        clipped = clip_child_sums(n, g, lambda);
        source = &clipped->nqa;
        g2 = clipped->g;
        lambda2 = clipped->lambda;
        timer.lap("clip");
    }
    auto flat = flatten_regular(*source, f, g2, detail::flatten_options(opt));
    stats.flat_states = flat.num_states();
    stats.flat_transitions = flat.num_transitions();
    timer.lap("flatten");
    auto e = eliminate_silent(flat, f, opt.scc_optimization, opt.cancel);
    stats.qa_states = e.qa.num_states();
    stats.qa_transitions = e.qa.num_transitions();
    timer.lap("silent-elim");
    auto r = qa_universality(e.qa, f, lambda2, {false, opt.cancel});
    timer.lap("decide");
    return {r.universal, r.counterexample, std::move(stats)};
}

}  // namespace nqa

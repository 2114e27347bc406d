#pragma once

// Threshold decision procedures on quantitative automata.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/mean_cycle.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/weight.hpp"
#include "nqa/word.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace nqa {

using ExtAutomaton = BasicAutomaton<ExtValue>;

inline ExtAutomaton to_ext(const Automaton& a) {
    return a.map_weights<ExtValue>([](const Weight& w) { return ExtValue(w); });
}

struct DecisionOptions {
    /// Public entry points demand complete automata; flattening outputs are checked without it.
    bool require_complete = true;
    Cancellation* cancel = nullptr;
};

struct TopValueReport {
    ExtValue value;
    std::optional<Lasso> witness;
    std::optional<PathLasso> run;  // transitions of the witness run
};

struct EmptinessResult {
    bool nonempty = false;
    std::optional<Lasso> witness;
    std::optional<PathLasso> run;
    ExtValue top;
};

struct UniversalityResult {
    bool universal = false;
    std::optional<Lasso> counterexample;
};

namespace detail {

template <class W>
void check_complete(const BasicAutomaton<W>& a, const DecisionOptions& opt) {
    if (opt.require_complete && !is_complete(a)) throw InvalidInput("automaton is not complete");
}

template <class W, class Keep, class Target>
std::vector<TransitionId> path_or_throw(const BasicAutomaton<W>& a, StateId from, Keep&& keep, Target&& target) {
    auto p = shortest_path(a, {from}, keep, target);
    if (!p) throw std::logic_error("expected path not found");
    return *p;
}

inline void append(std::vector<TransitionId>& to, const std::vector<TransitionId>& from) {
    to.insert(to.end(), from.begin(), from.end());
}

template <class W>
TopValueReport finish(const BasicAutomaton<W>& a, ExtValue v, std::optional<PathLasso> run) {
    TopValueReport r{std::move(v), std::nullopt, std::move(run)};
    if (r.run) r.witness = to_lasso(a, *r.run);
    return r;
}

/// Lasso reaching `target` with `stem_keep` transitions and cycling through it with `loop_keep` ones.
template <class W, class StemKeep, class LoopKeep>
std::optional<PathLasso> lasso_through(const BasicAutomaton<W>& a, StateId target, StemKeep&& stem_keep,
                                       LoopKeep&& loop_keep) {
    auto stem = shortest_path(a, {a.initial()}, stem_keep, [target](StateId s) { return s == target; });
    if (!stem) return std::nullopt;
    auto loop = shortest_cycle_through(a, target, loop_keep);
    if (!loop) return std::nullopt;
    return PathLasso{std::move(*stem), std::move(*loop)};
}

template <class W>
std::vector<ExtValue> distinct_weights_desc(const BasicAutomaton<W>& a) {
    std::vector<ExtValue> ws;
    for (const auto& t : a.transitions()) ws.push_back(t.weight);
    std::sort(ws.begin(), ws.end(), std::greater<>());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    return ws;
}

inline TopValueReport top_sup(const ExtAutomaton& a) {
    const auto& sccs = a.sccs();
    std::vector<bool> acc(a.num_states());
    for (StateId s = 0; s < a.num_states(); ++s) acc[s] = sccs.accepting[sccs.scc_id[s]];
    auto live = backward_reachable(a, acc, kAllTransitions);
    std::optional<TransitionId> best;
    for (TransitionId t = 0; t < a.num_transitions(); ++t) {
        const auto& tr = a.transition(t);
        if (!live[tr.dst]) continue;
        if (!best || a.transition(*best).weight < tr.weight) best = t;
    }
    if (!best) return {};
    const auto& bt = a.transition(*best);
    auto in_acc_final = [&](StateId s) { return acc[s] && a.is_final(s); };
    PathLasso run;
    run.stem = path_or_throw(a, a.initial(), kAllTransitions, [&](StateId s) { return s == bt.src; });
    run.stem.push_back(*best);
    append(run.stem, path_or_throw(a, bt.dst, kAllTransitions, in_acc_final));
    StateId f = run.stem.empty() ? a.initial() : a.transition(run.stem.back()).dst;
    auto loop = shortest_cycle_through(a, f, [&](TransitionId t) {
        return sccs.scc_id[a.transition(t).src] == sccs.scc_id[a.transition(t).dst];
    });
    run.loop = *loop;
    return finish(a, bt.weight, std::move(run));
}

inline TopValueReport top_limsup(const ExtAutomaton& a) {
    const auto& sccs = a.sccs();
    auto inside = [&](TransitionId t) {
        const auto& tr = a.transition(t);
        return sccs.scc_id[tr.src] == sccs.scc_id[tr.dst];
    };
    std::optional<TransitionId> best;
    for (TransitionId t = 0; t < a.num_transitions(); ++t) {
        const auto& tr = a.transition(t);
        if (!inside(t) || !sccs.accepting[sccs.scc_id[tr.src]]) continue;
        if (!best || a.transition(*best).weight < tr.weight) best = t;
    }
    if (!best) return {};
    const auto& bt = a.transition(*best);
    PathLasso run;
    run.stem = path_or_throw(a, a.initial(), kAllTransitions, [&](StateId s) { return s == bt.src; });
    run.loop.push_back(*best);
    auto to_final = path_or_throw(a, bt.dst, inside, [&](StateId s) { return a.is_final(s); });
    append(run.loop, to_final);
    StateId f = to_final.empty() ? bt.dst : a.transition(to_final.back()).dst;
    append(run.loop, path_or_throw(a, f, inside, [&](StateId s) { return s == bt.src; }));
    return finish(a, bt.weight, std::move(run));
}

/// Inf (prefix restricted too) and LimInf (prefix unrestricted).
inline TopValueReport top_inf_like(const ExtAutomaton& a, bool restrict_prefix, Cancellation* cancel) {
    for (const auto& v : distinct_weights_desc(a)) {
        poll(cancel);
        auto keep = [&](TransitionId t) { return a.transition(t).weight >= v; };
        auto sccs = compute_sccs(a, keep);
        std::vector<bool> reach = restrict_prefix ? forward_reachable(a, {a.initial()}, keep)
                                                  : forward_reachable(a, {a.initial()}, kAllTransitions);
        for (StateId s = 0; s < a.num_states(); ++s) {
            if (!reach[s] || !a.is_final(s) || !sccs.accepting[sccs.scc_id[s]]) continue;
            auto loop_keep = [&](TransitionId t) {
                const auto& tr = a.transition(t);
                return keep(t) && sccs.scc_id[tr.src] == sccs.scc_id[tr.dst];
            };
            std::optional<PathLasso> run = restrict_prefix ? lasso_through(a, s, keep, loop_keep)
                                                           : lasso_through(a, s, kAllTransitions, loop_keep);
            return finish(a, v, std::move(run));
        }
    }
    return {};
}

struct SccGraph {
    std::vector<StateId> nodes;  // local index -> state
    std::vector<WeightedEdge> edges;
    std::vector<TransitionId> edge_ids;
};

inline SccGraph scc_graph(const ExtAutomaton& a, std::uint32_t c) {
    const auto& sccs = a.sccs();
    SccGraph g;
    g.nodes = sccs.members[c];
    std::unordered_map<StateId, std::uint32_t> local;
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) local.emplace(g.nodes[i], i);
    for (StateId s : g.nodes)
        for (TransitionId t : a.out(s)) {
            const auto& tr = a.transition(t);
            if (sccs.scc_id[tr.dst] != c) continue;
            if (!tr.weight.is_finite()) throw InvalidInput("limit-average objective over an infinite weight");
            g.edges.push_back({local.at(s), local.at(tr.dst), tr.weight.finite()});
            g.edge_ids.push_back(t);
        }
    return g;
}

/// Longest-walk potentials from local node 0 for weights `w - mean` (no positive cycles).
inline std::vector<Weight> potentials(const SccGraph& g, const Weight& mean, Cancellation* cancel) {
    BigInt lcm = mean.denominator();
    for (const auto& e : g.edges) lcm = boost::multiprecision::lcm(lcm, e.weight.denominator());
    std::vector<BigInt> w;
    w.reserve(g.edges.size());
    Weight scale(lcm, BigInt(1));
    for (const auto& e : g.edges) w.push_back(((e.weight - mean) * scale).numerator());
    const std::size_t n = g.nodes.size();
    std::vector<BigInt> pi(n);
    std::vector<bool> ok(n, false);
    pi[0] = 0;
    ok[0] = true;
    for (std::size_t round = 0; round < n; ++round) {
        bool changed = false;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto u = g.edges[e].from, v = g.edges[e].to;
            if (!ok[u]) continue;
            BigInt cand = pi[u] + w[e];
            if (!ok[v] || pi[v] < cand) {
                pi[v] = cand;
                ok[v] = true;
                changed = true;
            }
        }
        poll(cancel);
        if (!changed) break;
    }
    std::vector<Weight> out;
    out.reserve(n);
    for (const auto& p : pi) out.emplace_back(p, lcm);
    return out;
}

/// A lasso whose loop has mean >= lambda and visits a final state, inside SCC `c` of maximum mean `mean`.
inline std::optional<PathLasso> mean_payoff_lasso(const ExtAutomaton& a, std::uint32_t c, const Weight& mean,
                                                  const Weight& lambda, Cancellation* cancel) {
    const auto& sccs = a.sccs();
    SccGraph g = scc_graph(a, c);
    auto pi = potentials(g, mean, cancel);
    std::unordered_set<TransitionId> tight;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (pi[g.edges[e].from] + (g.edges[e].weight - mean) == pi[g.edges[e].to]) tight.insert(g.edge_ids[e]);
    auto is_tight = [&](TransitionId t) { return tight.count(t) > 0; };
    auto tsccs = compute_sccs(a, is_tight);
    auto in_tight_scc = [&](TransitionId t) {
        const auto& tr = a.transition(t);
        return is_tight(t) && tsccs.scc_id[tr.src] == tsccs.scc_id[tr.dst];
    };
    std::optional<StateId> cycle_node;
    for (StateId s : g.nodes) {
        if (!tsccs.nontrivial[tsccs.scc_id[s]]) continue;
        if (!cycle_node) cycle_node = s;
        if (a.is_final(s)) return lasso_through(a, s, kAllTransitions, in_tight_scc);
    }
    if (!cycle_node || !(lambda < mean)) return std::nullopt;

    auto inside = [&](TransitionId t) {
        const auto& tr = a.transition(t);
        return sccs.scc_id[tr.src] == c && sccs.scc_id[tr.dst] == c;
    };
    StateId x = *cycle_node;
    auto cyc = *shortest_cycle_through(a, x, in_tight_scc);
    auto d1 = path_or_throw(a, x, inside, [&](StateId s) { return a.is_final(s); });
    StateId f = d1.empty() ? x : a.transition(d1.back()).dst;
    auto d2 = path_or_throw(a, f, inside, [&](StateId s) { return s == x; });
    std::vector<TransitionId> detour = d1;
    append(detour, d2);
    Weight dw = 0;
    for (TransitionId t : detour) dw += a.transition(t).weight.finite();
    const Weight clen(static_cast<std::int64_t>(cyc.size()));
    const Weight dlen(static_cast<std::int64_t>(detour.size()));
    Weight need = (lambda * dlen - dw) / (clen * (mean - lambda));
    BigInt reps = need.sign() <= 0 ? BigInt(1) : BigInt(need.ceil_to_lattice(1).numerator());
    if (reps < 1) reps = 1;
    if (reps * cyc.size() > 1000000) throw CapacityError("witness loop too long");
    PathLasso run;
    run.stem = path_or_throw(a, a.initial(), kAllTransitions, [&](StateId s) { return s == x; });
    for (std::size_t i = 0; i < reps.convert_to<std::size_t>(); ++i) append(run.loop, cyc);
    append(run.loop, detour);
    return run;
}

struct MeanTop {
    std::optional<Weight> mean;
    std::uint32_t scc = 0;
};

inline MeanTop max_mean_over_accepting(const ExtAutomaton& a, Cancellation* cancel) {
    const auto& sccs = a.sccs();
    MeanTop best;
    for (std::uint32_t c = 0; c < sccs.size(); ++c) {
        if (!sccs.accepting[c]) continue;
        SccGraph g = scc_graph(a, c);
        auto m = max_cycle_mean(g.nodes.size(), g.edges, cancel);
        if (m && (!best.mean || *best.mean < *m)) best = {*m, c};
    }
    return best;
}

}  // namespace detail

/// Supremum of f over all accepting runs of `a`; NegInf when there is none.
inline TopValueReport top_value(const ExtAutomaton& a, InfiniteValueFn f, const DecisionOptions& opt = {}) {
    detail::check_complete(a, opt);
    switch (f) {
        case InfiniteValueFn::Sup: return detail::top_sup(a);
        case InfiniteValueFn::LimSup: return detail::top_limsup(a);
        case InfiniteValueFn::Inf: return detail::top_inf_like(a, true, opt.cancel);
        case InfiniteValueFn::LimInf: return detail::top_inf_like(a, false, opt.cancel);
        case InfiniteValueFn::LimInfAvg:
        case InfiniteValueFn::LimSupAvg: {
            auto m = detail::max_mean_over_accepting(a, opt.cancel);
            if (!m.mean) return {};
            auto run = detail::mean_payoff_lasso(a, m.scc, *m.mean, *m.mean, opt.cancel);
            return detail::finish(a, *m.mean, std::move(run));
        }
    }
    throw std::logic_error("unreachable");
}

inline TopValueReport top_value(const Automaton& a, InfiniteValueFn f, const DecisionOptions& opt = {}) {
    detail::check_complete(a, opt);
    auto r = top_value(to_ext(a), f, opt);
    return r;
}

/// Is there a word whose value is at least lambda?
inline EmptinessResult qa_emptiness(const ExtAutomaton& a, InfiniteValueFn f, const Weight& lambda,
                                    const DecisionOptions& opt = {}) {
    detail::check_complete(a, opt);
    EmptinessResult out;
    if (is_limit_average(f)) {
        auto m = detail::max_mean_over_accepting(a, opt.cancel);
        if (!m.mean) return out;
        out.top = *m.mean;
        out.nonempty = *m.mean >= lambda;
        if (out.nonempty) out.run = detail::mean_payoff_lasso(a, m.scc, *m.mean, lambda, opt.cancel);
    } else {
        auto r = top_value(a, f, opt);
        out.top = r.value;
        out.nonempty = r.value >= ExtValue(lambda);
        if (out.nonempty) out.run = std::move(r.run);
    }
    if (out.run) out.witness = to_lasso(a, *out.run);
    return out;
}

inline EmptinessResult qa_emptiness(const Automaton& a, InfiniteValueFn f, const Weight& lambda,
                                    const DecisionOptions& opt = {}) {
    detail::check_complete(a, opt);
    return qa_emptiness(to_ext(a), f, lambda, opt);
}

namespace detail {

/// Adjacency-list graph usable with compute_sccs.
struct EdgeGraph {
    struct Edge {
        StateId src;
        StateId dst;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<TransitionId>> outs;

    explicit EdgeGraph(std::size_t n) : outs(n) {}
    std::size_t num_states() const { return outs.size(); }
    std::span<const TransitionId> out(StateId s) const { return outs[s]; }
    const Edge& transition(TransitionId t) const { return edges[t]; }
    bool is_final(StateId) const { return false; }
    TransitionId add(StateId s, StateId d) {
        auto id = static_cast<TransitionId>(edges.size());
        edges.push_back({s, d});
        outs[s].push_back(id);
        return id;
    }
};

inline std::vector<bool> reach_in(const EdgeGraph& g, const std::vector<StateId>& starts,
                                  const std::vector<bool>& allowed) {
    std::vector<bool> seen(g.num_states(), false);
    std::vector<StateId> work;
    for (StateId s : starts)
        if (!seen[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    while (!work.empty()) {
        StateId s = work.back();
        work.pop_back();
        for (TransitionId t : g.out(s)) {
            if (!allowed[t]) continue;
            StateId d = g.transition(t).dst;
            if (!seen[d]) {
                seen[d] = true;
                work.push_back(d);
            }
        }
    }
    return seen;
}

/// Word summaries for the antichain search. Levels: 0 no run, 1 runs exist but none good, 2 a good run.
/// A run fragment is good for Sup/LimSup when it has a transition of weight >= lambda, and for
/// Inf/LimInf when all its transitions have weight >= lambda.
class UniversalitySearch {
public:
    UniversalitySearch(const ExtAutomaton& a, InfiniteValueFn f, Weight lambda, Cancellation* cancel)
        : a_(a), f_(f), lambda_(std::move(lambda)), n_(a.num_states()), cancel_(cancel) {}

    UniversalityResult run() {
        auto prefixes = prefix_antichain();

        std::vector<BoxEntry> boxes;
        std::unordered_set<std::string> seen;
        std::deque<std::size_t> queue;
        auto consider = [&](std::string box, std::vector<Letter> word) -> std::optional<Lasso> {
            if (!seen.insert(box).second) return std::nullopt;
            for (const auto& e : boxes)
                if (e.alive && leq(e.box, box)) return std::nullopt;
            for (const auto& [p, u] : prefixes)
                if (!accepts(p, box)) return Lasso{u, word};
            for (auto& e : boxes)
                if (e.alive && leq(box, e.box)) e.alive = false;
            boxes.push_back({std::move(box), std::move(word), true});
            queue.push_back(boxes.size() - 1);
            return std::nullopt;
        };
        for (Letter l = 0; l < a_.alphabet().size(); ++l)
            if (auto cex = consider(letter_box(l), {l})) return {false, cex};
        while (!queue.empty()) {
            std::size_t i = queue.front();
            queue.pop_front();
            if (!boxes[i].alive) continue;
            for (Letter l = 0; l < a_.alphabet().size(); ++l) {
                poll(cancel_);
                auto next = extend(boxes[i].box, l);
                auto word = boxes[i].word;
                word.push_back(l);
                if (auto cex = consider(std::move(next), std::move(word))) return {false, cex};
            }
        }
        return {true, std::nullopt};
    }

private:
    struct BoxEntry {
        std::string box;
        std::vector<Letter> word;
        bool alive;
    };

    bool sup_like() const { return is_sup_like(f_); }
    bool limit() const { return f_ == InfiniteValueFn::LimSup || f_ == InfiniteValueFn::LimInf; }
    std::uint8_t level(const ExtValue& w) const { return w >= ExtValue(lambda_) ? 2 : 1; }
    std::uint8_t combine(std::uint8_t x, std::uint8_t y) const {
        if (!x || !y) return 0;
        return sup_like() ? std::max(x, y) : std::min(x, y);
    }
    static std::uint8_t all_of(char c) { return static_cast<std::uint8_t>(c) & 3; }
    static std::uint8_t acc_of(char c) { return static_cast<std::uint8_t>(c) >> 2; }
    static char pack(std::uint8_t all, std::uint8_t acc) { return static_cast<char>(all | (acc << 2)); }

    static bool leq(const std::string& x, const std::string& y) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (all_of(x[i]) > all_of(y[i]) || acc_of(x[i]) > acc_of(y[i])) return false;
        return true;
    }

    std::string prefix_step(const std::string& p, Letter l) const {
        std::string out(n_, 0);
        for (StateId s = 0; s < n_; ++s) {
            if (!p[s]) continue;
            for (TransitionId t : a_.out(s)) {
                const auto& tr = a_.transition(t);
                if (tr.letter != l) continue;
                std::uint8_t lv = limit() ? 2 : combine(static_cast<std::uint8_t>(p[s]), level(tr.weight));
                out[tr.dst] = static_cast<char>(std::max<std::uint8_t>(out[tr.dst], lv));
            }
        }
        return out;
    }

    std::vector<std::pair<std::string, std::vector<Letter>>> prefix_antichain() const {
        std::string init(n_, 0);
        init[a_.initial()] = (f_ == InfiniteValueFn::Sup) ? 1 : 2;
        struct Entry {
            std::string p;
            std::vector<Letter> word;
            bool alive;
        };
        std::vector<Entry> chain{{init, {}, true}};
        std::unordered_set<std::string> seen{init};
        std::deque<std::size_t> queue{0};
        auto pleq = [](const std::string& x, const std::string& y) {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] > y[i]) return false;
            return true;
        };
        while (!queue.empty()) {
            std::size_t i = queue.front();
            queue.pop_front();
            if (!chain[i].alive) continue;
            for (Letter l = 0; l < a_.alphabet().size(); ++l) {
                poll(cancel_);
                auto next = prefix_step(chain[i].p, l);
                if (!seen.insert(next).second) continue;
                bool dominated = false;
                for (const auto& e : chain)
                    if (e.alive && pleq(e.p, next)) {
                        dominated = true;
                        break;
                    }
                if (dominated) continue;
                for (auto& e : chain)
                    if (e.alive && pleq(next, e.p)) e.alive = false;
                auto word = chain[i].word;
                word.push_back(l);
                chain.push_back({std::move(next), std::move(word), true});
                queue.push_back(chain.size() - 1);
            }
        }
        std::vector<std::pair<std::string, std::vector<Letter>>> out;
        for (auto& e : chain)
            if (e.alive) out.emplace_back(std::move(e.p), std::move(e.word));
        return out;
    }

    std::string letter_box(Letter l) const {
        std::string box(n_ * n_, 0);
        for (const auto& tr : a_.transitions()) {
            if (tr.letter != l) continue;
            char& c = box[tr.src * n_ + tr.dst];
            std::uint8_t lv = level(tr.weight);
            std::uint8_t all = std::max(all_of(c), lv);
            std::uint8_t acc = a_.is_final(tr.dst) ? std::max(acc_of(c), lv) : acc_of(c);
            c = pack(all, acc);
        }
        return box;
    }

    std::string extend(const std::string& g, Letter l) const {
        std::string out(n_ * n_, 0);
        for (StateId p = 0; p < n_; ++p)
            for (StateId r = 0; r < n_; ++r) {
                char c = g[p * n_ + r];
                if (!c) continue;
                for (TransitionId t : a_.out(r)) {
                    const auto& tr = a_.transition(t);
                    if (tr.letter != l) continue;
                    std::uint8_t lv = level(tr.weight);
                    char& o = out[p * n_ + tr.dst];
                    std::uint8_t all = std::max(all_of(o), combine(all_of(c), lv));
                    std::uint8_t acc = std::max(acc_of(o), combine(acc_of(c), lv));
                    if (a_.is_final(tr.dst)) acc = std::max(acc, combine(all_of(c), lv));
                    o = pack(all, acc);
                }
            }
        return out;
    }

    /// Does u.v^omega have an accepting run that is good, given u's summary p and v's box?
    bool accepts(const std::string& p, const std::string& box) const {
        EdgeGraph g(n_);
        std::vector<std::uint8_t> good, acc;
        for (StateId s = 0; s < n_; ++s)
            for (StateId d = 0; d < n_; ++d) {
                char c = box[s * n_ + d];
                if (all_of(c)) {
                    g.add(s, d);
                    good.push_back(all_of(c) == 2);
                    acc.push_back(acc_of(c) > 0);
                }
            }
        std::vector<bool> any(g.edges.size(), true);
        std::vector<bool> good_mask(good.begin(), good.end());
        auto internal_edge = [&](const SccDecomposition& sc, const std::vector<bool>& reach, auto&& pred) {
            for (TransitionId e = 0; e < g.edges.size(); ++e) {
                auto [s, d] = g.edges[e];
                if (reach[s] && sc.scc_id[s] == sc.scc_id[d] && pred(e)) return true;
            }
            return false;
        };
        std::vector<StateId> starts;
        switch (f_) {
            case InfiniteValueFn::Sup: {
                std::vector<StateId> good_starts;
                for (StateId s = 0; s < n_; ++s) {
                    if (p[s]) starts.push_back(s);
                    if (p[s] == 2) good_starts.push_back(s);
                }
                auto r0 = reach_in(g, starts, any);
                // Entering the good layer: a good start, or a good edge from a reachable state.
                for (TransitionId e = 0; e < g.edges.size(); ++e)
                    if (good[e] && r0[g.edges[e].src]) good_starts.push_back(g.edges[e].dst);
                auto r1 = reach_in(g, good_starts, any);
                auto sc = compute_sccs(g, [](TransitionId) { return true; });
                return internal_edge(sc, r1, [&](TransitionId e) { return acc[e] != 0; });
            }
            case InfiniteValueFn::LimSup: {
                for (StateId s = 0; s < n_; ++s)
                    if (p[s]) starts.push_back(s);
                auto r = reach_in(g, starts, any);
                auto sc = compute_sccs(g, [](TransitionId) { return true; });
                std::vector<bool> has_acc(sc.size(), false), has_good(sc.size(), false);
                for (TransitionId e = 0; e < g.edges.size(); ++e) {
                    auto [s, d] = g.edges[e];
                    if (!r[s] || sc.scc_id[s] != sc.scc_id[d]) continue;
                    if (acc[e]) has_acc[sc.scc_id[s]] = true;
                    if (good[e]) has_good[sc.scc_id[s]] = true;
                }
                for (std::size_t c = 0; c < sc.size(); ++c)
                    if (has_acc[c] && has_good[c]) return true;
                return false;
            }
            case InfiniteValueFn::Inf:
            case InfiniteValueFn::LimInf: {
                // For these the acc-good variant of a pair is an edge with acc level 2.
                for (StateId s = 0; s < n_; ++s)
                    if (f_ == InfiniteValueFn::Inf ? p[s] == 2 : p[s] > 0) starts.push_back(s);
                auto r = reach_in(g, starts, f_ == InfiniteValueFn::Inf ? good_mask : any);
                auto sc = compute_sccs(g, [&](TransitionId e) { return good[e] != 0; });
                return internal_edge(sc, r, [&](TransitionId e) {
                    auto [s, d] = g.edges[e];
                    return good[e] && acc_of(box[s * n_ + d]) == 2;
                });
            }
            default: throw std::logic_error("unreachable");
        }
    }

    const ExtAutomaton& a_;
    InfiniteValueFn f_;
    Weight lambda_;
    std::size_t n_;
    Cancellation* cancel_;
};

}  // namespace detail

/// Does every word have value at least lambda? Counterexamples are words of value below lambda,
/// including words without an accepting run.
inline UniversalityResult qa_universality(const ExtAutomaton& a, InfiniteValueFn f, const Weight& lambda,
                                          const DecisionOptions& opt = {}) {
    if (is_limit_average(f)) throw UndecidableError("limit-average universality is undecidable");
    detail::check_complete(a, opt);
    return detail::UniversalitySearch(a, f, lambda, opt.cancel).run();
}

inline UniversalityResult qa_universality(const Automaton& a, InfiniteValueFn f, const Weight& lambda,
                                          const DecisionOptions& opt = {}) {
    if (is_limit_average(f)) throw UndecidableError("limit-average universality is undecidable");
    detail::check_complete(a, opt);
    return qa_universality(to_ext(a), f, lambda, opt);
}

/// Infimum over all words of the value of the unique run of a deterministic complete automaton.
inline ExtValue bottom_value_det(const ExtAutomaton& a, InfiniteValueFn f) {
    if (!is_deterministic(a)) throw InvalidInput("automaton is not deterministic");
    if (!is_complete(a)) throw InvalidInput("automaton is not complete");
    auto non_final = [&](TransitionId t) {
        const auto& tr = a.transition(t);
        return !a.is_final(tr.src) && !a.is_final(tr.dst);
    };
    auto nf = compute_sccs(a, non_final);
    for (StateId s = 0; s < a.num_states(); ++s)
        if (!a.is_final(s) && nf.nontrivial[nf.scc_id[s]]) return ExtValue::neg_inf();

    const auto& sccs = a.sccs();
    auto in_cycle_scc = [&](TransitionId t) {
        const auto& tr = a.transition(t);
        return sccs.scc_id[tr.src] == sccs.scc_id[tr.dst];
    };
    auto ws = detail::distinct_weights_desc(a);
    std::reverse(ws.begin(), ws.end());
    switch (f) {
        case InfiniteValueFn::Inf: return ws.front();
        case InfiniteValueFn::LimInf: {
            std::optional<ExtValue> m;
            for (TransitionId t = 0; t < a.num_transitions(); ++t)
                if (in_cycle_scc(t) && (!m || a.transition(t).weight < *m)) m = a.transition(t).weight;
            return *m;
        }
        case InfiniteValueFn::Sup:
        case InfiniteValueFn::LimSup:
            for (const auto& v : ws) {
                auto keep = [&](TransitionId t) { return a.transition(t).weight <= v; };
                auto sc = compute_sccs(a, keep);
                auto reach = f == InfiniteValueFn::Sup ? forward_reachable(a, {a.initial()}, keep)
                                                       : std::vector<bool>(a.num_states(), true);
                for (StateId s = 0; s < a.num_states(); ++s)
                    if (reach[s] && sc.nontrivial[sc.scc_id[s]]) return v;
            }
            throw std::logic_error("complete automaton without a cycle");
        case InfiniteValueFn::LimInfAvg:
        case InfiniteValueFn::LimSupAvg: {
            std::optional<Weight> best;
            for (std::uint32_t c = 0; c < sccs.size(); ++c) {
                if (!sccs.nontrivial[c]) continue;
                auto g = detail::scc_graph(a, c);
                for (auto& e : g.edges) e.weight = -e.weight;
                auto m = max_cycle_mean(g.nodes.size(), g.edges);
                if (m && (!best || *m > *best)) best = *m;
            }
            return -*best;
        }
    }
    throw std::logic_error("unreachable");
}

inline ExtValue bottom_value_det(const Automaton& a, InfiniteValueFn f) { return bottom_value_det(to_ext(a), f); }

/// Product of `a` with the positions of `lasso`: its runs are exactly the runs of `a` on the word.
template <class W>
BasicAutomaton<W> lasso_product(const BasicAutomaton<W>& a, const Lasso& lasso) {
    if (lasso.loop.empty()) throw InvalidInput("lasso loop must be nonempty");
    for (Letter l : lasso.stem) if (l >= a.alphabet().size()) throw InvalidInput("lasso letter outside the alphabet");
    for (Letter l : lasso.loop) if (l >= a.alphabet().size()) throw InvalidInput("lasso letter outside the alphabet");
    AutomatonBuilder<W> b{a.alphabet()};
    const std::size_t m = lasso.size();
    std::map<std::pair<StateId, std::size_t>, StateId> ids;
    std::vector<std::pair<StateId, std::size_t>> work;
    auto id = [&](StateId q, std::size_t pos) {
        auto [it, fresh] = ids.emplace(std::pair(q, pos), 0);
        if (fresh) {
            it->second = b.add_state(a.state_name(q) + "@" + std::to_string(pos), a.is_final(q));
            work.emplace_back(q, pos);
        }
        return it->second;
    };
    b.set_initial(id(a.initial(), 0));
    while (!work.empty()) {
        auto [q, pos] = work.back();
        work.pop_back();
        StateId src = ids.at({q, pos});
        for (TransitionId t : a.out(q)) {
            const auto& tr = a.transition(t);
            if (tr.letter != lasso.at(pos)) continue;
            b.add_transition(src, tr.letter, id(tr.dst, pos + 1 < m ? pos + 1 : lasso.stem.size()), tr.weight);
        }
    }
    return b.build(true);
}

/// Value of the word stem.loop^omega: supremum of f over accepting runs, NegInf without one.
inline ExtValue qa_eval_lasso(const ExtAutomaton& a, InfiniteValueFn f, const Lasso& lasso) {
    DecisionOptions opt;
    opt.require_complete = false;
    return top_value(lasso_product(a, lasso), f, opt).value;
}

inline ExtValue qa_eval_lasso(const Automaton& a, InfiniteValueFn f, const Lasso& lasso) {
    return qa_eval_lasso(to_ext(a), f, lasso);
}

/// Direct simulation of the unique run of a deterministic automaton on a lasso.
inline ExtValue qa_eval_lasso_det(const Automaton& a, InfiniteValueFn f, const Lasso& lasso) {
    if (!is_deterministic(a)) throw InvalidInput("automaton is not deterministic");
    if (lasso.loop.empty()) throw InvalidInput("lasso loop must be nonempty");
    std::map<std::pair<StateId, std::size_t>, std::size_t> seen;
    std::vector<Weight> weights;
    std::vector<bool> final_after;
    StateId q = a.initial();
    std::size_t pos = 0;
    while (true) {
        if (pos >= lasso.stem.size()) {
            auto [it, fresh] = seen.emplace(std::pair(q, pos), weights.size());
            if (!fresh) {
                std::size_t start = it->second;
                bool visits = std::any_of(final_after.begin() + static_cast<std::ptrdiff_t>(start), final_after.end(),
                                          [](bool b) { return b; });
                if (!visits) return ExtValue::neg_inf();
                PeriodicSeq s{{weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(start)},
                              {weights.begin() + static_cast<std::ptrdiff_t>(start), weights.end()}};
                return eval_lasso(f, s);
            }
        }
        auto t = successor(a, q, lasso.at(pos));
        if (!t) return ExtValue::neg_inf();
        const auto& tr = a.transition(*t);
        weights.push_back(tr.weight);
        final_after.push_back(a.is_final(tr.dst));
        q = tr.dst;
        pos = lasso.next(pos);
    }
}

}  // namespace nqa

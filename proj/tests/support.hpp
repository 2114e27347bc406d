#pragma once

// Random instances and brute-force oracles shared by the test suites.

#include "nqa/automaton.hpp"
#include "nqa/nested.hpp"
#include "nqa/qa_decisions.hpp"
#include "nqa/silent_elimination.hpp"
#include "nqa/silent_qa.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace nqa::test {

using Rng = std::mt19937_64;

inline std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline Alphabet letters(std::size_t n) {
    Alphabet sigma;
    for (std::size_t i = 0; i < n; ++i) sigma.add(std::string(1, static_cast<char>('a' + i)));
    return sigma;
}

struct RandomQaShape {
    std::size_t states = 4;
    std::size_t letters = 2;
    std::int64_t wmin = -2;
    std::int64_t wmax = 3;
    bool deterministic = true;
    double final_probability = 0.5;
};

/// Complete automaton with states q0..q{n-1}; unreachable states are pruned by the builder.
inline Automaton random_qa(Rng& rng, const RandomQaShape& shape) {
    AutomatonBuilder<Weight> b{letters(shape.letters)};
    const auto n = static_cast<std::int64_t>(shape.states);
    for (std::int64_t i = 0; i < n; ++i) b.add_state("q" + std::to_string(i), coin(rng, shape.final_probability));
    b.set_initial(0);
    for (StateId s = 0; s < shape.states; ++s)
        for (Letter a = 0; a < shape.letters; ++a) {
            std::size_t count = shape.deterministic ? 1 : static_cast<std::size_t>(uniform(rng, 1, 2));
            for (std::size_t i = 0; i < count; ++i)
                b.add_transition(s, a, static_cast<StateId>(uniform(rng, 0, n - 1)),
                                 Weight(uniform(rng, shape.wmin, shape.wmax)));
        }
    return b.build();
}

struct RandomNqaShape {
    std::size_t parent_states = 3;
    std::size_t child_states = 3;
    std::size_t letters = 2;
    std::size_t children = 1;
    std::int64_t wmin = -2;
    std::int64_t wmax = 3;
    /// Probability that a non-final child state misses a letter.
    double child_gap = 0.0;
    /// Every parent state final and every parent transition spawning.
    bool always_spawn = false;
    /// Child transitions only move to higher-numbered states, so every child run terminates.
    bool acyclic_children = false;
};

/// Deterministic NQA with a complete parent; child finals have no outgoing transitions.
inline NestedAutomaton random_nqa(Rng& rng, const RandomNqaShape& shape) {
    const Alphabet sigma = letters(shape.letters);
    AutomatonBuilder<Weight> p{sigma};
    const auto np = static_cast<std::int64_t>(shape.parent_states);
    for (std::int64_t i = 0; i < np; ++i) p.add_state("p" + std::to_string(i), i == 0 || shape.always_spawn || coin(rng));
    p.set_initial(0);
    for (StateId s = 0; s < shape.parent_states; ++s)
        for (Letter a = 0; a < shape.letters; ++a)
            p.add_transition(s, a, static_cast<StateId>(uniform(rng, 0, np - 1)),
                             Weight(uniform(rng, shape.always_spawn ? 1 : 0, static_cast<std::int64_t>(shape.children))));
    std::vector<Automaton> children;
    for (std::size_t j = 0; j < shape.children; ++j) {
        AutomatonBuilder<Weight> c{sigma};
        const auto nc = static_cast<std::int64_t>(shape.child_states);
        // c0 is never final; the last state always is.
        std::vector<bool> final(shape.child_states);
        for (std::int64_t i = 0; i < nc; ++i) {
            final[i] = i == nc - 1 || (i > 0 && coin(rng, 0.3));
            c.add_state("c" + std::to_string(i), final[i]);
        }
        c.set_initial(0);
        for (StateId s = 0; s < shape.child_states; ++s) {
            if (final[s]) continue;
            for (Letter a = 0; a < shape.letters; ++a) {
                if (s > 0 && coin(rng, shape.child_gap)) continue;
                auto lo = shape.acyclic_children ? static_cast<std::int64_t>(s) + 1 : 0;
                c.add_transition(s, a, static_cast<StateId>(uniform(rng, lo, nc - 1)),
                                 Weight(uniform(rng, shape.wmin, shape.wmax)));
            }
        }
        children.push_back(c.build(true));
    }
    return {p.build(), std::move(children), true};
}

/// Calls fn on every lasso with 1 <= |stem| + |loop| <= max_len over `letters` letters.
inline void for_each_lasso(std::size_t letters, std::size_t max_len, const std::function<void(const Lasso&)>& fn) {
    std::vector<Letter> w;
    for (std::size_t len = 1; len <= max_len; ++len) {
        w.assign(len, 0);
        while (true) {
            for (std::size_t s = 0; s < len; ++s) fn(Lasso{{w.begin(), w.begin() + s}, {w.begin() + s, w.end()}});
            std::size_t i = 0;
            while (i < len && ++w[i] == letters) w[i++] = 0;
            if (i == len) break;
        }
    }
}

inline Lasso random_lasso(Rng& rng, std::size_t letters, std::size_t max_stem, std::size_t max_loop) {
    Lasso l;
    auto stem = uniform(rng, 0, static_cast<std::int64_t>(max_stem));
    auto loop = uniform(rng, 1, static_cast<std::int64_t>(max_loop));
    for (std::int64_t i = 0; i < stem; ++i) l.stem.push_back(static_cast<Letter>(uniform(rng, 0, letters - 1)));
    for (std::int64_t i = 0; i < loop; ++i) l.loop.push_back(static_cast<Letter>(uniform(rng, 0, letters - 1)));
    return l;
}

/// Value of a word on an automaton with silent weights: restrict to the runs on the
/// word, remove silent weights, take the best accepting run.
inline ExtValue silent_qa_lasso_value(const SilentQA& q, InfiniteValueFn f, const Lasso& l) {
    auto product = lasso_product(q, l);
    auto e = eliminate_silent(product, f, false);
    return top_value(e.qa, f, {false, nullptr}).value;
}

/// Best value over all lassos up to max_len, evaluated by `value`.
template <class Eval>
ExtValue best_over_lassos(std::size_t letters, std::size_t max_len, Eval&& value) {
    ExtValue best = ExtValue::neg_inf();
    for_each_lasso(letters, max_len, [&](const Lasso& l) { best = max(best, value(l)); });
    return best;
}

template <class Eval>
ExtValue worst_over_lassos(std::size_t letters, std::size_t max_len, Eval&& value) {
    ExtValue worst = ExtValue::pos_inf();
    for_each_lasso(letters, max_len, [&](const Lasso& l) { worst = min(worst, value(l)); });
    return worst;
}

/// f read off the prefix stem.loop^copies: the averages take the mean of the whole
/// prefix, the limit functions look at the last loop copy.
inline Weight unrolled_value(InfiniteValueFn f, const PeriodicSeq& s, std::size_t copies) {
    std::vector<Weight> xs = s.stem;
    for (std::size_t i = 0; i < copies; ++i) xs.insert(xs.end(), s.loop.begin(), s.loop.end());
    std::vector<Weight> tail(xs.end() - static_cast<std::ptrdiff_t>(s.loop.size()), xs.end());
    switch (f) {
        case InfiniteValueFn::Inf: return *std::min_element(xs.begin(), xs.end());
        case InfiniteValueFn::Sup: return *std::max_element(xs.begin(), xs.end());
        case InfiniteValueFn::LimInf: return *std::min_element(tail.begin(), tail.end());
        case InfiniteValueFn::LimSup: return *std::max_element(tail.begin(), tail.end());
        case InfiniteValueFn::LimInfAvg:
        case InfiniteValueFn::LimSupAvg: {
            Weight sum = 0;
            for (const auto& x : xs) sum += x;
            return sum / Weight(static_cast<std::int64_t>(xs.size()));
        }
    }
    return 0;
}

}  // namespace nqa::test

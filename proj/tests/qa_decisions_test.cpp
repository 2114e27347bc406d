#include "support.hpp"

#include "nqa/qa_decisions.hpp"
#include "nqa/text_format.hpp"

#include <gtest/gtest.h>

#include <functional>

namespace nqa {
namespace {

using F = InfiniteValueFn;
using test::Rng;

constexpr F kExtremal[] = {F::Inf, F::Sup, F::LimInf, F::LimSup};

// p: a-loop of weight 1; cycle p -b-> q -a-> p of mean 2.
Automaton karp_example() {
    return parse_qa(
        "a : 1, p -> p\n"
        "b : 1, p -> q\n"
        "a : 3, q -> p\n"
        "b : 0, q -> sink\n"
        "a : 0, sink -> sink\n"
        "b : 0, sink -> sink\n"
        "final: p\n");
}

TEST(TopValue, Examples) {
    auto a = parse_qa("a : 1, p -> p\nb : 5, p -> q\na : 2, q -> q\nb : -1, q -> q\n");
    EXPECT_EQ(top_value(a, F::Sup).value, ExtValue(Weight(5)));
    EXPECT_EQ(top_value(a, F::Inf).value, ExtValue(Weight(2)));
    EXPECT_EQ(top_value(a, F::LimSup).value, ExtValue(Weight(2)));
    EXPECT_EQ(top_value(a, F::LimInf).value, ExtValue(Weight(2)));
    EXPECT_EQ(top_value(a, F::LimSupAvg).value, ExtValue(Weight(2)));
    EXPECT_EQ(top_value(a, F::LimInfAvg).value, ExtValue(Weight(2)));
}

TEST(TopValue, NoAcceptingRun) {
    auto a = parse_qa("a : 4, p -> q\na : 1, q -> q\nfinal: p\n");
    for (F f : kAllInfiniteValueFns) EXPECT_EQ(top_value(a, f).value, ExtValue::neg_inf());
    EXPECT_FALSE(qa_emptiness(a, F::Sup, Weight(-100)).nonempty);
}

TEST(TopValue, BuchiConditionRestrictsLimits) {
    // The 5-loop avoids the final state; only the 1-loop through p counts in the limit.
    auto a = parse_qa("a : 1, p -> p\nb : 0, p -> q\nb : 5, q -> q\na : 0, q -> p\nfinal: p\n");
    EXPECT_EQ(top_value(a, F::LimSup).value, ExtValue(Weight(5)));
    EXPECT_EQ(top_value(a, F::LimInf).value, ExtValue(Weight(1)));
    EXPECT_EQ(top_value(a, F::Sup).value, ExtValue(Weight(5)));
    EXPECT_EQ(top_value(a, F::LimSupAvg).value, ExtValue(Weight(5)));
}

TEST(Emptiness, KarpExample) {
    auto a = karp_example();
    auto yes = qa_emptiness(a, F::LimSupAvg, Weight(2));
    EXPECT_TRUE(yes.nonempty);
    EXPECT_EQ(yes.top, ExtValue(Weight(2)));
    ASSERT_TRUE(yes.witness);
    EXPECT_GE(qa_eval_lasso(a, F::LimSupAvg, *yes.witness), ExtValue(Weight(2)));
    EXPECT_FALSE(qa_emptiness(a, F::LimSupAvg, Weight(9, 4)).nonempty);
    EXPECT_TRUE(qa_emptiness(a, F::LimInfAvg, Weight(2)).nonempty);
}

TEST(Emptiness, RequiresCompleteAutomaton) {
    auto a = parse_qa("a : 1, p -> p\nb : 1, p -> q\na : 1, q -> q\n");
    EXPECT_THROW(qa_emptiness(a, F::Sup, Weight(0)), InvalidInput);
    EXPECT_THROW(qa_universality(a, F::Sup, Weight(0)), InvalidInput);
}

TEST(Universality, Examples) {
    auto a = parse_qa("a : 1, p -> p\nb : 3, p -> p\n");
    EXPECT_TRUE(qa_universality(a, F::Inf, Weight(1)).universal);
    auto r = qa_universality(a, F::LimInf, Weight(2));
    EXPECT_FALSE(r.universal);
    ASSERT_TRUE(r.counterexample);
    EXPECT_LT(qa_eval_lasso(a, F::LimInf, *r.counterexample), ExtValue(Weight(2)));
    EXPECT_TRUE(qa_universality(a, F::Sup, Weight(1)).universal);
    EXPECT_FALSE(qa_universality(a, F::Sup, Weight(3)).universal);

    // A nondeterministic guess of the last b: b^omega needs the 3-loop at q.
    auto n = parse_qa(
        "a : 0, p -> p\nb : 0, p -> p\nb : 0, p -> q\nb : 3, q -> q\n"
        "a : 0, q -> dead\na : 0, dead -> dead\nb : 0, dead -> dead\nfinal: q\n");
    auto u = qa_universality(n, F::LimSup, Weight(3));
    EXPECT_FALSE(u.universal);
    ASSERT_TRUE(u.counterexample);
    EXPECT_EQ(qa_eval_lasso(n, F::LimSup, *u.counterexample), ExtValue::neg_inf());
}

TEST(BottomValueDet, Examples) {
    auto a = parse_qa("a : 1, p -> p\nb : 5, p -> p\n");
    EXPECT_EQ(bottom_value_det(a, F::Inf), ExtValue(Weight(1)));
    EXPECT_EQ(bottom_value_det(a, F::Sup), ExtValue(Weight(1)));
    EXPECT_EQ(bottom_value_det(a, F::LimSupAvg), ExtValue(Weight(1)));
    auto b = parse_qa("a : 1, p -> p\nb : 5, p -> q\na : 0, q -> q\nb : 0, q -> q\nfinal: p\n");
    EXPECT_EQ(bottom_value_det(b, F::LimSup), ExtValue::neg_inf());
}

TEST(QaEvalLasso, DeterministicAgreesWithProduct) {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        auto a = test::random_qa(rng, {});
        auto l = test::random_lasso(rng, 2, 3, 3);
        for (F f : kAllInfiniteValueFns) EXPECT_EQ(qa_eval_lasso_det(a, f, l), qa_eval_lasso(a, f, l));
    }
}

/// Largest mean of a simple cycle inside an accepting component, by enumerating cycles.
ExtValue brute_force_mean(const Automaton& a) {
    const std::size_t n = a.num_states();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n));
    for (const auto& t : a.transitions()) reach[t.src][t.dst] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = 0; t < n; ++t)
                if (reach[s][k] && reach[k][t]) reach[s][t] = true;
    auto accepting = [&](StateId s) {
        for (StateId t = 0; t < n; ++t)
            if (a.is_final(t) && (s == t || (reach[s][t] && reach[t][s])) && reach[s][s]) return true;
        return false;
    };
    ExtValue best = ExtValue::neg_inf();
    // Simple cycles whose smallest state is `start`.
    for (StateId start = 0; start < n; ++start) {
        if ((start != 0 && !reach[0][start]) || !accepting(start)) continue;
        std::vector<bool> on(n);
        std::function<void(StateId, Weight, std::int64_t)> dfs = [&](StateId s, Weight sum, std::int64_t len) {
            for (TransitionId t : a.out(s)) {
                const auto& tr = a.transition(t);
                if (tr.dst == start) best = max(best, ExtValue((sum + tr.weight) / Weight(len + 1)));
                else if (tr.dst > start && !on[tr.dst]) {
                    on[tr.dst] = true;
                    dfs(tr.dst, sum + tr.weight, len + 1);
                    on[tr.dst] = false;
                }
            }
        };
        on[start] = true;
        dfs(start, Weight(0), 0);
    }
    return best;
}

TEST(Emptiness, MeanPayoffAgreesWithSimpleCycles) {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        test::RandomQaShape shape;
        shape.states = static_cast<std::size_t>(test::uniform(rng, 1, 7));
        shape.deterministic = test::coin(rng);
        shape.final_probability = 0.4;
        auto a = test::random_qa(rng, shape);
        auto expect = brute_force_mean(a);
        EXPECT_EQ(top_value(a, F::LimSupAvg).value, expect) << serialize_qa(a);
        if (!expect.is_finite()) continue;
        EXPECT_TRUE(qa_emptiness(a, F::LimSupAvg, expect.finite()).nonempty);
        EXPECT_FALSE(qa_emptiness(a, F::LimSupAvg, expect.finite() + Weight(1, 100)).nonempty);
    }
}

TEST(Emptiness, ExtremalAgreesWithLassoOracle) {
    Rng rng(42);
    for (int i = 0; i < 60; ++i) {
        test::RandomQaShape shape;
        shape.states = static_cast<std::size_t>(test::uniform(rng, 1, 3));
        shape.deterministic = test::coin(rng);
        auto a = test::random_qa(rng, shape);
        F f = kExtremal[i % 4];
        // Optimal path lassos have at most 3 |Q| transitions.
        auto best = test::best_over_lassos(2, 9, [&](const Lasso& l) { return qa_eval_lasso(a, f, l); });
        auto top = top_value(a, f);
        EXPECT_EQ(top.value, best) << to_string(f) << "\n" << serialize_qa(a);
        if (top.witness) {
            EXPECT_EQ(qa_eval_lasso(a, f, *top.witness), top.value);
        }
    }
}

TEST(Emptiness, WitnessesReachThreshold) {
    Rng rng(43);
    for (int i = 0; i < 200; ++i) {
        test::RandomQaShape shape;
        shape.states = static_cast<std::size_t>(test::uniform(rng, 1, 6));
        shape.deterministic = test::coin(rng);
        auto a = test::random_qa(rng, shape);
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        Weight lambda(test::uniform(rng, -4, 6), test::uniform(rng, 1, 2));
        auto r = qa_emptiness(a, f, lambda);
        EXPECT_EQ(r.nonempty, top_value(a, f).value >= ExtValue(lambda));
        if (!r.nonempty || !r.witness) continue;
        EXPECT_GE(qa_eval_lasso(a, f, *r.witness), ExtValue(lambda)) << to_string(f) << " at " << lambda.str();
    }
}

TEST(Emptiness, AntitoneInThreshold) {
    Rng rng(44);
    for (int i = 0; i < 100; ++i) {
        auto a = test::random_qa(rng, {});
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        bool previous = true;
        for (int k = -8; k <= 8; ++k) {
            bool now = qa_emptiness(a, f, Weight(k, 2)).nonempty;
            EXPECT_TRUE(previous || !now);
            previous = now;
        }
    }
}

TEST(TopValue, MonotoneUnderAddedTransitions) {
    Rng rng(45);
    for (int i = 0; i < 100; ++i) {
        auto a = test::random_qa(rng, {});
        AutomatonBuilder<Weight> b{a.alphabet()};
        for (StateId s = 0; s < a.num_states(); ++s) b.add_state(a.state_name(s), a.is_final(s));
        b.set_initial(a.initial());
        for (const auto& t : a.transitions()) b.add_transition(t.src, t.letter, t.dst, t.weight);
        b.add_transition(static_cast<StateId>(test::uniform(rng, 0, a.num_states() - 1)),
                         static_cast<Letter>(test::uniform(rng, 0, 1)),
                         static_cast<StateId>(test::uniform(rng, 0, a.num_states() - 1)), Weight(test::uniform(rng, -2, 3)));
        auto bigger = b.build();
        for (F f : kAllInfiniteValueFns) EXPECT_LE(top_value(a, f).value, top_value(bigger, f).value) << to_string(f);
    }
}

TEST(Universality, AgreesWithBottomValueAndLassos) {
    Rng rng(46);
    for (int i = 0; i < 120; ++i) {
        test::RandomQaShape shape;
        shape.states = static_cast<std::size_t>(test::uniform(rng, 1, 4));
        shape.deterministic = i % 2 == 0;
        shape.final_probability = 0.7;
        auto a = test::random_qa(rng, shape);
        F f = kExtremal[i % 4];
        Weight lambda(test::uniform(rng, -2, 3), test::uniform(rng, 1, 2));
        auto r = qa_universality(a, f, lambda);
        if (shape.deterministic) {
            EXPECT_EQ(r.universal, bottom_value_det(a, f) >= ExtValue(lambda));
        }
        auto worst = test::worst_over_lassos(2, 6, [&](const Lasso& l) { return qa_eval_lasso(a, f, l); });
        if (worst < ExtValue(lambda)) {
            EXPECT_FALSE(r.universal);
        }
        if (!r.universal) {
            ASSERT_TRUE(r.counterexample);
            EXPECT_LT(qa_eval_lasso(a, f, *r.counterexample), ExtValue(lambda));
        }
    }
}

}  // namespace
}  // namespace nqa

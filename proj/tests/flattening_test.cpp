#include "support.hpp"

#include "nqa/child_values.hpp"
#include "nqa/clipping.hpp"
#include "nqa/dispatcher.hpp"
#include "nqa/flatten.hpp"
#include "nqa/generators.hpp"
#include "nqa/multiset.hpp"
#include "nqa/nondet_oracle.hpp"
#include "nqa/silent_elimination.hpp"
#include "nqa/text_format.hpp"

#include <gtest/gtest.h>

namespace nqa {
namespace {

using F = InfiniteValueFn;
using K = FiniteValueFn::Kind;
using test::Rng;

constexpr F kExtremal[] = {F::Inf, F::Sup, F::LimInf, F::LimSup};

NestedAutomaton request_grant() {
    return parse_nqa(
        "@PARENT\n"
        "r : 1, q -> q\no : 0, q -> q\ng : 0, q -> q\n"
        "@CHILD 1\n"
        "r : 1, c0 -> c0\no : 1, c0 -> c0\ng : 0, c0 -> c1\nfinal: c1\n");
}

// The child may stop after one a (value 1) or read a second one (value 3 under Sum+).
NestedAutomaton two_exit() {
    return parse_nqa(
        "@PARENT\n"
        "a : 1, p -> p\nb : 0, p -> p\n"
        "@CHILD 1\n"
        "a : 1, c0 -> c1\nb : 1, c0 -> c1\na : 2, c1 -> c2\nfinal: c1 c2\n");
}

std::vector<Weight> ws(std::initializer_list<std::int64_t> xs) {
    std::vector<Weight> out;
    for (auto x : xs) out.emplace_back(x);
    return out;
}

TEST(ChildReturnValues, Examples) {
    EXPECT_EQ(child_return_values(gen_response(2, 2), 0, FiniteValueFn::sum_bounded(Weight(2))), ws({1, 2}));
    EXPECT_EQ(child_return_values(gen_resource(1, 2), 0, FiniteValueFn::max()), ws({0, 1, 2}));
    EXPECT_EQ(child_return_values(request_grant(), 0, FiniteValueFn::min()), ws({0}));
    EXPECT_THROW(child_return_values(request_grant(), 0, FiniteValueFn::sum_plus()), InvalidInput);
    EXPECT_THROW(child_return_values(request_grant(), 1, FiniteValueFn::max()), InvalidInput);
}

TEST(FlattenRegular, ResponseMaxExample) {
    auto n = gen_response(1, 1);
    auto flat = flatten_regular(n, F::Sup, FiniteValueFn::max());
    auto r = parse_letters(n.alphabet(), "r g");
    Lasso l{{}, r};
    EXPECT_EQ(test::silent_qa_lasso_value(flat, F::Sup, l), nqa_eval_lasso(n, F::Sup, FiniteValueFn::max(), l));
    EXPECT_EQ(nqa_eval_lasso(n, F::Sup, FiniteValueFn::max(), l), ExtValue(Weight(1)));
}

TEST(FlattenRegular, AgreesWithLassoOracle) {
    Rng rng(51);
    for (int i = 0; i < 40; ++i) {
        test::RandomNqaShape shape;
        shape.parent_states = static_cast<std::size_t>(test::uniform(rng, 1, 3));
        shape.children = static_cast<std::size_t>(test::uniform(rng, 1, 2));
        auto n = test::random_nqa(rng, shape);
        const K kinds[] = {K::Min, K::Max, K::SumB};
        K gk = kinds[i % 3];
        auto g = make_finite_value_fn(gk, gk == K::SumB ? std::optional<Weight>(Weight(2)) : std::nullopt);
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        auto flat = flatten_regular(n, f, g);
        for (int j = 0; j < 10; ++j) {
            auto l = test::random_lasso(rng, n.alphabet().size(), 3, 3);
            EXPECT_EQ(test::silent_qa_lasso_value(flat, f, l), nqa_eval_lasso(n, f, g, l))
                << to_string(f) << " " << to_string(g) << "\n" << serialize_nqa(n);
        }
    }
}

TEST(FlattenThreshold, WeightsAreZeroOrOne) {
    for (F f : kExtremal) {
        auto flat = flatten_extremal_threshold(gen_response(2, 3), f, FiniteValueFn::sum_plus(), Weight(2));
        for (const auto& t : flat.transitions())
            if (!t.weight.silent) {
                EXPECT_TRUE(t.weight.value == Weight(0) || t.weight.value == Weight(1));
            }
    }
    EXPECT_THROW(flatten_extremal_threshold(gen_response(1, 1), F::LimSupAvg, FiniteValueFn::max(), Weight(1)),
                 InvalidInput);
}

TEST(FlattenThreshold, IndicatesThresholdOnLassos) {
    Rng rng(52);
    for (int i = 0; i < 40; ++i) {
        auto n = test::random_nqa(rng, {});
        F f = kExtremal[i % 4];
        const K kinds[] = {K::SumPlus, K::Max, K::Min, K::SumMinus};
        auto g = make_finite_value_fn(kinds[(i / 4) % 4], std::nullopt);
        Weight lambda(test::uniform(rng, -3, 4), test::uniform(rng, 1, 2));
        auto flat = flatten_extremal_threshold(n, f, g, lambda);
        for (int j = 0; j < 10; ++j) {
            auto l = test::random_lasso(rng, n.alphabet().size(), 3, 3);
            bool expect = nqa_eval_lasso(n, f, g, l) >= ExtValue(lambda);
            bool got = test::silent_qa_lasso_value(flat, f, l) >= ExtValue(Weight(1));
            EXPECT_EQ(got, expect) << to_string(f) << " " << to_string(g) << " at " << lambda.str();
        }
    }
}

TEST(Clip, Examples) {
    auto a = gen_response(2, 2);
    auto plus = clip_child_sums(a, FiniteValueFn::sum_plus(), Weight(5, 2));
    EXPECT_EQ(plus.g.kind(), K::SumB);
    EXPECT_EQ(plus.g.bound(), Weight(3));
    EXPECT_EQ(plus.lambda, Weight(5, 2));
    auto minus = clip_child_sums(a, FiniteValueFn::sum_minus(), Weight(-7, 2));
    EXPECT_EQ(minus.g.bound(), Weight(4));
    for (const auto& t : minus.nqa.children[0].transitions()) EXPECT_LE(t.weight.sign(), 0);
    EXPECT_EQ(clip_child_sums(a, FiniteValueFn::sum_minus(), Weight(1)).g.bound(), Weight(1));
    EXPECT_EQ(clip_child_sums(a, FiniteValueFn::sum_plus(), Weight(-2)).g.bound(), Weight(0));
    EXPECT_THROW(clip_child_sums(a, FiniteValueFn::max(), Weight(1)), InvalidInput);
}

TEST(Clip, PreservesThresholdComparisonOnLassos) {
    Rng rng(53);
    for (int i = 0; i < 40; ++i) {
        auto n = test::random_nqa(rng, {});
        F f = kExtremal[i % 4];
        auto g = i % 2 ? FiniteValueFn::sum_plus() : FiniteValueFn::sum_minus();
        Weight lambda(test::uniform(rng, -5, 5), test::uniform(rng, 1, 2));
        auto c = clip_child_sums(n, g, lambda);
        for (int j = 0; j < 10; ++j) {
            auto l = test::random_lasso(rng, n.alphabet().size(), 3, 3);
            EXPECT_EQ(nqa_eval_lasso(c.nqa, f, c.g, l) >= ExtValue(c.lambda), nqa_eval_lasso(n, f, g, l) >= ExtValue(lambda))
                << to_string(f) << " " << to_string(g) << " at " << lambda.str();
        }
    }
}

TEST(AlphabetExtension, SplitsNondeterministicChoices) {
    auto n = two_exit();
    EXPECT_FALSE(is_deterministic(n));
    auto e = determinize_alphabet_extension(n);
    EXPECT_TRUE(is_deterministic(e.nqa));
    // c0 chooses on a and on b whether to stop in c1; c1 has a single a-option.
    EXPECT_EQ(e.nqa.alphabet().size(), 4u);
    EXPECT_TRUE(e.nqa.alphabet().find("a#1"));
    EXPECT_TRUE(e.nqa.alphabet().find("b#1"));
    EXPECT_EQ(e.projection, (std::vector<Letter>{0, 0, 1, 1}));
}

TEST(AlphabetExtension, DeterministicInputMapsOneToOne) {
    auto n = gen_response(2, 2);
    auto e = determinize_alphabet_extension(n);
    ASSERT_EQ(e.nqa.alphabet().size(), n.alphabet().size());
    for (Letter a = 0; a < n.alphabet().size(); ++a) {
        EXPECT_EQ(e.projection[a], a);
        EXPECT_EQ(e.nqa.alphabet().name(a), n.alphabet().name(a) + "#0");
    }
    EXPECT_EQ(e.nqa.parent.num_states(), n.parent.num_states());
}

TEST(AlphabetExtension, ExtendedRunsAreRunsOfTheOriginal) {
    auto n = two_exit();
    auto e = determinize_alphabet_extension(n);
    test::for_each_lasso(e.nqa.alphabet().size(), 4, [&](const Lasso& l) {
        for (F f : kAllInfiniteValueFns) {
            auto det = nqa_eval_lasso(e.nqa, f, FiniteValueFn::sum_plus(), l);
            auto nondet = nqa_eval_lasso_nondet(n, f, FiniteValueFn::sum_plus(), e.project(l), 100000);
            EXPECT_FALSE(nondet.exhausted);
            EXPECT_LE(det, nondet.value);
        }
    });
    // a#0 lets every child read its second a.
    Lasso best{{}, {*e.nqa.alphabet().find("a#0")}};
    EXPECT_EQ(nqa_eval_lasso(e.nqa, F::LimSupAvg, FiniteValueFn::sum_plus(), best), ExtValue(Weight(3)));
}

TEST(Synchronize, MergesChildren) {
    auto b = gen_resource(2, 1);
    auto s = synchronize_children(b);
    ASSERT_EQ(s.entry.size(), 2u);
    EXPECT_EQ(s.ultimate.num_states(), b.children[0].num_states() + b.children[1].num_states());
    EXPECT_NE(s.entry[0], s.entry[1]);
    EXPECT_THROW(s.as_nested(), UnsupportedError);
    auto one = synchronize_children(gen_response(1, 2)).as_nested();
    EXPECT_EQ(one.num_children(), 1u);
    EXPECT_THROW(synchronize_children(two_exit()), InvalidInput);
}

TEST(Multiset, CountsSortedAndCapped) {
    auto s = synchronize_children(gen_response(2, 2));
    for (std::size_t cap : {1u, 2u, 3u}) {
        auto g = multiset_flatten_graph(s, F::LimSupAvg, cap);
        for (const auto& m : g.states) {
            for (std::size_t i = 0; i < m.counts.size(); ++i) {
                EXPECT_LE(m.counts[i].second, cap);
                EXPECT_GE(m.counts[i].second, 1u);
                if (i > 0) {
                    EXPECT_LT(m.counts[i - 1].first, m.counts[i].first);
                }
            }
        }
    }
    EXPECT_THROW(multiset_flatten_graph(s, F::LimSupAvg, 0), InvalidInput);
    EXPECT_THROW(multiset_flatten_graph(s, F::Sup, 2), InvalidInput);
}

TEST(Multiset, MonotoneInCap) {
    Rng rng(54);
    for (int i = 0; i < 20; ++i) {
        test::RandomNqaShape shape;
        shape.acyclic_children = i % 2 == 0;
        auto s = synchronize_children(test::random_nqa(rng, shape));
        std::size_t previous_states = 0;
        ExtValue previous = ExtValue::neg_inf();
        for (std::size_t cap = 1; cap <= 4; ++cap) {
            auto g = multiset_flatten_graph(s, F::LimSupAvg, cap);
            auto v = top_value(eliminate_silent(g.qa, F::LimSupAvg).qa, F::LimSupAvg, {false, nullptr}).value;
            EXPECT_GE(g.states.size(), previous_states);
            EXPECT_GE(v, previous);
            previous_states = g.states.size();
            previous = v;
        }
    }
}

TEST(Multiset, AgreesWithLassoOracle) {
    Rng rng(55);
    for (int i = 0; i < 30; ++i) {
        test::RandomNqaShape shape;
        shape.parent_states = static_cast<std::size_t>(test::uniform(rng, 1, 2));
        shape.acyclic_children = true;
        auto n = test::random_nqa(rng, shape);
        F f = i % 2 ? F::LimSupAvg : F::LimInfAvg;
        // Running instances never exceed the child's run length, so cap 8 loses nothing here.
        auto flat = multiset_flatten(synchronize_children(n), f, 8);
        for (int j = 0; j < 10; ++j) {
            auto l = test::random_lasso(rng, n.alphabet().size(), 2, 3);
            EXPECT_EQ(test::silent_qa_lasso_value(flat, f, l), nqa_eval_lasso(n, f, FiniteValueFn::sum_minus(), l));
        }
    }
}

TEST(ChildsumUnbounded, Examples) {
    auto mon = childsum_unbounded(request_grant(), F::LimSupAvg, FiniteValueFn::sum_plus());
    EXPECT_TRUE(mon.unbounded);
    auto a = childsum_unbounded(gen_response(2, 2), F::LimSupAvg, FiniteValueFn::sum_plus());
    EXPECT_FALSE(a.unbounded);
    EXPECT_GE(a.lambda_star, Weight(2));
    EXPECT_THROW(childsum_unbounded(request_grant(), F::Sup, FiniteValueFn::sum_plus()), InvalidInput);
}

TEST(ChildsumUnbounded, BoundedInstancesNeverExceedLambdaStar) {
    Rng rng(56);
    for (int i = 0; i < 30; ++i) {
        auto n = test::random_nqa(rng, {});
        auto u = childsum_unbounded(n, F::LimSupAvg, FiniteValueFn::sum_plus());
        if (u.unbounded) continue;
        test::for_each_lasso(n.alphabet().size(), 5, [&](const Lasso& l) {
            EXPECT_LE(nqa_eval_lasso(n, F::LimSupAvg, FiniteValueFn::sum_plus(), l), ExtValue(u.lambda_star));
        });
    }
}

TEST(EliminateSilent, Examples) {
    auto q = parse_silent_qa("a : _, p -> q\nb : 2, q -> p\nb : _, p -> r\na : 1, r -> p\n");
    auto sup = eliminate_silent(q, F::Sup);
    EXPECT_EQ(top_value(sup.qa, F::Sup, {false, nullptr}).value, ExtValue(Weight(2)));
    auto avg = eliminate_silent(q, F::LimSupAvg);
    EXPECT_EQ(top_value(avg.qa, F::LimSupAvg, {false, nullptr}).value, ExtValue(Weight(2)));
    auto inf = eliminate_silent(q, F::Inf);
    EXPECT_EQ(top_value(inf.qa, F::Inf, {false, nullptr}).value, ExtValue(Weight(2)));

    // The carried cost -3 joins the next emitted 1.
    auto carried = parse_silent_qa("b : _-3, p -> r\na : 1, r -> p\n");
    EXPECT_EQ(top_value(eliminate_silent(carried, F::LimSupAvg).qa, F::LimSupAvg, {false, nullptr}).value,
              ExtValue(Weight(-2)));
    EXPECT_THROW(eliminate_silent(parse_silent_qa("b : _+3, p -> r\na : 1, r -> p\n"), F::LimSupAvg), InvalidInput);

    auto silent_loop = parse_silent_qa("a : _, p -> p\n");
    for (F f : kAllInfiniteValueFns)
        EXPECT_EQ(top_value(eliminate_silent(silent_loop, f).qa, f, {false, nullptr}).value, ExtValue::neg_inf());
}

TEST(EliminateSilent, SccOptimizationDoesNotChangeValues) {
    Rng rng(57);
    for (int i = 0; i < 60; ++i) {
        auto n = test::random_nqa(rng, {});
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        auto flat = flatten_regular(n, f, FiniteValueFn::max());
        auto on = eliminate_silent(flat, f, true);
        auto off = eliminate_silent(flat, f, false);
        EXPECT_EQ(top_value(on.qa, f, {false, nullptr}).value, top_value(off.qa, f, {false, nullptr}).value);
    }
}

TEST(Dispatcher, Examples) {
    auto a = gen_response(2, 2);
    auto yes = nqa_emptiness(a, F::Sup, FiniteValueFn::sum_plus(), Weight(2));
    EXPECT_TRUE(yes.nonempty);
    EXPECT_EQ(yes.stats.route, Route::ExtremalThreshold);
    ASSERT_TRUE(yes.witness);
    EXPECT_GE(nqa_eval_lasso(a, F::Sup, FiniteValueFn::sum_plus(), *yes.witness), ExtValue(Weight(2)));
    EXPECT_FALSE(nqa_emptiness(a, F::Sup, FiniteValueFn::sum_plus(), Weight(3)).nonempty);

    auto mon = nqa_emptiness(request_grant(), F::LimSupAvg, FiniteValueFn::sum_plus(), Weight(1000));
    EXPECT_TRUE(mon.nonempty);
    EXPECT_EQ(mon.stats.route, Route::AverageUnbounded);
    EXPECT_EQ(mon.stats.unbounded, std::optional<bool>(true));

    auto ms = nqa_emptiness(a, F::LimSupAvg, FiniteValueFn::sum_minus(), Weight(-1));
    EXPECT_EQ(ms.stats.route, Route::AverageMultiset);
    EXPECT_TRUE(ms.stats.multiplicity_cap.has_value());

    EXPECT_THROW(nqa_emptiness(a, F::LimInfAvg, FiniteValueFn::sum_plus(), Weight(1)), UnsupportedError);
    EXPECT_THROW(nqa_universality(a, F::LimSupAvg, FiniteValueFn::max(), Weight(1)), UndecidableError);
    auto u = nqa_universality(a, F::Inf, FiniteValueFn::sum_plus(), Weight(1));
    EXPECT_EQ(u.stats.route, Route::UniversalClipped);
}

TEST(Dispatcher, RouteNames) {
    EXPECT_EQ(to_string(route_for(Problem::Emptiness, F::LimSup, K::SumB)), "extremal-regular");
    EXPECT_EQ(to_string(route_for(Problem::Emptiness, F::LimInfAvg, K::Max)), "average-regular");
    EXPECT_EQ(to_string(route_for(Problem::Universality, F::Sup, K::Min)), "universal-regular");
}

TEST(Dispatcher, AntitoneInThreshold) {
    Rng rng(58);
    for (int i = 0; i < 20; ++i) {
        auto n = test::random_nqa(rng, {});
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        if (f == F::LimInfAvg) f = F::LimSupAvg;
        auto g = i % 3 == 0 ? FiniteValueFn::sum_plus() : FiniteValueFn::max();
        bool previous = true;
        for (int k = -4; k <= 6; ++k) {
            bool now = nqa_emptiness(n, f, g, Weight(k, 2)).nonempty;
            EXPECT_TRUE(previous || !now) << to_string(f) << " " << to_string(g) << " at " << k << "/2";
            previous = now;
        }
    }
}

TEST(Dispatcher, EmptinessAgreesWithExhaustiveOracle) {
    Rng rng(59);
    for (int i = 0; i < 60; ++i) {
        test::RandomNqaShape shape;
        shape.parent_states = static_cast<std::size_t>(test::uniform(rng, 1, 2));
        shape.always_spawn = shape.acyclic_children = i % 2 == 0;
        auto n = test::random_nqa(rng, shape);
        F f = kAllInfiniteValueFns[static_cast<std::size_t>(i) % 6];
        const K kinds[] = {K::Max, K::Min, K::SumB, K::SumPlus, K::SumMinus};
        K gk = kinds[(i / 6) % 5];
        if (f == F::LimInfAvg && gk == K::SumPlus) gk = K::SumMinus;
        auto g = make_finite_value_fn(gk, gk == K::SumB ? std::optional<Weight>(Weight(2)) : std::nullopt);
        Weight lambda(test::uniform(rng, -3, 4), test::uniform(rng, 1, 2));
        QueryOptions opt;
        opt.multiplicity_cap = 8;
        auto r = nqa_emptiness(n, f, g, lambda, opt);
        const std::string tag = to_string(f) + " " + to_string(g) + " at " + lambda.str();
        auto best = test::best_over_lassos(n.alphabet().size(), 6, [&](const Lasso& l) { return nqa_eval_lasso(n, f, g, l); });
        if (best >= ExtValue(lambda)) {
            EXPECT_TRUE(r.nonempty) << tag << "\n" << serialize_nqa(n);
        }
        if (r.witness) {
            EXPECT_GE(nqa_eval_lasso(n, f, g, *r.witness), ExtValue(lambda)) << tag;
        }
        if (r.nonempty && is_extremal(f)) {
            EXPECT_TRUE(r.witness.has_value()) << tag;
        }
    }
}

}  // namespace
}  // namespace nqa

#include "support.hpp"

#include "nqa/value_functions.hpp"

#include <gtest/gtest.h>

namespace nqa {
namespace {

using F = InfiniteValueFn;

std::vector<Weight> ws(std::initializer_list<std::int64_t> xs) {
    std::vector<Weight> out;
    for (auto x : xs) out.emplace_back(x);
    return out;
}

TEST(EvalFinite, Examples) {
    EXPECT_EQ(eval_finite(FiniteValueFn::sum_plus(), ws({1, 1, 1, 1, 1, 0})), Weight(5));
    EXPECT_EQ(eval_finite(FiniteValueFn::sum_bounded(Weight(2)), ws({1, 1, 1})), Weight(2));
    EXPECT_EQ(eval_finite(FiniteValueFn::min(), ws({3})), Weight(3));
    EXPECT_EQ(eval_finite(FiniteValueFn::max(), ws({0, 1, 1, 2})), Weight(2));
    EXPECT_EQ(eval_finite(FiniteValueFn::sum_minus(), ws({1, -2})), Weight(-3));
}

TEST(EvalFinite, SumBoundedStopsAtFirstCrossing) {
    auto g = FiniteValueFn::sum_bounded(Weight(2));
    EXPECT_EQ(eval_finite(g, ws({-3, 10})), Weight(-2));
    EXPECT_EQ(eval_finite(g, ws({2, -1, -1})), Weight(0));
    EXPECT_EQ(eval_finite(g, ws({3, -5})), Weight(2));
}

TEST(EvalFinite, EmptySequenceRejected) {
    EXPECT_THROW(eval_finite(FiniteValueFn::max(), {}), InvalidInput);
}

TEST(EvalPeriodic, Examples) {
    PeriodicSeq s{ws({5}), ws({2})};
    EXPECT_EQ(eval_lasso(F::LimSupAvg, s), ExtValue(Weight(2)));
    EXPECT_EQ(eval_lasso(F::Sup, s), ExtValue(Weight(5)));
    EXPECT_EQ(eval_lasso(F::LimSup, s), ExtValue(Weight(2)));
    EXPECT_EQ(eval_lasso(F::LimInfAvg, PeriodicSeq{{}, ws({1, 3})}), ExtValue(Weight(2)));
    EXPECT_THROW(eval_lasso(F::Sup, PeriodicSeq{ws({1}), {}}), InvalidInput);
}

TEST(RunningAggregate, Examples) {
    auto xs = ws({5, 2});
    EXPECT_EQ(running_aggregate(F::LimSupAvg, xs), Weight(7, 2));
    EXPECT_EQ(running_aggregate(F::Sup, xs), Weight(5));
    EXPECT_EQ(running_aggregate(F::Inf, xs), Weight(2));
    EXPECT_THROW(running_aggregate(F::Sup, {}), InvalidInput);
}

TEST(ValueFunctionNames, RoundTrip) {
    for (F f : kAllInfiniteValueFns) EXPECT_EQ(parse_infinite_value_fn(to_string(f)), f);
    for (auto k : kAllFiniteKinds) EXPECT_EQ(parse_finite_kind(to_string(k)), k);
    EXPECT_EQ(to_string(FiniteValueFn::Kind::SumPlus), "Sum+");
    EXPECT_EQ(to_string(FiniteValueFn::Kind::SumMinus), "Sum-");
    EXPECT_THROW(parse_infinite_value_fn("Avg"), InvalidInput);
    EXPECT_THROW(parse_finite_kind("Sum"), InvalidInput);
}

TEST(ValueFunctionClasses, PrefixIndependence) {
    EXPECT_TRUE(is_extremal(F::Inf));
    EXPECT_TRUE(is_extremal(F::LimSup));
    EXPECT_FALSE(is_extremal(F::LimInfAvg));
    EXPECT_TRUE(is_limit_average(F::LimSupAvg));
    EXPECT_TRUE(is_sup_like(F::LimSup));
    EXPECT_FALSE(is_sup_like(F::LimInf));
}

TEST(FiniteValueFn, BoundOnlyForSumB) {
    EXPECT_THROW(make_finite_value_fn(FiniteValueFn::Kind::SumB, std::nullopt), InvalidInput);
    EXPECT_THROW(make_finite_value_fn(FiniteValueFn::Kind::Max, Weight(1)), InvalidInput);
    EXPECT_THROW(FiniteValueFn::sum_bounded(Weight(-1)), InvalidInput);
    EXPECT_EQ(make_finite_value_fn(FiniteValueFn::Kind::SumB, Weight(3)).bound(), Weight(3));
}

class RandomSequences : public ::testing::Test {
protected:
    test::Rng rng{314};
    PeriodicSeq next() {
        PeriodicSeq s;
        auto stem = test::uniform(rng, 0, 4), loop = test::uniform(rng, 1, 5);
        for (std::int64_t i = 0; i < stem; ++i) s.stem.emplace_back(test::uniform(rng, -9, 9), test::uniform(rng, 1, 4));
        for (std::int64_t i = 0; i < loop; ++i) s.loop.emplace_back(test::uniform(rng, -9, 9), test::uniform(rng, 1, 4));
        return s;
    }
};

TEST_F(RandomSequences, ExtremalOrder) {
    for (int i = 0; i < 300; ++i) {
        auto s = next();
        EXPECT_LE(eval_lasso(F::Inf, s), eval_lasso(F::LimInf, s));
        EXPECT_LE(eval_lasso(F::LimInf, s), eval_lasso(F::LimSup, s));
        EXPECT_LE(eval_lasso(F::LimSup, s), eval_lasso(F::Sup, s));
        EXPECT_EQ(eval_lasso(F::LimInfAvg, s), eval_lasso(F::LimSupAvg, s));
    }
}

TEST_F(RandomSequences, SumIdentities) {
    for (int i = 0; i < 300; ++i) {
        auto s = next();
        auto xs = s.stem;
        xs.insert(xs.end(), s.loop.begin(), s.loop.end());
        EXPECT_EQ(eval_finite(FiniteValueFn::sum_minus(), xs), -eval_finite(FiniteValueFn::sum_plus(), xs));
        Weight b(test::uniform(rng, 0, 5), test::uniform(rng, 1, 2));
        EXPECT_LE(eval_finite(FiniteValueFn::sum_bounded(b), xs).abs(), b);
    }
}

TEST_F(RandomSequences, MatchesUnrolledPrefix) {
    for (int i = 0; i < 300; ++i) {
        auto s = next();
        for (F f : kAllInfiniteValueFns) {
            if (is_extremal(f)) {
                EXPECT_EQ(eval_lasso(f, s), ExtValue(test::unrolled_value(f, s, 2)));
                continue;
            }
            // The prefix mean converges to the loop mean at rate 1/copies.
            Weight exact = eval_lasso(f, s).finite();
            Weight near = test::unrolled_value(f, s, 400);
            Weight far = test::unrolled_value(f, s, 800);
            EXPECT_LE((far - exact).abs(), (near - exact).abs());
            EXPECT_LE((far - exact).abs() * Weight(800), Weight(72));
        }
    }
}

TEST_F(RandomSequences, LoopRotationInvariant) {
    for (int i = 0; i < 300; ++i) {
        auto s = next();
        auto r = s;
        std::rotate(r.loop.begin(), r.loop.begin() + static_cast<std::ptrdiff_t>(r.loop.size() / 2), r.loop.end());
        for (F f : kAllInfiniteValueFns) EXPECT_EQ(eval_lasso(f, s), eval_lasso(f, r));
    }
}

}  // namespace
}  // namespace nqa

#pragma once

// Finite-word and infinite-word value functions.

#include "nqa/errors.hpp"
#include "nqa/weight.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nqa {

enum class InfiniteValueFn { Inf, Sup, LimInf, LimSup, LimInfAvg, LimSupAvg };

inline constexpr std::array kAllInfiniteValueFns{InfiniteValueFn::Inf,    InfiniteValueFn::Sup,
                                                 InfiniteValueFn::LimInf, InfiniteValueFn::LimSup,
                                                 InfiniteValueFn::LimInfAvg, InfiniteValueFn::LimSupAvg};

constexpr bool is_prefix_independent(InfiniteValueFn f) {
    return f != InfiniteValueFn::Inf && f != InfiniteValueFn::Sup;
}
constexpr bool is_limit_average(InfiniteValueFn f) {
    return f == InfiniteValueFn::LimInfAvg || f == InfiniteValueFn::LimSupAvg;
}
constexpr bool is_extremal(InfiniteValueFn f) { return !is_limit_average(f); }
/// Sup and LimSup pick a large weight; Inf and LimInf are bounded by every (recurring) weight.
constexpr bool is_sup_like(InfiniteValueFn f) { return f == InfiniteValueFn::Sup || f == InfiniteValueFn::LimSup; }

inline std::string to_string(InfiniteValueFn f) {
    switch (f) {
        case InfiniteValueFn::Inf: return "Inf";
        case InfiniteValueFn::Sup: return "Sup";
        case InfiniteValueFn::LimInf: return "LimInf";
        case InfiniteValueFn::LimSup: return "LimSup";
        case InfiniteValueFn::LimInfAvg: return "LimInfAvg";
        case InfiniteValueFn::LimSupAvg: return "LimSupAvg";
    }
    return "?";
}

inline InfiniteValueFn parse_infinite_value_fn(std::string_view s) {
    for (auto f : kAllInfiniteValueFns)
        if (to_string(f) == s) return f;
    throw InvalidInput("unknown infinite-word value function '" + std::string(s) + "'");
}

class FiniteValueFn {
public:
    enum class Kind { Min, Max, SumPlus, SumMinus, SumB };

    static FiniteValueFn min() { return FiniteValueFn(Kind::Min); }
    static FiniteValueFn max() { return FiniteValueFn(Kind::Max); }
    static FiniteValueFn sum_plus() { return FiniteValueFn(Kind::SumPlus); }
    static FiniteValueFn sum_minus() { return FiniteValueFn(Kind::SumMinus); }
    static FiniteValueFn sum_bounded(Weight bound) {
        if (bound < Weight(0)) throw InvalidInput("SumB bound must be non-negative");
        FiniteValueFn g(Kind::SumB);
        g.bound_ = std::move(bound);
        return g;
    }

    Kind kind() const { return kind_; }
    const Weight& bound() const {
        if (!bound_) throw std::logic_error("bound requested for a value function other than SumB");
        return *bound_;
    }
    bool has_finite_range() const { return kind_ == Kind::Min || kind_ == Kind::Max || kind_ == Kind::SumB; }
    bool is_unbounded_sum() const { return kind_ == Kind::SumPlus || kind_ == Kind::SumMinus; }

    friend bool operator==(const FiniteValueFn&, const FiniteValueFn&) = default;

private:
    explicit FiniteValueFn(Kind k) : kind_(k) {}
    Kind kind_;
    std::optional<Weight> bound_;
};

inline std::string to_string(FiniteValueFn::Kind k) {
    switch (k) {
        case FiniteValueFn::Kind::Min: return "Min";
        case FiniteValueFn::Kind::Max: return "Max";
        case FiniteValueFn::Kind::SumPlus: return "Sum+";
        case FiniteValueFn::Kind::SumMinus: return "Sum-";
        case FiniteValueFn::Kind::SumB: return "SumB";
    }
    return "?";
}

inline std::string to_string(const FiniteValueFn& g) {
    if (g.kind() == FiniteValueFn::Kind::SumB) return "SumB(" + g.bound().str() + ")";
    return to_string(g.kind());
}

inline constexpr std::array kAllFiniteKinds{FiniteValueFn::Kind::Min, FiniteValueFn::Kind::Max,
                                            FiniteValueFn::Kind::SumB, FiniteValueFn::Kind::SumPlus,
                                            FiniteValueFn::Kind::SumMinus};

inline FiniteValueFn::Kind parse_finite_kind(std::string_view s) {
    for (auto k : kAllFiniteKinds)
        if (to_string(k) == s) return k;
    throw InvalidInput("unknown finite-word value function '" + std::string(s) + "'");
}

/// Builds a finite-word value function from its CLI token; `bound` is required for SumB only.
inline FiniteValueFn make_finite_value_fn(FiniteValueFn::Kind k, const std::optional<Weight>& bound) {
    if (bound && k != FiniteValueFn::Kind::SumB) throw InvalidInput("only SumB takes a bound");
    switch (k) {
        case FiniteValueFn::Kind::Min: return FiniteValueFn::min();
        case FiniteValueFn::Kind::Max: return FiniteValueFn::max();
        case FiniteValueFn::Kind::SumPlus: return FiniteValueFn::sum_plus();
        case FiniteValueFn::Kind::SumMinus: return FiniteValueFn::sum_minus();
        case FiniteValueFn::Kind::SumB:
            if (!bound) throw InvalidInput("SumB requires a bound");
            return FiniteValueFn::sum_bounded(*bound);
    }
    throw std::logic_error("unreachable");
}

/// Ultimately periodic weight sequence stem . loop^omega.
struct PeriodicSeq {
    std::vector<Weight> stem;
    std::vector<Weight> loop;
};

inline Weight eval_finite(const FiniteValueFn& g, std::span<const Weight> xs) {
    if (xs.empty()) throw InvalidInput("value of an empty sequence");
    switch (g.kind()) {
        case FiniteValueFn::Kind::Min: return *std::min_element(xs.begin(), xs.end());
        case FiniteValueFn::Kind::Max: return *std::max_element(xs.begin(), xs.end());
        case FiniteValueFn::Kind::SumPlus:
        case FiniteValueFn::Kind::SumMinus: {
            Weight s = 0;
            for (const auto& x : xs) s += x.abs();
            return g.kind() == FiniteValueFn::Kind::SumPlus ? s : -s;
        }
        case FiniteValueFn::Kind::SumB: {
            const Weight& b = g.bound();
            Weight s = 0;
            for (const auto& x : xs) {
                s += x;
                if (s > b) return b;
                if (s < -b) return -b;
            }
            return s;
        }
    }
    throw std::logic_error("unreachable");
}

inline ExtValue eval_lasso(InfiniteValueFn f, const PeriodicSeq& s) {
    if (s.loop.empty()) throw InvalidInput("periodic sequence with an empty loop");
    const auto& loop = s.loop;
    switch (f) {
        case InfiniteValueFn::Inf: {
            Weight m = *std::min_element(loop.begin(), loop.end());
            for (const auto& x : s.stem) m = std::min(m, x);
            return m;
        }
        case InfiniteValueFn::Sup: {
            Weight m = *std::max_element(loop.begin(), loop.end());
            for (const auto& x : s.stem) m = std::max(m, x);
            return m;
        }
        case InfiniteValueFn::LimInf: return *std::min_element(loop.begin(), loop.end());
        case InfiniteValueFn::LimSup: return *std::max_element(loop.begin(), loop.end());
        case InfiniteValueFn::LimInfAvg:
        case InfiniteValueFn::LimSupAvg: {
            Weight sum = 0;
            for (const auto& x : loop) sum += x;
            return sum / Weight(static_cast<std::int64_t>(loop.size()));
        }
    }
    throw std::logic_error("unreachable");
}

/// Finite-prefix reading of an infinite-word value function, as used when
/// monitoring: the extremal functions map to max/min, the averages to the mean.
inline Weight running_aggregate(InfiniteValueFn f, std::span<const Weight> values) {
    if (values.empty()) throw InvalidInput("running aggregate of an empty sequence");
    switch (f) {
        case InfiniteValueFn::Sup:
        case InfiniteValueFn::LimSup: return *std::max_element(values.begin(), values.end());
        case InfiniteValueFn::Inf:
        case InfiniteValueFn::LimInf: return *std::min_element(values.begin(), values.end());
        case InfiniteValueFn::LimInfAvg:
        case InfiniteValueFn::LimSupAvg: {
            Weight sum = 0;
            for (const auto& x : values) sum += x;
            return sum / Weight(static_cast<std::int64_t>(values.size()));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace nqa

#pragma once

// Maximum cycle mean (Karp) on a strongly connected weighted graph.
//
// Weights are scaled by the lcm of their denominators so the dynamic program
// runs on integers; int64 is used whenever the largest possible walk weight
// fits, arbitrary-precision integers otherwise. Memory is O(n): the table row
// D_n is computed first and the rows D_k are recomputed in a second pass.

#include "nqa/errors.hpp"
#include "nqa/weight.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nqa {

struct WeightedEdge {
    std::uint32_t from;
    std::uint32_t to;
    Weight weight;
};

namespace detail {

template <class Int>
struct KarpFraction {
    Int num;
    std::int64_t den;  // > 0
};

inline bool frac_less(const KarpFraction<std::int64_t>& a, const KarpFraction<std::int64_t>& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
inline bool frac_less(const KarpFraction<BigInt>& a, const KarpFraction<BigInt>& b) {
    return a.num * b.den < b.num * a.den;
}

template <class Int>
std::optional<KarpFraction<Int>> karp_scaled(std::size_t n, const std::vector<std::uint32_t>& from,
                                             const std::vector<std::uint32_t>& to, const std::vector<Int>& w,
                                             Cancellation* cancel) {
    std::vector<Int> prev(n), cur(n);
    std::vector<bool> prev_ok(n, false), cur_ok(n, false);
    auto step = [&]() {
        std::fill(cur_ok.begin(), cur_ok.end(), false);
        for (std::size_t e = 0; e < w.size(); ++e) {
            if (!prev_ok[from[e]]) continue;
            Int cand = prev[from[e]] + w[e];
            if (!cur_ok[to[e]] || cur[to[e]] < cand) {
                cur[to[e]] = cand;
                cur_ok[to[e]] = true;
            }
        }
        std::swap(prev, cur);
        std::swap(prev_ok, cur_ok);
        poll(cancel);
    };
    auto reset = [&]() {
        std::fill(prev_ok.begin(), prev_ok.end(), false);
        prev[0] = 0;
        prev_ok[0] = true;
    };

    reset();
    for (std::size_t k = 0; k < n; ++k) step();
    std::vector<Int> dn = prev;
    std::vector<bool> dn_ok = prev_ok;

    // best[v] = min_k (D_n(v) - D_k(v)) / (n - k)
    std::vector<std::optional<KarpFraction<Int>>> best(n);
    reset();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t v = 0; v < n; ++v) {
            if (!dn_ok[v] || !prev_ok[v]) continue;
            KarpFraction<Int> f{dn[v] - prev[v], static_cast<std::int64_t>(n - k)};
            if (!best[v] || frac_less(f, *best[v])) best[v] = f;
        }
        step();
    }
    std::optional<KarpFraction<Int>> result;
    for (std::size_t v = 0; v < n; ++v)
        if (best[v] && (!result || frac_less(*result, *best[v]))) result = best[v];
    return result;
}

}  // namespace detail

/// Maximum mean over all cycles of a strongly connected graph with `n` nodes
/// (node 0 must reach every node). Returns nullopt when the graph has no edge.
inline std::optional<Weight> max_cycle_mean(std::size_t n, const std::vector<WeightedEdge>& edges,
                                            Cancellation* cancel = nullptr) {
    if (edges.empty() || n == 0) return std::nullopt;
    BigInt lcm = 1;
    for (const auto& e : edges) lcm = boost::multiprecision::lcm(lcm, e.weight.denominator());
    std::vector<std::uint32_t> from, to;
    std::vector<BigInt> scaled;
    BigInt max_abs = 0;
    for (const auto& e : edges) {
        from.push_back(e.from);
        to.push_back(e.to);
        BigInt s = e.weight.numerator() * (lcm / e.weight.denominator());
        max_abs = std::max(max_abs, BigInt(s < 0 ? BigInt(-s) : s));
        scaled.push_back(std::move(s));
    }
    const BigInt limit = BigInt(1) << 60;
    if (max_abs * BigInt(n + 1) < limit && lcm < limit) {
        std::vector<std::int64_t> w;
        w.reserve(scaled.size());
        for (const auto& s : scaled) w.push_back(s.convert_to<std::int64_t>());
        auto r = detail::karp_scaled<std::int64_t>(n, from, to, w, cancel);
        if (!r) return std::nullopt;
        return Weight(BigInt(r->num), BigInt(r->den) * lcm);
    }
    auto r = detail::karp_scaled<BigInt>(n, from, to, scaled, cancel);
    if (!r) return std::nullopt;
    return Weight(r->num, BigInt(r->den) * lcm);
}

}  // namespace nqa

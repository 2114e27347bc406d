#pragma once

// Child automata expanded with an accumulator: nodes are (child state, started,
// accumulator) triples reachable from the initial state. A node is terminal when
// its child state is final and at least one letter was read; it then carries
// the value the child returns if its run ends there.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"
#include "nqa/value_functions.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace nqa {

using NodeId = std::uint32_t;

struct TrackerGraph {
    std::vector<StateId> child_state;
    /// Successors per node, sorted by letter.
    std::vector<std::vector<std::pair<Letter, NodeId>>> succ;
    std::vector<std::optional<Weight>> terminal_value;
    /// Distinct terminal values, ascending.
    std::vector<Weight> values;
    NodeId root = 0;

    std::size_t size() const { return child_state.size(); }

    template <class Fn>
    void for_succ(NodeId v, Letter a, Fn&& fn) const {
        const auto& s = succ[v];
        auto it = std::lower_bound(s.begin(), s.end(), std::pair<Letter, NodeId>(a, 0));
        for (; it != s.end() && it->first == a; ++it) fn(it->second);
    }

    /// Nodes that can reach a terminal node with value `target` (any terminal node when absent).
    std::vector<bool> live(const std::optional<Weight>& target) const {
        std::vector<std::vector<NodeId>> pred(size());
        for (NodeId v = 0; v < size(); ++v)
            for (const auto& [a, w] : succ[v]) pred[w].push_back(v);
        std::vector<bool> seen(size(), false);
        std::vector<NodeId> work;
        for (NodeId v = 0; v < size(); ++v)
            if (terminal_value[v] && (!target || *terminal_value[v] == *target)) {
                seen[v] = true;
                work.push_back(v);
            }
        while (!work.empty()) {
            NodeId v = work.back();
            work.pop_back();
            for (NodeId u : pred[v])
                if (!seen[u]) {
                    seen[u] = true;
                    work.push_back(u);
                }
        }
        return seen;
    }
};

/// Expands `child` with accumulators. `step(acc, w)` returns the accumulator after
/// reading weight w, or nullopt when the run can be discarded; `result(acc)` is
/// the value returned on termination (nullopt when it cannot terminate there).
template <class Acc, class Step, class Result>
TrackerGraph build_tracker(const Automaton& child, const Acc& init, Step&& step, Result&& result,
                           std::size_t max_nodes = 2000000) {
    TrackerGraph g;
    std::map<std::tuple<StateId, bool, Acc>, NodeId> ids;
    std::vector<std::tuple<StateId, bool, Acc>> keys;
    auto id = [&](StateId s, bool started, const Acc& acc) {
        auto key = std::tuple(s, started, acc);
        auto [it, fresh] = ids.emplace(key, static_cast<NodeId>(keys.size()));
        if (fresh) {
            if (keys.size() >= max_nodes) throw CapacityError("child accumulator graph too large");
            keys.push_back(key);
            g.child_state.push_back(s);
            g.succ.emplace_back();
            std::optional<Weight> v;
            if (started && child.is_final(s)) v = result(acc);
            g.terminal_value.push_back(v);
        }
        return it->second;
    };
    g.root = id(child.initial(), false, init);
    for (NodeId v = 0; v < keys.size(); ++v) {
        auto [s, started, acc] = keys[v];
        // A run ends on entering a final state, unless the state lets it continue.
        for (TransitionId t : child.out(s)) {
            const auto& tr = child.transition(t);
            auto next = step(acc, tr.weight);
            if (!next) continue;
            NodeId w = id(tr.dst, true, *next);
            g.succ[v].emplace_back(tr.letter, w);
        }
        std::sort(g.succ[v].begin(), g.succ[v].end());
        g.succ[v].erase(std::unique(g.succ[v].begin(), g.succ[v].end()), g.succ[v].end());
    }
    std::set<Weight> vals;
    for (const auto& tv : g.terminal_value)
        if (tv) vals.insert(*tv);
    g.values.assign(vals.begin(), vals.end());
    return g;
}

/// Accumulator of a finite-range value function: the running Min/Max, or the
/// SumB partial sum with a flag once a bound was crossed.
struct RangeAcc {
    bool empty = true;
    bool absorbed = false;
    Weight value;

    friend bool operator<(const RangeAcc& x, const RangeAcc& y) {
        return std::tie(x.empty, x.absorbed, x.value) < std::tie(y.empty, y.absorbed, y.value);
    }
};

/// Exact value tracking for g in {Min, Max, SumB}.
inline TrackerGraph value_graph(const Automaton& child, const FiniteValueFn& g) {
    using K = FiniteValueFn::Kind;
    if (!g.has_finite_range()) throw InvalidInput(to_string(g) + " has an infinite range; clip child sums first");
    auto step = [&](const RangeAcc& acc, const Weight& w) -> std::optional<RangeAcc> {
        RangeAcc out = acc;
        switch (g.kind()) {
            case K::Min: out.value = acc.empty ? w : std::min(acc.value, w); break;
            case K::Max: out.value = acc.empty ? w : std::max(acc.value, w); break;
            case K::SumB: {
                if (acc.absorbed) break;
                Weight s = (acc.empty ? Weight(0) : acc.value) + w;
                if (s > g.bound()) {
                    out.value = g.bound();
                    out.absorbed = true;
                } else if (s < -g.bound()) {
                    out.value = -g.bound();
                    out.absorbed = true;
                } else {
                    out.value = s;
                }
                break;
            }
            default: throw std::logic_error("unreachable");
        }
        out.empty = false;
        return out;
    };
    auto result = [](const RangeAcc& acc) -> std::optional<Weight> {
        if (acc.empty) return std::nullopt;
        return acc.value;
    };
    return build_tracker(child, RangeAcc{}, step, result);
}

/// Tracks only whether g of the run so far is at least lambda (terminal value 1) or not (0).
/// Sum progress is capped at the threshold, so the graph stays finite.
inline TrackerGraph threshold_graph(const Automaton& child, const FiniteValueFn& g, const Weight& lambda) {
    using K = FiniteValueFn::Kind;
    const Weight zero = 0;
    // Acc: Max -> seen a weight >= lambda; Min -> all weights >= lambda;
    // Sum+ -> min(sum |w|, cap); Sum- -> sum |w| while <= -lambda, else absorbed.
    const Weight cap = std::max(lambda, zero);
    auto step = [&](const RangeAcc& acc, const Weight& w) -> std::optional<RangeAcc> {
        RangeAcc out = acc;
        out.empty = false;
        switch (g.kind()) {
            case K::Max: out.value = (!acc.empty && acc.value == Weight(1)) || w >= lambda ? 1 : 0; break;
            case K::Min: out.value = (acc.empty || acc.value == Weight(1)) && w >= lambda ? 1 : 0; break;
            case K::SumPlus: out.value = std::min(cap, (acc.empty ? zero : acc.value) + w.abs()); break;
            case K::SumMinus: {
                if (acc.absorbed) break;
                Weight s = (acc.empty ? zero : acc.value) + w.abs();
                if (s > -lambda) {
                    out.absorbed = true;
                    out.value = 0;
                } else {
                    out.value = s;
                }
                break;
            }
            default: throw InvalidInput("threshold tracking is defined for Min, Max, Sum+ and Sum-");
        }
        return out;
    };
    auto result = [&](const RangeAcc& acc) -> std::optional<Weight> {
        if (acc.empty) return std::nullopt;
        switch (g.kind()) {
            case K::Max:
            case K::Min: return acc.value;
            case K::SumPlus: return acc.value >= lambda ? Weight(1) : Weight(0);
            case K::SumMinus: return !acc.absorbed && -acc.value >= lambda ? Weight(1) : Weight(0);
            default: return std::nullopt;
        }
    };
    return build_tracker(child, RangeAcc{}, step, result);
}

/// The child itself: every terminal node has value 0.
inline TrackerGraph termination_graph(const Automaton& child) {
    auto step = [](const int&, const Weight&) -> std::optional<int> { return 0; };
    auto result = [](const int&) -> std::optional<Weight> { return Weight(0); };
    return build_tracker(child, 0, step, result);
}

/// Parent states from which an accepting SCC is reachable.
inline std::vector<bool> live_parent_states(const Automaton& parent) {
    const auto& sccs = parent.sccs();
    std::vector<bool> acc(parent.num_states());
    for (StateId s = 0; s < parent.num_states(); ++s) acc[s] = sccs.accepting[sccs.scc_id[s]];
    return backward_reachable(parent, acc, kAllTransitions);
}

/// Values child j (0-based) can return on a run started by a spawn transition of
/// the parent and ending while the parent can still accept.
inline std::vector<Weight> child_return_values(const NestedAutomaton& n, std::size_t j, const FiniteValueFn& g) {
    if (j >= n.num_children()) throw InvalidInput("unknown child index " + std::to_string(j + 1));
    if (!g.has_finite_range()) throw InvalidInput(to_string(g) + " has an infinite range; clip child sums first");
    TrackerGraph vg = value_graph(n.children[j], g);
    auto live = live_parent_states(n.parent);
    std::set<std::pair<StateId, NodeId>> seen;
    std::vector<std::pair<StateId, NodeId>> work;
    auto visit = [&](StateId p, NodeId v) {
        if (live[p] && seen.emplace(p, v).second) work.emplace_back(p, v);
    };
    for (TransitionId t = 0; t < n.parent.num_transitions(); ++t) {
        if (n.label(t) != j + 1) continue;
        const auto& tr = n.parent.transition(t);
        vg.for_succ(vg.root, tr.letter, [&](NodeId v) { visit(tr.dst, v); });
    }
    std::set<Weight> out;
    while (!work.empty()) {
        auto [p, v] = work.back();
        work.pop_back();
        if (vg.terminal_value[v]) out.insert(*vg.terminal_value[v]);
        for (TransitionId t : n.parent.out(p)) {
            const auto& tr = n.parent.transition(t);
            vg.for_succ(v, tr.letter, [&](NodeId w) { visit(tr.dst, w); });
        }
    }
    return {out.begin(), out.end()};
}

}  // namespace nqa

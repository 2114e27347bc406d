#pragma once

// Turning unbounded child sums into bounded ones.

#include "nqa/automaton.hpp"
#include "nqa/child_values.hpp"
#include "nqa/errors.hpp"
#include "nqa/flatten.hpp"
#include "nqa/nested.hpp"
#include "nqa/qa_decisions.hpp"
#include "nqa/value_functions.hpp"

#include <map>
#include <tuple>
#include <vector>

namespace nqa {

struct ClipResult {
    NestedAutomaton nqa;
    FiniteValueFn g;
    /// Threshold to use with the clipped automaton.
    Weight lambda;
};

namespace detail {

inline BigInt weight_lattice(const NestedAutomaton& n) {
    BigInt l = 1;
    for (const auto& c : n.children)
        for (const auto& t : c.transitions()) l = boost::multiprecision::lcm(l, t.weight.denominator());
    return l;
}

inline NestedAutomaton map_child_weights(const NestedAutomaton& n, bool negate) {
    NestedAutomaton out{n.parent, {}, n.declared_deterministic};
    for (const auto& c : n.children)
        out.children.push_back(c.map_weights<Weight>([&](const Weight& w) { return negate ? -w.abs() : w.abs(); }));
    return out;
}

}  // namespace detail

/// Replaces Sum+ / Sum- by SumB with a bound chosen so that comparing a child value
/// with lambda gives the same answer before and after. Sum+ values at or above lambda
/// become the lattice ceiling of lambda; Sum- values below lambda stay below it, the
/// smallest of them becoming one less than the lattice ceiling of lambda.
inline ClipResult clip_child_sums(const NestedAutomaton& n, const FiniteValueFn& g, const Weight& lambda) {
    using K = FiniteValueFn::Kind;
    if (!g.is_unbounded_sum()) throw InvalidInput("clipping applies to Sum+ and Sum- only");
    const BigInt lattice = detail::weight_lattice(n);
    const Weight ceil = lambda.ceil_to_lattice(lattice);
    if (g.kind() == K::SumPlus) {
        Weight b = std::max(Weight(0), ceil);
        return {detail::map_child_weights(n, false), FiniteValueFn::sum_bounded(b), lambda};
    }
    Weight b = lambda.sign() > 0 ? Weight(1) : Weight(1) - ceil;
    return {detail::map_child_weights(n, true), FiniteValueFn::sum_bounded(b), lambda};
}

struct UnboundednessReport {
    bool unbounded = false;
    Weight lambda_star;
    std::size_t configurations = 0;
};

/// Whether Sum+ child values can push the LimSupAvg value of an accepting run past
/// every bound. Works on the flattening that only tracks termination: an element is a
/// flat state, one of its obligations and a child state the obligation's run may be
/// in. Values are unbounded when, inside an accepting component of the flattening,
/// (a) a cycle of elements through positive child weights passes an element where a
/// freshly spawned child can start, so every such child can follow the cycle, or (b) a
/// spawn-free cycle of elements has positive weight. Otherwise no relevant return
/// exceeds (#elements + 1) x (max |child weight|): one step per element plus the step
/// that ends the run.
inline UnboundednessReport childsum_unbounded(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                              const FlattenOptions& opt = {}) {
    if (f != InfiniteValueFn::LimSupAvg || g.kind() != FiniteValueFn::Kind::SumPlus)
        throw InvalidInput("unboundedness check is defined for (LimSupAvg, Sum+)");
    FlatGraph t = flatten_termination_graph(n, opt);

    struct Adapter {
        const FlatGraph& t;
        std::vector<std::vector<TransitionId>> outs;
        std::size_t num_states() const { return t.states.size(); }
        std::span<const TransitionId> out(StateId s) const { return outs[s]; }
        const FlatTransition& transition(TransitionId i) const { return t.transitions[i]; }
        bool is_final(StateId s) const { return t.finals[s]; }
    } adapter{t, std::vector<std::vector<TransitionId>>(t.states.size())};
    for (TransitionId i = 0; i < t.transitions.size(); ++i) adapter.outs[t.transitions[i].src].push_back(i);
    auto tsccs = compute_sccs(adapter, kAllTransitions);

    std::map<std::tuple<StateId, std::uint32_t, NodeId>, StateId> ids;
    auto element = [&](StateId s, std::uint32_t i, NodeId v) {
        return ids.emplace(std::tuple(s, i, v), static_cast<StateId>(ids.size())).first->second;
    };
    for (StateId s = 0; s < t.states.size(); ++s)
        for (std::uint32_t i = 0; i < t.states[s].obligations.size(); ++i)
            for (NodeId v : t.frontiers[t.states[s].obligations[i].frontier]) element(s, i, v);

    Weight max_abs = 0;
    for (const auto& c : n.children)
        for (const auto& tr : c.transitions()) max_abs = std::max(max_abs, tr.weight.abs());

    detail::EdgeGraph eg(ids.size());
    std::vector<bool> positive, hit, silent;
    for (const auto& tr : t.transitions) {
        poll(opt.cancel);
        std::uint32_t c = tsccs.scc_id[tr.src];
        if (c != tsccs.scc_id[tr.dst] || !tsccs.accepting[c]) continue;
        const auto& src = t.states[tr.src];
        const auto& dst = t.states[tr.dst];
        for (std::uint32_t i = 0; i < src.obligations.size(); ++i) {
            std::int32_t j = tr.carried[i];
            if (j < 0) continue;
            const auto& kind = t.kinds[src.obligations[i].kind];
            const auto& graph = *kind.graph;
            const auto& child = n.children[kind.child];
            const auto& target = t.frontiers[dst.obligations[j].frontier];
            for (NodeId v : t.frontiers[src.obligations[i].frontier]) {
                graph.for_succ(v, tr.letter, [&](NodeId w) {
                    if (!std::binary_search(target.begin(), target.end(), w)) return;
                    for (TransitionId ct : child.out(graph.child_state[v])) {
                        const auto& ctr = child.transition(ct);
                        if (ctr.letter != tr.letter || ctr.dst != graph.child_state[w]) continue;
                        eg.add(element(tr.src, i, v), element(tr.dst, static_cast<std::uint32_t>(j), w));
                        positive.push_back(ctr.weight.sign() != 0);
                        bool fresh = false;
                        if (tr.spawned == j) graph.for_succ(graph.root, tr.letter, [&](NodeId r) { fresh = fresh || r == w; });
                        hit.push_back(fresh);
                        silent.push_back(tr.weight.silent);
                    }
                });
            }
        }
    }

    UnboundednessReport out;
    out.configurations = ids.size();
    auto has_cycle_with = [&](const std::vector<bool>& keep, const std::vector<bool>& also) {
        auto sccs = compute_sccs(eg, [&](TransitionId e) { return keep[e]; });
        std::vector<bool> pos(sccs.size(), false), extra(sccs.size(), false);
        for (TransitionId e = 0; e < eg.edges.size(); ++e) {
            if (!keep[e]) continue;
            auto c = sccs.scc_id[eg.edges[e].src];
            if (c != sccs.scc_id[eg.edges[e].dst]) continue;
            if (positive[e]) pos[c] = true;
            if (also[e]) extra[c] = true;
        }
        for (std::size_t c = 0; c < sccs.size(); ++c)
            if (pos[c] && extra[c]) return true;
        return false;
    };
    std::vector<bool> all(eg.edges.size(), true);
    out.unbounded = has_cycle_with(all, hit) || has_cycle_with(silent, all);
    out.lambda_star = std::max(Weight(1), Weight(static_cast<std::int64_t>(ids.size() + 1)) * max_abs);
    return out;
}

}  // namespace nqa

#pragma once

// Obligation-based flattening of nested automata into automata with silent weights.
//
// A flat state is a parent state plus a canonical set of obligations. An
// obligation stands for a spawned child run that has not returned yet: the
// child, what the run still has to achieve (its kind), and the frontier of
// accumulator-graph nodes the run may currently be in. Frontiers are pruned to
// nodes from which the obligation can still be met, and an obligation is
// discharged as soon as its frontier holds a node meeting it; discharging early
// never hurts because the remaining obligations only constrain the run.
//
// Büchi acceptance uses a breakpoint: a flat state is final when the parent
// state is final and no obligation is marked; leaving a final state marks every
// pending obligation. Hence each obligation pending at some final visit must be
// discharged before the next one, which forces every child run to return.

#include "nqa/automaton.hpp"
#include "nqa/child_values.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"
#include "nqa/silent_qa.hpp"
#include "nqa/value_functions.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

namespace nqa {

struct FlattenOptions {
    Cancellation* cancel = nullptr;
    std::size_t max_states = 4000000;
};

struct ObligationKind {
    std::uint32_t child = 0;
    std::shared_ptr<const TrackerGraph> graph;
    std::optional<Weight> target;  // required terminal value; any terminal value when absent
    std::vector<bool> live;
};

struct SpawnOption {
    std::uint32_t kind;
    FlatWeight emit;
    bool exclusive = false;  // allowed only while no exclusive obligation is pending
};

struct Obligation {
    std::uint32_t kind;
    std::uint32_t frontier;
    bool marked;

    friend bool operator==(const Obligation&, const Obligation&) = default;
};

struct FlatTransition {
    StateId src;
    Letter letter;
    StateId dst;
    FlatWeight weight;
    TransitionId parent_transition;
    /// Index in the target state of each source obligation (-1 when discharged).
    std::vector<std::int32_t> carried;
    /// Index in the target state of the spawned obligation (-1 when none or discharged at once).
    std::int32_t spawned = -1;
};

struct FlatState {
    StateId parent;
    std::vector<Obligation> obligations;
};

/// Explicit flat state space; `qa()` is the automaton view.
struct FlatGraph {
    Alphabet alphabet;
    std::vector<FlatState> states;
    std::vector<bool> finals;
    std::vector<FlatTransition> transitions;
    std::vector<ObligationKind> kinds;
    std::vector<std::vector<NodeId>> frontiers;

    SilentQA qa() const {
        AutomatonBuilder<FlatWeight> b{alphabet};
        for (StateId s = 0; s < states.size(); ++s) b.add_state({}, finals[s]);
        b.set_initial(0);
        for (const auto& t : transitions) b.add_transition(t.src, t.letter, t.dst, t.weight);
        return b.build(true);
    }
};

namespace detail {

struct VecHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const {
        std::size_t h = v.size();
        for (auto x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

class ObligationEngine {
public:
    ObligationEngine(const NestedAutomaton& n, std::vector<ObligationKind> kinds,
                     std::vector<std::vector<SpawnOption>> options, const FlattenOptions& opt)
        : n_(n), options_(std::move(options)), opt_(opt) {
        out_.alphabet = n.alphabet();
        out_.kinds = std::move(kinds);
        exclusive_kind_.assign(out_.kinds.size(), false);
        for (const auto& os : options_)
            for (const auto& o : os)
                if (o.exclusive) exclusive_kind_[o.kind] = true;
    }

    FlatGraph run() {
        intern_state({n_.parent.initial(), {}});
        for (StateId s = 0; s < out_.states.size(); ++s) {
            poll(opt_.cancel);
            expand(s);
        }
        return std::move(out_);
    }

private:
    std::uint32_t intern_frontier(std::uint32_t kind, std::vector<NodeId> nodes) {
        std::vector<std::uint32_t> key{static_cast<std::uint32_t>(graph_index(kind))};
        key.insert(key.end(), nodes.begin(), nodes.end());
        auto [it, fresh] = frontier_ids_.emplace(std::move(key), static_cast<std::uint32_t>(out_.frontiers.size()));
        if (fresh) out_.frontiers.push_back(std::move(nodes));
        return it->second;
    }

    std::size_t graph_index(std::uint32_t kind) {
        const TrackerGraph* g = out_.kinds[kind].graph.get();
        auto [it, fresh] = graph_ids_.emplace(g, graph_ids_.size());
        return it->second;
    }

    std::optional<std::uint32_t> filtered(std::uint32_t kind, std::vector<NodeId> nodes) {
        const auto& live = out_.kinds[kind].live;
        std::erase_if(nodes, [&](NodeId v) { return !live[v]; });
        if (nodes.empty()) return std::nullopt;
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        return intern_frontier(kind, std::move(nodes));
    }

    std::optional<std::uint32_t> advance(std::uint32_t kind, std::uint32_t frontier, Letter a) {
        auto key = std::tuple(kind, frontier, a);
        if (auto it = advance_cache_.find(key); it != advance_cache_.end()) return it->second;
        const auto& g = *out_.kinds[kind].graph;
        std::vector<NodeId> next;
        for (NodeId v : out_.frontiers[frontier]) g.for_succ(v, a, [&](NodeId w) { next.push_back(w); });
        auto r = filtered(kind, std::move(next));
        advance_cache_.emplace(key, r);
        return r;
    }

    std::optional<std::uint32_t> spawn(std::uint32_t kind, Letter a) {
        auto key = std::tuple(kind, UINT32_MAX, a);
        if (auto it = advance_cache_.find(key); it != advance_cache_.end()) return it->second;
        const auto& g = *out_.kinds[kind].graph;
        std::vector<NodeId> next;
        g.for_succ(g.root, a, [&](NodeId w) { next.push_back(w); });
        auto r = filtered(kind, std::move(next));
        advance_cache_.emplace(key, r);
        return r;
    }

    bool dischargeable(std::uint32_t kind, std::uint32_t frontier) {
        auto key = (static_cast<std::uint64_t>(kind) << 32) | frontier;
        if (auto it = discharge_cache_.find(key); it != discharge_cache_.end()) return it->second;
        const auto& k = out_.kinds[kind];
        bool r = false;
        for (NodeId v : out_.frontiers[frontier]) {
            const auto& tv = k.graph->terminal_value[v];
            if (tv && (!k.target || *tv == *k.target)) {
                r = true;
                break;
            }
        }
        discharge_cache_.emplace(key, r);
        return r;
    }

    bool accepting(const FlatState& s) const {
        if (!n_.parent.is_final(s.parent)) return false;
        return std::none_of(s.obligations.begin(), s.obligations.end(), [](const Obligation& o) { return o.marked; });
    }

    StateId intern_state(FlatState s) {
        std::vector<std::uint32_t> key{s.parent};
        for (const auto& o : s.obligations) {
            key.push_back(o.kind);
            key.push_back(o.frontier);
            key.push_back(o.marked);
        }
        auto [it, fresh] = state_ids_.emplace(std::move(key), static_cast<StateId>(out_.states.size()));
        if (fresh) {
            if (out_.states.size() >= opt_.max_states) throw CapacityError("flattened state space too large");
            out_.finals.push_back(accepting(s));
            out_.states.push_back(std::move(s));
        }
        return it->second;
    }

    void expand(StateId sid) {
        const FlatState src = out_.states[sid];
        const bool src_accepting = out_.finals[sid];
        const std::size_t m = src.obligations.size();
        for (Letter a = 0; a < n_.alphabet().size(); ++a) {
            std::vector<Obligation> moved;
            moved.reserve(m + 1);
            bool dead = false;
            for (const auto& o : src.obligations) {
                auto f = advance(o.kind, o.frontier, a);
                if (!f) {
                    dead = true;
                    break;
                }
                moved.push_back({o.kind, *f, o.marked || src_accepting});
            }
            if (dead) continue;
            bool exclusive_pending = std::any_of(moved.begin(), moved.end(),
                                                 [&](const Obligation& o) { return exclusive_kind_[o.kind]; });
            for (TransitionId t : n_.parent.out(src.parent)) {
                const auto& tr = n_.parent.transition(t);
                if (tr.letter != a) continue;
                auto label = n_.label(t);
                if (label == 0) {
                    emit(sid, a, tr.dst, t, FlatWeight::silent_step(), moved, std::nullopt);
                    continue;
                }
                for (const auto& opt : options_[label - 1]) {
                    if (opt.exclusive && exclusive_pending) continue;
                    auto f = spawn(opt.kind, a);
                    if (!f) continue;
                    emit(sid, a, tr.dst, t, opt.emit, moved, Obligation{opt.kind, *f, false});
                }
            }
        }
    }

    void emit(StateId sid, Letter a, StateId parent_dst, TransitionId t, const FlatWeight& w,
              const std::vector<Obligation>& moved, std::optional<Obligation> spawned) {
        // Positions: 0..m-1 carried obligations, m the spawned one.
        struct Item {
            Obligation o;
            std::int32_t origin;
        };
        std::vector<Item> items;
        for (std::size_t i = 0; i < moved.size(); ++i)
            if (!dischargeable(moved[i].kind, moved[i].frontier))
                items.push_back({moved[i], static_cast<std::int32_t>(i)});
        if (spawned && !dischargeable(spawned->kind, spawned->frontier))
            items.push_back({*spawned, static_cast<std::int32_t>(moved.size())});
        std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
            return std::tie(x.o.kind, x.o.frontier) < std::tie(y.o.kind, y.o.frontier);
        });
        FlatState dst{parent_dst, {}};
        std::vector<std::int32_t> index_of(moved.size() + 1, -1);
        for (const auto& it : items) {
            if (!dst.obligations.empty() && dst.obligations.back().kind == it.o.kind &&
                dst.obligations.back().frontier == it.o.frontier) {
                dst.obligations.back().marked = dst.obligations.back().marked || it.o.marked;
            } else {
                dst.obligations.push_back(it.o);
            }
            index_of[it.origin] = static_cast<std::int32_t>(dst.obligations.size() - 1);
        }
        StateId did = intern_state(std::move(dst));
        FlatTransition ft{sid, a, did, w, t, {}, -1};
        ft.carried.assign(index_of.begin(), index_of.begin() + static_cast<std::ptrdiff_t>(moved.size()));
        if (spawned) ft.spawned = index_of[moved.size()];
        out_.transitions.push_back(std::move(ft));
    }

    struct TupleHash {
        std::size_t operator()(const std::tuple<std::uint32_t, std::uint32_t, Letter>& k) const {
            auto [a, b, c] = k;
            std::size_t h = a * 0x9e3779b97f4a7c15ULL;
            h ^= b + 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
            h ^= c + 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
            return h;
        }
    };

    const NestedAutomaton& n_;
    std::vector<std::vector<SpawnOption>> options_;
    FlattenOptions opt_;
    FlatGraph out_;
    std::vector<bool> exclusive_kind_;
    std::unordered_map<std::vector<std::uint32_t>, StateId, VecHash> state_ids_;
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> frontier_ids_;
    std::unordered_map<const TrackerGraph*, std::size_t> graph_ids_;
    std::unordered_map<std::tuple<std::uint32_t, std::uint32_t, Letter>, std::optional<std::uint32_t>, TupleHash>
        advance_cache_;
    std::unordered_map<std::uint64_t, bool> discharge_cache_;
};

}  // namespace detail

/// Flattening for children with finitely many return values: each spawn guesses
/// the value its child returns and emits it.
inline FlatGraph flatten_regular_graph(const NestedAutomaton& n, const FiniteValueFn& g,
                                       const FlattenOptions& opt = {}) {
    if (!g.has_finite_range()) throw InvalidInput(to_string(g) + " has an infinite range; clip child sums first");
    std::vector<ObligationKind> kinds;
    std::vector<std::vector<SpawnOption>> options(n.num_children());
    for (std::uint32_t j = 0; j < n.num_children(); ++j) {
        auto graph = std::make_shared<const TrackerGraph>(value_graph(n.children[j], g));
        for (const auto& v : child_return_values(n, j, g)) {
            options[j].push_back({static_cast<std::uint32_t>(kinds.size()), FlatWeight::of(v), false});
            kinds.push_back({j, graph, v, graph->live(v)});
        }
    }
    return detail::ObligationEngine(n, std::move(kinds), std::move(options), opt).run();
}

inline SilentQA flatten_regular(const NestedAutomaton& n, InfiniteValueFn /*f*/, const FiniteValueFn& g,
                                const FlattenOptions& opt = {}) {
    return flatten_regular_graph(n, g, opt).qa();
}

/// Flattening against a threshold: a spawn emits 1 when its child is required to
/// return at least lambda and 0 when it only has to return. Sup and LimSup track
/// one such witness at a time, Inf requires it of every spawn, LimInf lets each
/// spawn choose.
inline FlatGraph flatten_extremal_threshold_graph(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                                  const Weight& lambda, const FlattenOptions& opt = {}) {
    if (!is_extremal(f)) throw InvalidInput("threshold flattening needs an extremal parent value function");
    if (g.kind() == FiniteValueFn::Kind::SumB) throw InvalidInput("threshold flattening is for Min, Max, Sum+ and Sum-");
    std::vector<ObligationKind> kinds;
    std::vector<std::vector<SpawnOption>> options(n.num_children());
    for (std::uint32_t j = 0; j < n.num_children(); ++j) {
        auto good = std::make_shared<const TrackerGraph>(threshold_graph(n.children[j], g, lambda));
        auto term = std::make_shared<const TrackerGraph>(termination_graph(n.children[j]));
        auto good_kind = static_cast<std::uint32_t>(kinds.size());
        kinds.push_back({j, good, Weight(1), good->live(Weight(1))});
        auto term_kind = static_cast<std::uint32_t>(kinds.size());
        kinds.push_back({j, term, std::nullopt, term->live(std::nullopt)});
        switch (f) {
            case InfiniteValueFn::Sup:
            case InfiniteValueFn::LimSup:
                options[j].push_back({good_kind, FlatWeight::of(1), true});
                options[j].push_back({term_kind, FlatWeight::of(0), false});
                break;
            case InfiniteValueFn::Inf: options[j].push_back({good_kind, FlatWeight::of(1), false}); break;
            case InfiniteValueFn::LimInf:
                options[j].push_back({good_kind, FlatWeight::of(1), false});
                options[j].push_back({term_kind, FlatWeight::of(0), false});
                break;
            default: break;
        }
    }
    return detail::ObligationEngine(n, std::move(kinds), std::move(options), opt).run();
}

inline SilentQA flatten_extremal_threshold(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                           const Weight& lambda, const FlattenOptions& opt = {}) {
    return flatten_extremal_threshold_graph(n, f, g, lambda, opt).qa();
}

/// Flattening that only requires every spawned child to return; spawns emit 0.
inline FlatGraph flatten_termination_graph(const NestedAutomaton& n, const FlattenOptions& opt = {}) {
    std::vector<ObligationKind> kinds;
    std::vector<std::vector<SpawnOption>> options(n.num_children());
    for (std::uint32_t j = 0; j < n.num_children(); ++j) {
        auto term = std::make_shared<const TrackerGraph>(termination_graph(n.children[j]));
        options[j].push_back({static_cast<std::uint32_t>(kinds.size()), FlatWeight::of(0), false});
        kinds.push_back({j, term, std::nullopt, term->live(std::nullopt)});
    }
    return detail::ObligationEngine(n, std::move(kinds), std::move(options), opt).run();
}

}  // namespace nqa

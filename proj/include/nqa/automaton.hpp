#pragma once

// Value-function-free automaton structure shared by every construction.
//
// States are dense integer ids; the initial state is always id 0 after
// construction and every state is reachable from it. Outgoing and incoming
// transition lists and the SCC decomposition are computed once at build time.

#include "nqa/errors.hpp"
#include "nqa/weight.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace nqa {

using StateId = std::uint32_t;
using Letter = std::uint32_t;
using TransitionId = std::uint32_t;

class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(const std::vector<std::string>& names) {
        for (const auto& n : names) add(n);
    }

    Letter add(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        auto id = static_cast<Letter>(names_.size());
        names_.push_back(name);
        index_.emplace(name, id);
        return id;
    }

    std::optional<Letter> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    Letter at(const std::string& name) const {
        auto l = find(name);
        if (!l) throw InvalidInput("unknown letter '" + name + "'");
        return *l;
    }

    const std::string& name(Letter l) const { return names_.at(l); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Letter> index_;
};

template <class W>
struct BasicTransition {
    StateId src;
    Letter letter;
    StateId dst;
    W weight;

    friend bool operator==(const BasicTransition&, const BasicTransition&) = default;
};

/// Strongly connected components. Component ids are in reverse topological
/// order: every edge goes from a component to one with an id that is not larger.
struct SccDecomposition {
    std::vector<std::uint32_t> scc_id;
    std::vector<std::vector<StateId>> members;
    std::vector<bool> nontrivial;  // has an internal edge (size > 1 or a self-loop)
    std::vector<bool> accepting;   // nontrivial and contains a final state

    std::size_t size() const { return members.size(); }
    /// Component ids in reverse topological order (sinks first).
    std::vector<std::uint32_t> reverse_topological_order() const {
        std::vector<std::uint32_t> order(members.size());
        for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
        return order;
    }
};

/// Iterative Tarjan over the edges accepted by `keep`.
template <class Graph, class Keep>
SccDecomposition compute_sccs(const Graph& g, Keep&& keep) {
    const std::size_t n = g.num_states();
    constexpr std::uint32_t kUnvisited = UINT32_MAX;
    SccDecomposition out;
    out.scc_id.assign(n, kUnvisited);
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::size_t>> call;
    std::uint32_t counter = 0;

    for (StateId root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            auto outs = g.out(v);
            bool descended = false;
            while (pos < outs.size()) {
                TransitionId t = outs[pos++];
                if (!keep(t)) continue;
                StateId w = g.transition(t).dst;
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            StateId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                auto id = static_cast<std::uint32_t>(out.members.size());
                out.members.emplace_back();
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    out.scc_id[w] = id;
                    out.members.back().push_back(w);
                } while (w != done);
                std::sort(out.members.back().begin(), out.members.back().end());
            }
        }
    }

    out.nontrivial.assign(out.members.size(), false);
    out.accepting.assign(out.members.size(), false);
    for (StateId v = 0; v < n; ++v) {
        for (TransitionId t : g.out(v)) {
            if (!keep(t)) continue;
            StateId w = g.transition(t).dst;
            if (out.scc_id[v] == out.scc_id[w]) out.nontrivial[out.scc_id[v]] = true;
        }
    }
    for (std::size_t c = 0; c < out.members.size(); ++c) {
        if (!out.nontrivial[c]) continue;
        for (StateId s : out.members[c])
            if (g.is_final(s)) {
                out.accepting[c] = true;
                break;
            }
    }
    return out;
}

template <class W>
class AutomatonBuilder;

template <class W>
class BasicAutomaton {
public:
    using Transition = BasicTransition<W>;
    using WeightType = W;

    BasicAutomaton() = default;

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t num_states() const { return names_.size(); }
    std::size_t num_transitions() const { return transitions_.size(); }
    StateId initial() const { return 0; }
    bool is_final(StateId s) const { return finals_[s]; }
    const std::vector<bool>& finals() const { return finals_; }
    std::size_t num_finals() const { return static_cast<std::size_t>(std::count(finals_.begin(), finals_.end(), true)); }
    const std::string& state_name(StateId s) const { return names_.at(s); }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const Transition& transition(TransitionId t) const { return transitions_[t]; }

    /// Outgoing transition ids of `s`, sorted by (letter, target, insertion order).
    std::span<const TransitionId> out(StateId s) const { return out_[s]; }
    std::span<const TransitionId> in(StateId s) const { return in_[s]; }

    const SccDecomposition& sccs() const { return sccs_; }

    void check_state(StateId s) const {
        if (s >= num_states()) throw InvalidInput("unknown state id " + std::to_string(s));
    }

    /// Copy of this automaton with every weight mapped through `fn`.
    template <class V, class Fn>
    BasicAutomaton<V> map_weights(Fn&& fn) const {
        BasicAutomaton<V> out;
        out.alphabet_ = alphabet_;
        out.names_ = names_;
        out.finals_ = finals_;
        out.out_ = out_;
        out.in_ = in_;
        out.sccs_ = sccs_;
        out.transitions_.reserve(transitions_.size());
        for (const auto& t : transitions_) out.transitions_.push_back({t.src, t.letter, t.dst, fn(t.weight)});
        return out;
    }

private:
    template <class>
    friend class AutomatonBuilder;
    template <class>
    friend class BasicAutomaton;

    Alphabet alphabet_;
    std::vector<std::string> names_;
    std::vector<Transition> transitions_;
    std::vector<bool> finals_;
    std::vector<std::vector<TransitionId>> out_;
    std::vector<std::vector<TransitionId>> in_;
    SccDecomposition sccs_;
};

using Automaton = BasicAutomaton<Weight>;

/// Incremental construction; build() prunes unreachable states, removes
/// duplicate transitions, renumbers states in BFS order from the initial
/// state and computes adjacency and SCCs.
template <class W>
class AutomatonBuilder {
public:
    AutomatonBuilder() = default;
    explicit AutomatonBuilder(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

    Alphabet& alphabet() { return alphabet_; }
    const Alphabet& alphabet() const { return alphabet_; }

    StateId add_state(std::string name = {}, bool final = false) {
        auto id = static_cast<StateId>(names_.size());
        if (name.empty()) name = "q" + std::to_string(id);
        if (!by_name_.emplace(name, id).second) throw InvalidInput("duplicate state name '" + name + "'");
        names_.push_back(std::move(name));
        finals_.push_back(final);
        return id;
    }

    /// Id of the state called `name`, created on first use.
    StateId state(const std::string& name) {
        auto it = by_name_.find(name);
        if (it != by_name_.end()) return it->second;
        return add_state(name);
    }

    std::optional<StateId> find_state(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t num_states() const { return names_.size(); }
    std::size_t num_transitions() const { return transitions_.size(); }

    void set_initial(StateId s) { initial_ = s; }
    void set_final(StateId s, bool final = true) { finals_.at(s) = final; }

    void add_transition(StateId src, Letter letter, StateId dst, W weight) {
        if (letter >= alphabet_.size()) throw InvalidInput("unknown letter id " + std::to_string(letter));
        if (src >= names_.size() || dst >= names_.size()) throw InvalidInput("transition endpoint is not a state");
        transitions_.push_back({src, letter, dst, std::move(weight)});
    }
    void add_transition(StateId src, const std::string& letter, StateId dst, W weight) {
        add_transition(src, alphabet_.at(letter), dst, std::move(weight));
    }

    /// `allow_empty` admits automata without transitions (internal constructions
    /// whose state space can be empty). `renumbering`, when given, receives the new
    /// id of every builder state (UINT32_MAX for pruned ones). States reachable from
    /// `extra_roots` are kept as well, numbered after those reachable from the initial state.
    BasicAutomaton<W> build(bool allow_empty = false, std::vector<StateId>* renumbering = nullptr,
                            const std::vector<StateId>& extra_roots = {}) const {
        if (alphabet_.empty()) throw InvalidInput("empty alphabet");
        if (transitions_.empty() && !allow_empty) throw InvalidInput("empty transition set");
        if (!initial_ || *initial_ >= names_.size()) throw InvalidInput("no initial state");

        const std::size_t n = names_.size();
        std::vector<std::vector<std::size_t>> outs(n);
        for (std::size_t i = 0; i < transitions_.size(); ++i) outs[transitions_[i].src].push_back(i);

        constexpr StateId kNone = UINT32_MAX;
        std::vector<StateId> renum(n, kNone);
        std::vector<StateId> order;
        renum[*initial_] = 0;
        order.push_back(*initial_);
        auto visit = [&](StateId d) {
            if (renum[d] == kNone) {
                renum[d] = static_cast<StateId>(order.size());
                order.push_back(d);
            }
        };
        std::size_t head = 0;
        for (std::size_t r = 0;; ++r) {
            for (; head < order.size(); ++head)
                for (std::size_t i : outs[order[head]]) visit(transitions_[i].dst);
            if (r == extra_roots.size()) break;
            visit(extra_roots[r]);
        }

        BasicAutomaton<W> a;
        a.alphabet_ = alphabet_;
        a.names_.reserve(order.size());
        a.finals_.reserve(order.size());
        for (StateId old : order) {
            a.names_.push_back(names_[old]);
            a.finals_.push_back(finals_[old]);
        }

        struct Key {
            StateId src;
            Letter letter;
            StateId dst;
            const W* weight;
            bool operator==(const Key& o) const {
                return src == o.src && letter == o.letter && dst == o.dst && *weight == *o.weight;
            }
        };
        struct KeyHash {
            std::size_t operator()(const Key& k) const {
                std::size_t h = std::hash<W>{}(*k.weight);
                h ^= (static_cast<std::size_t>(k.src) * 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
                h ^= (static_cast<std::size_t>(k.letter) * 0xc2b2ae3d27d4eb4fULL) + (h << 6) + (h >> 2);
                h ^= (static_cast<std::size_t>(k.dst) * 0x165667b19e3779f9ULL) + (h << 6) + (h >> 2);
                return h;
            }
        };
        std::unordered_set<Key, KeyHash> seen;
        std::vector<std::size_t> kept;
        kept.reserve(transitions_.size());
        for (std::size_t i = 0; i < transitions_.size(); ++i) {
            const auto& t = transitions_[i];
            if (renum[t.src] == kNone) continue;
            if (seen.insert(Key{renum[t.src], t.letter, renum[t.dst], &t.weight}).second) kept.push_back(i);
        }
        std::stable_sort(kept.begin(), kept.end(), [&](std::size_t x, std::size_t y) {
            const auto& tx = transitions_[x];
            const auto& ty = transitions_[y];
            return std::tuple(renum[tx.src], tx.letter, renum[tx.dst]) < std::tuple(renum[ty.src], ty.letter, renum[ty.dst]);
        });
        a.transitions_.reserve(kept.size());
        for (std::size_t i : kept) {
            const auto& t = transitions_[i];
            a.transitions_.push_back({renum[t.src], t.letter, renum[t.dst], t.weight});
        }
        a.out_.assign(order.size(), {});
        a.in_.assign(order.size(), {});
        for (TransitionId t = 0; t < a.transitions_.size(); ++t) {
            a.out_[a.transitions_[t].src].push_back(t);
            a.in_[a.transitions_[t].dst].push_back(t);
        }
        a.sccs_ = compute_sccs(a, [](TransitionId) { return true; });
        if (renumbering) *renumbering = std::move(renum);
        return a;
    }

private:
    Alphabet alphabet_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, StateId> by_name_;
    std::vector<bool> finals_;
    std::optional<StateId> initial_;
    std::vector<BasicTransition<W>> transitions_;
};

/// Raw, name-based description of an automaton.
struct RawTransition {
    std::string src;
    std::string letter;
    std::string dst;
    Weight weight;
};

/// Builds an automaton from names. `finals` absent means every state is final.
inline Automaton build_automaton(const std::vector<std::string>& alphabet, const std::vector<RawTransition>& transitions,
                                 const std::string& initial, const std::optional<std::vector<std::string>>& finals) {
    if (alphabet.empty()) throw InvalidInput("empty alphabet");
    if (transitions.empty()) throw InvalidInput("empty transition set");
    AutomatonBuilder<Weight> b{Alphabet(alphabet)};
    b.set_initial(b.state(initial));
    for (const auto& t : transitions) {
        auto letter = b.alphabet().find(t.letter);
        if (!letter) throw InvalidInput("unknown letter '" + t.letter + "' in transition");
        StateId s = b.state(t.src);
        StateId d = b.state(t.dst);
        b.add_transition(s, *letter, d, t.weight);
    }
    if (finals) {
        for (const auto& f : *finals) {
            auto s = b.find_state(f);
            if (!s) throw InvalidInput("unknown state '" + f + "' in final set");
            b.set_final(*s);
        }
    } else {
        for (StateId s = 0; s < b.num_states(); ++s) b.set_final(s);
    }
    return b.build();
}

template <class W>
bool is_complete(const BasicAutomaton<W>& a) {
    std::vector<bool> seen(a.alphabet().size());
    for (StateId s = 0; s < a.num_states(); ++s) {
        std::fill(seen.begin(), seen.end(), false);
        std::size_t count = 0;
        for (TransitionId t : a.out(s)) {
            Letter l = a.transition(t).letter;
            if (!seen[l]) {
                seen[l] = true;
                ++count;
            }
        }
        if (count != a.alphabet().size()) return false;
    }
    return true;
}

template <class W>
bool is_deterministic(const BasicAutomaton<W>& a) {
    for (StateId s = 0; s < a.num_states(); ++s) {
        auto outs = a.out(s);
        // Outgoing lists are sorted by letter.
        for (std::size_t i = 1; i < outs.size(); ++i)
            if (a.transition(outs[i]).letter == a.transition(outs[i - 1]).letter) return false;
    }
    return true;
}

/// The unique successor transition of `s` on `letter` in a deterministic automaton.
template <class W>
std::optional<TransitionId> successor(const BasicAutomaton<W>& a, StateId s, Letter letter) {
    for (TransitionId t : a.out(s))
        if (a.transition(t).letter == letter) return t;
    return std::nullopt;
}

template <class W>
const SccDecomposition& scc_decompose(const BasicAutomaton<W>& a) {
    return a.sccs();
}

/// States reachable from `sources` using only transitions accepted by `keep`.
template <class W, class Keep>
std::vector<bool> forward_reachable(const BasicAutomaton<W>& a, const std::vector<StateId>& sources, Keep&& keep) {
    std::vector<bool> seen(a.num_states(), false);
    std::vector<StateId> work;
    for (StateId s : sources) {
        a.check_state(s);
        if (!seen[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    }
    while (!work.empty()) {
        StateId s = work.back();
        work.pop_back();
        for (TransitionId t : a.out(s)) {
            if (!keep(t)) continue;
            StateId d = a.transition(t).dst;
            if (!seen[d]) {
                seen[d] = true;
                work.push_back(d);
            }
        }
    }
    return seen;
}

/// States from which some target is reachable (targets included) using transitions accepted by `keep`.
template <class W, class Keep>
std::vector<bool> backward_reachable(const BasicAutomaton<W>& a, const std::vector<bool>& targets, Keep&& keep) {
    std::vector<bool> seen(a.num_states(), false);
    std::vector<StateId> work;
    for (StateId s = 0; s < a.num_states(); ++s)
        if (targets[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    while (!work.empty()) {
        StateId s = work.back();
        work.pop_back();
        for (TransitionId t : a.in(s)) {
            if (!keep(t)) continue;
            StateId p = a.transition(t).src;
            if (!seen[p]) {
                seen[p] = true;
                work.push_back(p);
            }
        }
    }
    return seen;
}

inline constexpr auto kAllTransitions = [](TransitionId) { return true; };

template <class W>
bool reachable_between(const BasicAutomaton<W>& a, const std::vector<StateId>& from, const std::vector<StateId>& to) {
    for (StateId s : to) a.check_state(s);
    auto seen = forward_reachable(a, from, kAllTransitions);
    return std::any_of(to.begin(), to.end(), [&](StateId s) { return seen[s]; });
}

template <class W>
std::vector<bool> reverse_reachability_table(const BasicAutomaton<W>& a, const std::vector<StateId>& targets) {
    std::vector<bool> mark(a.num_states(), false);
    for (StateId s : targets) {
        a.check_state(s);
        mark[s] = true;
    }
    return backward_reachable(a, mark, kAllTransitions);
}

/// Shortest transition path (BFS) from any of `sources` to a state satisfying `is_target`,
/// using transitions accepted by `keep`. The empty path is returned when a source is a target.
template <class W, class Keep, class Target>
std::optional<std::vector<TransitionId>> shortest_path(const BasicAutomaton<W>& a, const std::vector<StateId>& sources,
                                                       Keep&& keep, Target&& is_target) {
    constexpr TransitionId kRoot = UINT32_MAX;
    constexpr TransitionId kUnseen = UINT32_MAX - 1;
    std::vector<TransitionId> via(a.num_states(), kUnseen);
    std::deque<StateId> queue;
    for (StateId s : sources) {
        if (via[s] != kUnseen) continue;
        via[s] = kRoot;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        if (is_target(s)) {
            std::vector<TransitionId> path;
            while (via[s] != kRoot) {
                path.push_back(via[s]);
                s = a.transition(via[s]).src;
            }
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (TransitionId t : a.out(s)) {
            if (!keep(t)) continue;
            StateId d = a.transition(t).dst;
            if (via[d] == kUnseen) {
                via[d] = t;
                queue.push_back(d);
            }
        }
    }
    return std::nullopt;
}

/// Shortest nonempty cycle through `s` using transitions accepted by `keep`.
template <class W, class Keep>
std::optional<std::vector<TransitionId>> shortest_cycle_through(const BasicAutomaton<W>& a, StateId s, Keep&& keep) {
    std::unordered_map<StateId, TransitionId> entry;
    std::vector<StateId> starts;
    for (TransitionId t : a.out(s)) {
        if (!keep(t)) continue;
        StateId d = a.transition(t).dst;
        if (entry.emplace(d, t).second) starts.push_back(d);
    }
    auto rest = shortest_path(a, starts, keep, [s](StateId x) { return x == s; });
    if (!rest) return std::nullopt;
    StateId first = rest->empty() ? s : a.transition(rest->front()).src;
    std::vector<TransitionId> cycle{entry.at(first)};
    cycle.insert(cycle.end(), rest->begin(), rest->end());
    return cycle;
}

}  // namespace nqa

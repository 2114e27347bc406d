#pragma once

// Limit averages of Sum- children: determinize by extending the alphabet, merge
// the children into one automaton and count how many running instances sit in
// each of its states.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"
#include "nqa/silent_qa.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace nqa {

struct ExtendedNqa {
    NestedAutomaton nqa;
    /// Original letter of every extended letter.
    std::vector<Letter> projection;

    Lasso project(const Lasso& l) const {
        Lasso out;
        for (Letter a : l.stem) out.stem.push_back(projection[a]);
        for (Letter a : l.loop) out.loop.push_back(projection[a]);
        return out;
    }
};

inline constexpr std::size_t kMaxExtendedLetters = 4096;

/// Each extended letter `a#i` fixes, for every parent state and every child state,
/// which a-transition is taken; the index i is a mixed-radix number over the states
/// with at least two options. A child transition into a final state that has
/// outgoing transitions also chooses whether the run stops there: stopping enters
/// a final copy `s!` without outgoing transitions, continuing enters the non-final s.
/// Instances sitting in the same child state read the same letter and so make the
/// same choice.
inline ExtendedNqa determinize_alphabet_extension(const NestedAutomaton& n) {
    const Alphabet& sigma = n.alphabet();
    struct Option {
        TransitionId t;
        bool stop;
    };
    // Options per (letter, state) of the parent (child index 0) and children (1..k).
    auto child_options = [&](const Automaton& c, StateId s, Letter a) {
        std::vector<Option> out;
        for (TransitionId t : c.out(s)) {
            const auto& tr = c.transition(t);
            if (tr.letter != a) continue;
            bool splittable = c.is_final(tr.dst) && !c.out(tr.dst).empty();
            out.push_back({t, false});
            if (splittable) out.push_back({t, true});
        }
        return out;
    };
    auto parent_options = [&](StateId s, Letter a) {
        std::vector<Option> out;
        for (TransitionId t : n.parent.out(s))
            if (n.parent.transition(t).letter == a) out.push_back({t, false});
        return out;
    };

    struct ChoicePoint {
        std::size_t automaton;  // 0 parent, j + 1 child j
        StateId state;
        std::size_t options;
    };
    Alphabet ext;
    std::vector<Letter> projection;
    // digits[x] maps (automaton, state) to the chosen option index for extended letter x.
    std::vector<std::map<std::pair<std::size_t, StateId>, std::size_t>> digits;
    for (Letter a = 0; a < sigma.size(); ++a) {
        std::vector<ChoicePoint> points;
        for (StateId s = 0; s < n.parent.num_states(); ++s)
            if (auto k = parent_options(s, a).size(); k >= 2) points.push_back({0, s, k});
        for (std::size_t j = 0; j < n.num_children(); ++j)
            for (StateId s = 0; s < n.children[j].num_states(); ++s)
                if (auto k = child_options(n.children[j], s, a).size(); k >= 2) points.push_back({j + 1, s, k});
        std::size_t count = 1;
        for (const auto& p : points) {
            count *= p.options;
            if (count > kMaxExtendedLetters)
                throw CapacityError("alphabet extension needs more than " + std::to_string(kMaxExtendedLetters) +
                                    " letters for '" + sigma.name(a) + "'");
        }
        for (std::size_t x = 0; x < count; ++x) {
            std::string name = sigma.name(a) + "#" + std::to_string(x);
            if (ext.find(name)) throw InvalidInput("extended letter '" + name + "' clashes with another letter");
            ext.add(name);
            projection.push_back(a);
            auto& d = digits.emplace_back();
            std::size_t rest = x;
            for (const auto& p : points) {
                d[{p.automaton, p.state}] = rest % p.options;
                rest /= p.options;
            }
        }
    }
    auto chosen = [&](std::size_t x, std::size_t automaton, StateId s) {
        auto it = digits[x].find({automaton, s});
        return it == digits[x].end() ? std::size_t{0} : it->second;
    };

    ExtendedNqa out;
    out.projection = projection;
    AutomatonBuilder<Weight> pb{ext};
    for (StateId s = 0; s < n.parent.num_states(); ++s) pb.add_state(n.parent.state_name(s), n.parent.is_final(s));
    pb.set_initial(n.parent.initial());
    for (Letter x = 0; x < ext.size(); ++x)
        for (StateId s = 0; s < n.parent.num_states(); ++s) {
            auto opts = parent_options(s, projection[x]);
            if (opts.empty()) continue;
            const auto& tr = n.parent.transition(opts[chosen(x, 0, s)].t);
            pb.add_transition(s, x, tr.dst, tr.weight);
        }
    out.nqa.parent = pb.build();

    for (std::size_t j = 0; j < n.num_children(); ++j) {
        const auto& c = n.children[j];
        AutomatonBuilder<Weight> cb{ext};
        std::vector<StateId> stop_copy(c.num_states(), UINT32_MAX);
        for (StateId s = 0; s < c.num_states(); ++s) {
            bool splittable = c.is_final(s) && !c.out(s).empty();
            cb.add_state(c.state_name(s), c.is_final(s) && !splittable);
        }
        for (StateId s = 0; s < c.num_states(); ++s)
            if (c.is_final(s) && !c.out(s).empty()) stop_copy[s] = cb.add_state(c.state_name(s) + "!", true);
        cb.set_initial(c.initial());
        for (Letter x = 0; x < ext.size(); ++x)
            for (StateId s = 0; s < c.num_states(); ++s) {
                auto opts = child_options(c, s, projection[x]);
                if (opts.empty()) continue;
                const auto& o = opts[chosen(x, j + 1, s)];
                const auto& tr = c.transition(o.t);
                cb.add_transition(s, x, o.stop ? stop_copy[tr.dst] : tr.dst, tr.weight);
            }
        out.nqa.children.push_back(cb.build(true));
    }
    out.nqa.declared_deterministic = true;
    return out;
}

/// All children of a deterministic NQA merged into one automaton; an instance
/// spawned by label j starts in entry[j - 1].
struct SynchronizedNqa {
    Automaton parent;
    Automaton ultimate;
    std::vector<StateId> entry;

    /// The equivalent NQA; only possible with a single child.
    NestedAutomaton as_nested() const {
        if (entry.size() != 1) throw UnsupportedError("a synchronized NQA with several entry states has no NQA form");
        return {parent, {ultimate}, true};
    }
};

inline SynchronizedNqa synchronize_children(const NestedAutomaton& n) {
    if (!is_deterministic(n)) throw InvalidInput("synchronization needs a deterministic NQA; determinize first");
    if (n.num_children() == 0) throw InvalidInput("no child automata");
    AutomatonBuilder<Weight> b{n.alphabet()};
    std::vector<StateId> roots;
    std::vector<StateId> offset;
    for (std::size_t j = 0; j < n.num_children(); ++j) {
        const auto& c = n.children[j];
        offset.push_back(static_cast<StateId>(b.num_states()));
        std::string prefix = n.num_children() == 1 ? "" : std::to_string(j + 1) + ".";
        for (StateId s = 0; s < c.num_states(); ++s) b.add_state(prefix + c.state_name(s), c.is_final(s));
        for (const auto& t : c.transitions())
            b.add_transition(offset[j] + t.src, t.letter, offset[j] + t.dst, t.weight);
        roots.push_back(offset[j] + c.initial());
    }
    b.set_initial(roots[0]);
    std::vector<StateId> renum;
    SynchronizedNqa out{n.parent, b.build(true, &renum, roots), {}};
    for (StateId r : roots) out.entry.push_back(renum[r]);
    return out;
}

/// Flat state of the multiset flattening: a parent state and the sorted list of
/// (2 * ultimate state + mark, count) pairs of running instances.
struct MultisetState {
    StateId parent;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
};

struct MultisetGraph {
    std::vector<MultisetState> states;
    SilentQA qa;
};

/// Flattening for (LimInfAvg | LimSupAvg, Sum-): instances in equal states behave
/// alike, so a state only counts them, up to `cap` per (state, mark). Each step
/// costs the sum of -|w| over all running instances; the cost is emitted on spawn
/// transitions and carried by the silent ones, so averages over emitted weights
/// are averages of the children's values. Successors exceeding `cap` are dropped.
/// Breakpoint marks make every instance terminate.
inline MultisetGraph multiset_flatten_graph(const SynchronizedNqa& s, InfiniteValueFn f, std::size_t cap,
                                            Cancellation* cancel = nullptr, std::size_t max_states = 4000000) {
    if (is_extremal(f)) throw InvalidInput("multiset flattening is for limit averages");
    if (cap == 0) throw InvalidInput("multiplicity bound must be positive");
    const auto& p = s.parent;
    const auto& u = s.ultimate;
    MultisetGraph out;
    AutomatonBuilder<FlatWeight> b{p.alphabet()};
    std::map<std::pair<StateId, std::vector<std::pair<std::uint32_t, std::uint32_t>>>, StateId> ids;
    auto accepting = [&](const MultisetState& m) {
        return p.is_final(m.parent) &&
               std::none_of(m.counts.begin(), m.counts.end(), [](const auto& e) { return e.first & 1u; });
    };
    auto id = [&](MultisetState m) {
        auto [it, fresh] = ids.emplace(std::pair(m.parent, m.counts), static_cast<StateId>(out.states.size()));
        if (fresh) {
            if (out.states.size() >= max_states) throw CapacityError("multiset state space too large");
            b.add_state({}, accepting(m));
            out.states.push_back(std::move(m));
        }
        return it->second;
    };
    id({p.initial(), {}});
    b.set_initial(0);
    for (StateId sid = 0; sid < out.states.size(); ++sid) {
        poll(cancel);
        const MultisetState src = out.states[sid];
        const bool mark_all = accepting(src);
        for (Letter a = 0; a < p.alphabet().size(); ++a) {
            auto pt = successor(p, src.parent, a);
            if (!pt) continue;
            const auto& ptr = p.transition(*pt);
            auto label = NestedAutomaton::label_of(ptr.weight);
            std::map<std::uint32_t, std::uint32_t> next;
            Weight cost = 0;
            bool dead = false;
            auto step = [&](StateId st, bool marked, std::uint32_t count) {
                auto ct = successor(u, st, a);
                if (!ct) {
                    dead = true;
                    return;
                }
                const auto& ctr = u.transition(*ct);
                cost -= Weight(static_cast<std::int64_t>(count)) * ctr.weight.abs();
                if (u.is_final(ctr.dst)) return;
                next[ctr.dst * 2 + (marked ? 1 : 0)] += count;
            };
            for (const auto& [key, count] : src.counts) step(key / 2, (key & 1u) || mark_all, count);
            if (label > 0) step(s.entry.at(label - 1), false, 1);
            if (dead) continue;
            MultisetState dst{ptr.dst, {next.begin(), next.end()}};
            if (std::any_of(dst.counts.begin(), dst.counts.end(), [&](const auto& e) { return e.second > cap; }))
                continue;
            StateId did = id(std::move(dst));
            b.add_transition(sid, a, did, label > 0 ? FlatWeight::of(cost) : FlatWeight::silent_step(cost));
        }
    }
    out.qa = b.build(true);
    return out;
}

inline SilentQA multiset_flatten(const SynchronizedNqa& s, InfiniteValueFn f, std::size_t cap,
                                 Cancellation* cancel = nullptr) {
    return multiset_flatten_graph(s, f, cap, cancel).qa;
}

/// Default multiplicity bound: the number of states of the merged child.
inline std::size_t default_multiplicity_bound(const SynchronizedNqa& s) { return s.ultimate.num_states(); }

}  // namespace nqa

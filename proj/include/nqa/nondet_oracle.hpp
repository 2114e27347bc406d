#pragma once

// Lasso evaluation for nondeterministic NQAs by exploring run configurations.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"
#include "nqa/qa_decisions.hpp"
#include "nqa/silent_elimination.hpp"
#include "nqa/silent_qa.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

namespace nqa {

struct NondetEvalResult {
    /// Best value of an accepting run found; the exact value when not exhausted.
    ExtValue value = ExtValue::neg_inf();
    bool exhausted = false;
};

namespace detail {

struct RunningChild {
    std::uint32_t child;
    StateId state;
    Weight acc;
    bool absorbed;
    bool marked;

    auto key() const { return std::tie(child, state, acc, absorbed, marked); }
    friend bool operator<(const RunningChild& x, const RunningChild& y) { return x.key() < y.key(); }
    friend bool operator==(const RunningChild& x, const RunningChild& y) { return x.key() == y.key(); }
};

/// Accumulator after reading w; `first` when w is the first weight of the run.
inline RunningChild accumulate(const FiniteValueFn& g, RunningChild c, const Weight& w, bool first) {
    using K = FiniteValueFn::Kind;
    switch (g.kind()) {
        case K::Min: c.acc = first ? w : std::min(c.acc, w); break;
        case K::Max: c.acc = first ? w : std::max(c.acc, w); break;
        case K::SumPlus: c.acc = (first ? Weight(0) : c.acc) + w.abs(); break;
        case K::SumMinus: c.acc = (first ? Weight(0) : c.acc) - w.abs(); break;
        case K::SumB: {
            if (c.absorbed) break;
            Weight s = (first ? Weight(0) : c.acc) + w;
            if (s > g.bound()) {
                c.acc = g.bound();
                c.absorbed = true;
            } else if (s < -g.bound()) {
                c.acc = -g.bound();
                c.absorbed = true;
            } else {
                c.acc = s;
            }
            break;
        }
    }
    return c;
}

}  // namespace detail

/// Supremum over accepting runs of the NQA on stem.loop^omega, exploring at most
/// `budget` configurations (parent state, lasso position, running children). Child
/// values are emitted when the children return; on a lasso run every child returns
/// within bounded delay, so the aggregate is unchanged. Children that can no longer
/// return on the rest of the lasso are treated as stuck.
inline NondetEvalResult nqa_eval_lasso_nondet(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g,
                                              const Lasso& lasso, std::size_t budget, Cancellation* cancel = nullptr) {
    if (lasso.loop.empty()) throw InvalidInput("lasso loop must be nonempty");
    for (std::size_t i = 0; i < lasso.size(); ++i)
        if (lasso.at(i) >= n.alphabet().size()) throw InvalidInput("letter outside the alphabet");
    NondetEvalResult out;
    if (budget == 0) {
        out.exhausted = true;
        return out;
    }

    // returns[j][q * period + pos]: child j in state q at lasso position pos can still reach a final state.
    const std::size_t period = lasso.size();
    std::vector<std::vector<char>> returns(n.children.size());
    for (std::size_t j = 0; j < n.children.size(); ++j) {
        const auto& c = n.children[j];
        auto& r = returns[j];
        r.assign(c.num_states() * period, 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (StateId q = 0; q < c.num_states(); ++q)
                for (std::size_t pos = 0; pos < period; ++pos) {
                    if (r[q * period + pos]) continue;
                    for (TransitionId t : c.out(q)) {
                        const auto& tr = c.transition(t);
                        if (tr.letter != lasso.at(pos)) continue;
                        if (c.is_final(tr.dst) || r[tr.dst * period + lasso.next(pos)]) {
                            r[q * period + pos] = 1;
                            changed = true;
                            break;
                        }
                    }
                }
        }
    }

    using detail::RunningChild;
    struct Config {
        StateId parent;
        std::size_t pos;
        std::vector<RunningChild> children;
    };
    AutomatonBuilder<FlatWeight> b{Alphabet({"x"})};
    std::vector<Config> configs;
    std::map<std::tuple<StateId, std::size_t, std::vector<RunningChild>>, StateId> ids;
    std::vector<StateId> state_of;
    auto accepting = [&](const Config& c) {
        return n.parent.is_final(c.parent) &&
               std::none_of(c.children.begin(), c.children.end(), [](const RunningChild& r) { return r.marked; });
    };
    auto id = [&](Config c) -> std::optional<StateId> {
        std::sort(c.children.begin(), c.children.end());
        auto key = std::tuple(c.parent, c.pos, c.children);
        if (auto it = ids.find(key); it != ids.end()) return state_of[it->second];
        if (configs.size() >= budget) {
            out.exhausted = true;
            return std::nullopt;
        }
        auto cid = static_cast<StateId>(configs.size());
        ids.emplace(std::move(key), cid);
        state_of.push_back(b.add_state({}, accepting(c)));
        configs.push_back(std::move(c));
        return state_of.back();
    };
    b.set_initial(*id({n.parent.initial(), 0, {}}));

    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        poll(cancel);
        const Config src = configs[ci];
        const StateId from = state_of[ci];
        const Letter a = lasso.at(src.pos);
        const std::size_t next_pos = lasso.next(src.pos);
        const bool mark_all = accepting(src);

        // Per running child: its possible continuations (nullopt = returned with the given value).
        using Move = std::pair<std::optional<RunningChild>, std::optional<Weight>>;
        auto moves_of = [&](const RunningChild& r, bool first) {
            std::vector<Move> ms;
            const auto& c = n.children[r.child];
            for (TransitionId t : c.out(r.state)) {
                const auto& tr = c.transition(t);
                if (tr.letter != a) continue;
                RunningChild next = detail::accumulate(g, r, tr.weight, first);
                next.state = tr.dst;
                if (c.is_final(tr.dst)) ms.push_back({std::nullopt, next.acc});
                if ((!c.is_final(tr.dst) || !c.out(tr.dst).empty()) && returns[r.child][tr.dst * period + next_pos])
                    ms.push_back({next, std::nullopt});
            }
            return ms;
        };
        std::vector<std::vector<Move>> base;
        bool stuck = false;
        for (const auto& r : src.children) {
            RunningChild rc = r;
            rc.marked = r.marked || mark_all;
            base.push_back(moves_of(rc, false));
            if (base.back().empty()) stuck = true;
        }
        if (stuck) continue;

        for (TransitionId pt : n.parent.out(src.parent)) {
            const auto& ptr = n.parent.transition(pt);
            if (ptr.letter != a) continue;
            auto choices = base;
            if (auto j = n.label(pt); j > 0) {
                RunningChild fresh{j - 1, n.children[j - 1].initial(), Weight(0), false, false};
                choices.push_back(moves_of(fresh, true));
                if (choices.back().empty()) continue;
            }
            // Enumerate one move per running child.
            std::vector<std::size_t> pick(choices.size(), 0);
            while (true) {
                Config dst{ptr.dst, next_pos, {}};
                std::vector<Weight> returned;
                for (std::size_t i = 0; i < choices.size(); ++i) {
                    const auto& m = choices[i][pick[i]];
                    if (m.first) dst.children.push_back(*m.first);
                    else returned.push_back(*m.second);
                }
                if (auto to = id(std::move(dst))) {
                    if (returned.empty()) {
                        b.add_transition(from, 0, *to, FlatWeight::silent_step());
                    } else {
                        std::sort(returned.begin(), returned.end());
                        StateId cur = from;
                        for (std::size_t i = 0; i + 1 < returned.size(); ++i) {
                            StateId mid = b.add_state({}, false);
                            b.add_transition(cur, 0, mid, FlatWeight::of(returned[i]));
                            cur = mid;
                        }
                        b.add_transition(cur, 0, *to, FlatWeight::of(returned.back()));
                    }
                }
                std::size_t i = 0;
                while (i < choices.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
                if (i == choices.size()) break;
            }
        }
    }

    auto e = eliminate_silent(b.build(true), f, true, cancel);
    out.value = top_value(e.qa, f, {false, cancel}).value;
    return out;
}

}  // namespace nqa

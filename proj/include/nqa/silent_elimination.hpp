#pragma once

// Removing silent weights.
//
// Extremal value functions: a silent weight becomes the neutral value (-inf for
// Sup/LimSup, +inf for Inf/LimInf). Accepting runs must still take infinitely
// many non-silent transitions; a flag component (q, b) records whether one was
// taken since the last accepting visit, and (q, 1) is final for final q. The
// flag is skipped when no silent transition lies on a cycle.
//
// Limit averages: each maximal silent segment and the non-silent transition
// ending it become one transition. Its weight is the segment's carried cost plus
// the closing weight, and its target remembers whether the segment visited a
// final state. With the SCC optimization only segments inside accepting SCCs are
// compressed; silent transitions elsewhere become weight-0 (plus carried cost)
// transitions, which cannot change a prefix-independent value.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/qa_decisions.hpp"
#include "nqa/silent_qa.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace nqa {

struct EliminatedQA {
    ExtAutomaton qa;
    /// For each transition of `qa`, the transitions of the source automaton it stands for.
    std::vector<std::vector<TransitionId>> origin;

    /// Maps a run of `qa` to a word over the source automaton's letters.
    template <class W>
    Lasso expand(const BasicAutomaton<W>& source, const PathLasso& run) const {
        Lasso l;
        for (TransitionId t : run.stem)
            for (TransitionId o : origin[t]) l.stem.push_back(source.transition(o).letter);
        for (TransitionId t : run.loop)
            for (TransitionId o : origin[t]) l.loop.push_back(source.transition(o).letter);
        return l;
    }
};

namespace detail {

/// Collects transitions with their origin and builds the automaton, keeping the origins aligned.
class OriginBuilder {
public:
    explicit OriginBuilder(Alphabet alphabet) : b_(std::move(alphabet)) {}

    StateId add_state(bool final) { return b_.add_state({}, final); }
    void add(StateId s, Letter a, StateId d, ExtValue w, std::vector<TransitionId> origin) {
        b_.add_transition(s, a, d, w);
        pending_.push_back({s, a, d, std::move(w), std::move(origin)});
    }

    EliminatedQA build() {
        b_.set_initial(0);
        std::vector<StateId> renum;
        EliminatedQA out{b_.build(true, &renum), {}};
        std::map<std::tuple<StateId, Letter, StateId>, std::vector<std::size_t>> by_key;
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            const auto& p = pending_[i];
            if (renum[p.src] == UINT32_MAX) continue;
            by_key[{renum[p.src], p.letter, renum[p.dst]}].push_back(i);
        }
        out.origin.resize(out.qa.num_transitions());
        for (TransitionId t = 0; t < out.qa.num_transitions(); ++t) {
            const auto& tr = out.qa.transition(t);
            for (std::size_t i : by_key.at({tr.src, tr.letter, tr.dst}))
                if (pending_[i].weight == tr.weight) {
                    out.origin[t] = pending_[i].origin;
                    break;
                }
        }
        return out;
    }

private:
    struct Pending {
        StateId src;
        Letter letter;
        StateId dst;
        ExtValue weight;
        std::vector<TransitionId> origin;
    };
    AutomatonBuilder<ExtValue> b_;
    std::vector<Pending> pending_;
};

inline EliminatedQA eliminate_extremal(const SilentQA& q, InfiniteValueFn f, bool scc_optimization) {
    const ExtValue neutral = is_sup_like(f) ? ExtValue::neg_inf() : ExtValue::pos_inf();
    auto weight = [&](const FlatWeight& w) { return w.silent ? neutral : ExtValue(w.value); };
    const auto& sccs = q.sccs();
    bool silent_cycle = false;
    for (const auto& t : q.transitions())
        if (t.weight.silent && sccs.scc_id[t.src] == sccs.scc_id[t.dst]) silent_cycle = true;
    if (scc_optimization && !silent_cycle) {
        EliminatedQA out{q.map_weights<ExtValue>(weight), {}};
        for (TransitionId t = 0; t < q.num_transitions(); ++t) out.origin.push_back({t});
        return out;
    }
    OriginBuilder b{q.alphabet()};
    std::map<std::pair<StateId, bool>, StateId> ids;
    std::vector<std::pair<StateId, bool>> work;
    auto id = [&](StateId s, bool flag) {
        auto [it, fresh] = ids.emplace(std::pair(s, flag), 0);
        if (fresh) {
            it->second = b.add_state(flag && q.is_final(s));
            work.emplace_back(s, flag);
        }
        return it->second;
    };
    id(q.initial(), false);
    for (std::size_t i = 0; i < work.size(); ++i) {
        auto [s, flag] = work[i];
        StateId src = ids.at({s, flag});
        bool reset = flag && q.is_final(s);
        for (TransitionId t : q.out(s)) {
            const auto& tr = q.transition(t);
            bool next = (!reset && flag) || !tr.weight.silent;
            b.add(src, tr.letter, id(tr.dst, next), weight(tr.weight), {t});
        }
    }
    return b.build();
}

inline EliminatedQA eliminate_average(const SilentQA& q, bool scc_optimization, Cancellation* cancel) {
    const auto& sccs = q.sccs();
    std::vector<bool> scope(q.num_transitions(), true);
    if (scc_optimization)
        for (TransitionId t = 0; t < q.num_transitions(); ++t) {
            const auto& tr = q.transition(t);
            scope[t] = sccs.scc_id[tr.src] == sccs.scc_id[tr.dst] && sccs.accepting[sccs.scc_id[tr.src]];
        }
    for (TransitionId t = 0; t < q.num_transitions(); ++t) {
        const auto& w = q.transition(t).weight;
        if (w.silent && scope[t] && w.value.sign() > 0)
            throw InvalidInput("silent transition with a positive carried cost");
    }
    auto terminal = [&](TransitionId t) { return !q.transition(t).weight.silent || !scope[t]; };

    OriginBuilder b{q.alphabet()};
    std::map<std::pair<StateId, bool>, StateId> ids;
    std::vector<std::pair<StateId, bool>> work;
    auto id = [&](StateId s, bool visited_final) {
        auto [it, fresh] = ids.emplace(std::pair(s, visited_final), 0);
        if (fresh) {
            it->second = b.add_state(visited_final);
            work.emplace_back(s, visited_final);
        }
        return it->second;
    };
    struct Segment {
        StateId end;
        bool visited_final;
        Weight carried;
        std::vector<TransitionId> path;
    };
    std::unordered_map<StateId, std::vector<Segment>> segments_from;
    // Silent in-scope paths from u maximizing the carried cost, per (end state, visited-final bit).
    auto segments = [&](StateId u) -> const std::vector<Segment>& {
        if (auto it = segments_from.find(u); it != segments_from.end()) return it->second;
        using Key = std::pair<StateId, bool>;
        std::map<Key, Weight> best;
        std::map<Key, std::pair<Key, TransitionId>> via;
        std::set<Key> done;
        using Item = std::pair<Weight, Key>;  // cost = -carried
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        best[{u, false}] = 0;
        pq.push({Weight(0), {u, false}});
        while (!pq.empty()) {
            auto [cost, key] = pq.top();
            pq.pop();
            if (!done.insert(key).second) continue;
            poll(cancel);
            for (TransitionId t : q.out(key.first)) {
                const auto& tr = q.transition(t);
                if (!tr.weight.silent || !scope[t]) continue;
                Key next{tr.dst, key.second || q.is_final(tr.dst)};
                Weight c = cost - tr.weight.value;
                auto it = best.find(next);
                if (it == best.end() || c < -it->second) {
                    best[next] = -c;
                    via[next] = {key, t};
                    pq.push({c, next});
                }
            }
        }
        std::vector<Segment> out;
        for (const auto& [key, carried] : best) {
            if (!key.second && best.count({key.first, true}) && best.at({key.first, true}) >= carried) continue;
            std::vector<TransitionId> path;
            for (Key k = key; k != Key{u, false}; k = via.at(k).first) path.push_back(via.at(k).second);
            std::reverse(path.begin(), path.end());
            out.push_back({key.first, key.second, carried, std::move(path)});
        }
        return segments_from.emplace(u, std::move(out)).first->second;
    };

    id(q.initial(), false);
    for (std::size_t i = 0; i < work.size(); ++i) {
        auto [u, bit] = work[i];
        StateId src = ids.at({u, bit});
        for (const auto& seg : segments(u)) {
            for (TransitionId t : q.out(seg.end)) {
                if (!terminal(t)) continue;
                const auto& tr = q.transition(t);
                Weight w = seg.carried + tr.weight.value;
                auto origin = seg.path;
                origin.push_back(t);
                b.add(src, tr.letter, id(tr.dst, seg.visited_final || q.is_final(tr.dst)), ExtValue(w),
                      std::move(origin));
            }
        }
    }
    return b.build();
}

}  // namespace detail

inline EliminatedQA eliminate_silent(const SilentQA& q, InfiniteValueFn f, bool scc_optimization = true,
                                     Cancellation* cancel = nullptr) {
    if (is_extremal(f)) return detail::eliminate_extremal(q, f, scc_optimization);
    return detail::eliminate_average(q, scc_optimization, cancel);
}

}  // namespace nqa

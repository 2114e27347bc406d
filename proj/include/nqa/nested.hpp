#pragma once

// Nested quantitative automata: a parent automaton over infinite words whose
// transitions may invoke child automata over finite words.
//
// A child invoked on the transition reading position i starts in its initial
// state and reads the letters from position i on. Its run ends on entering a
// final state; the child's value is g applied to the weights of that run.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace nqa {

struct NestedAutomaton {
    /// Transition weights hold labels: 0 is silent, i > 0 invokes children[i - 1].
    Automaton parent;
    std::vector<Automaton> children;
    /// Set by producers that promise a deterministic NQA; validation then enforces it.
    bool declared_deterministic = false;

    std::size_t num_children() const { return children.size(); }
    const Alphabet& alphabet() const { return parent.alphabet(); }

    /// Label of a parent transition (0 silent).
    std::uint32_t label(TransitionId t) const { return label_of(parent.transition(t).weight); }

    static std::uint32_t label_of(const Weight& w) {
        if (!w.is_integer() || w.sign() < 0) throw InvalidInput("parent label " + w.str() + " is not a child index");
        return w.numerator().convert_to<std::uint32_t>();
    }
};

enum class Severity { Warning, Error };

struct Diagnostic {
    Severity severity;
    std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

inline std::string first_error(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return d.message;
    return {};
}

/// Deterministic parent and children, child final states without outgoing transitions.
inline bool is_deterministic(const NestedAutomaton& n) {
    if (!is_deterministic(n.parent)) return false;
    for (const auto& c : n.children) {
        if (!is_deterministic(c)) return false;
        for (StateId s = 0; s < c.num_states(); ++s)
            if (c.is_final(s) && !c.out(s).empty()) return false;
    }
    return true;
}

inline std::vector<Diagnostic> validate_nqa(const NestedAutomaton& n) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string m) { out.push_back({Severity::Error, std::move(m)}); };
    auto warn = [&](std::string m) { out.push_back({Severity::Warning, std::move(m)}); };
    const std::size_t k = n.num_children();
    if (k == 0) error("no child automata");
    for (std::size_t j = 0; j < k; ++j)
        if (!(n.children[j].alphabet() == n.parent.alphabet()))
            error("child " + std::to_string(j + 1) + " alphabet differs from the parent alphabet");
    for (const auto& t : n.parent.transitions()) {
        const Weight& w = t.weight;
        if (!w.is_integer() || w.sign() < 0 || w > Weight(static_cast<std::int64_t>(k))) {
            error("label out of range: " + w.str() + " on " + n.parent.state_name(t.src) + " -> " +
                  n.parent.state_name(t.dst));
        }
    }
    if (!is_complete(n.parent)) error("parent automaton is not complete");
    if (n.parent.num_finals() == 0) warn("parent has no final state");
    for (std::size_t j = 0; j < k; ++j) {
        const auto& c = n.children[j];
        const std::string name = "child " + std::to_string(j + 1);
        std::vector<bool> seen(c.alphabet().size());
        for (StateId s = 0; s < c.num_states(); ++s) {
            if (c.is_final(s)) continue;
            std::fill(seen.begin(), seen.end(), false);
            for (TransitionId t : c.out(s)) seen[c.transition(t).letter] = true;
            if (std::find(seen.begin(), seen.end(), false) != seen.end())
                warn(name + ": state " + c.state_name(s) + " is missing letters (runs there get stuck)");
        }
        if (c.num_finals() == 0) warn(name + " has no final state");
        if (c.is_final(c.initial())) warn(name + ": initial state is final (runs still read the invoking letter)");
    }
    if (n.declared_deterministic) {
        if (!is_deterministic(n.parent)) error("parent is not deterministic");
        for (std::size_t j = 0; j < k; ++j) {
            const auto& c = n.children[j];
            const std::string name = "child " + std::to_string(j + 1);
            if (!is_deterministic(c)) error(name + " is not deterministic");
            for (StateId s = 0; s < c.num_states(); ++s)
                if (c.is_final(s) && !c.out(s).empty())
                    error(name + ": final state " + c.state_name(s) + " has outgoing transitions");
        }
    }
    return out;
}

struct ReturnedValue {
    std::size_t spawn_position;  // 1-based position of the invoking letter
    Weight value;

    friend bool operator==(const ReturnedValue&, const ReturnedValue&) = default;
};

struct MonitorResult {
    std::vector<ReturnedValue> returned;  // ordered by spawn position
    std::size_t still_active = 0;
    std::vector<std::string> diagnostics;

    std::vector<Weight> values() const {
        std::vector<Weight> v;
        for (const auto& r : returned) v.push_back(r.value);
        return v;
    }
};

/// Simulates a deterministic NQA on a finite word.
inline MonitorResult monitor_prefix(const NestedAutomaton& n, const FiniteValueFn& g, const std::vector<Letter>& word) {
    if (!is_deterministic(n)) throw InvalidInput("NQA is not deterministic");
    struct Instance {
        std::size_t child;
        StateId state;
        std::size_t spawn;
        std::vector<Weight> weights;
    };
    MonitorResult out;
    std::vector<Instance> active;
    StateId q = n.parent.initial();
    for (std::size_t i = 0; i < word.size(); ++i) {
        Letter a = word[i];
        if (a >= n.alphabet().size()) throw InvalidInput("letter outside the alphabet");
        auto t = successor(n.parent, q, a);
        if (!t) throw InvalidInput("parent run is stuck at position " + std::to_string(i + 1));
        if (auto j = n.label(*t); j > 0) active.push_back({j - 1, n.children[j - 1].initial(), i + 1, {}});
        q = n.parent.transition(*t).dst;

        std::vector<Instance> next;
        for (auto& inst : active) {
            const auto& c = n.children[inst.child];
            auto ct = successor(c, inst.state, a);
            if (!ct) {
                out.diagnostics.push_back("child " + std::to_string(inst.child + 1) + " spawned at position " +
                                          std::to_string(inst.spawn) + " is stuck at position " +
                                          std::to_string(i + 1));
                continue;
            }
            inst.weights.push_back(c.transition(*ct).weight);
            inst.state = c.transition(*ct).dst;
            if (c.is_final(inst.state))
                out.returned.push_back({inst.spawn, eval_finite(g, inst.weights)});
            else
                next.push_back(std::move(inst));
        }
        active = std::move(next);
    }
    std::sort(out.returned.begin(), out.returned.end(),
              [](const ReturnedValue& x, const ReturnedValue& y) { return x.spawn_position < y.spawn_position; });
    out.still_active = active.size();
    return out;
}

inline constexpr std::size_t kDefaultOracleCap = 1000000;

/// Exact value of the unique run of a deterministic NQA on stem.loop^omega.
inline ExtValue nqa_eval_lasso(const NestedAutomaton& n, InfiniteValueFn f, const FiniteValueFn& g, const Lasso& lasso,
                               std::size_t cap = kDefaultOracleCap) {
    if (!is_deterministic(n)) throw InvalidInput("NQA is not deterministic");
    if (lasso.loop.empty()) throw InvalidInput("lasso loop must be nonempty");
    for (std::size_t i = 0; i < lasso.size(); ++i)
        if (lasso.at(i) >= n.alphabet().size()) throw InvalidInput("letter outside the alphabet");

    std::size_t budget = cap;
    auto spend = [&]() {
        if (budget-- == 0) throw CapacityError("oracle capacity exceeded");
    };

    struct Step {
        TransitionId t;
        std::size_t pos;
    };
    std::vector<Step> steps;
    std::map<std::pair<StateId, std::size_t>, std::size_t> seen;
    StateId q = n.parent.initial();
    std::size_t pos = 0;
    std::size_t cycle_start = 0;
    while (true) {
        if (pos >= lasso.stem.size()) {
            auto [it, fresh] = seen.emplace(std::pair(q, pos), steps.size());
            if (!fresh) {
                cycle_start = it->second;
                break;
            }
        }
        spend();
        auto t = successor(n.parent, q, lasso.at(pos));
        if (!t) return ExtValue::neg_inf();
        steps.push_back({*t, pos});
        q = n.parent.transition(*t).dst;
        pos = lasso.next(pos);
    }

    bool visits_final = false, non_silent = false;
    for (std::size_t i = cycle_start; i < steps.size(); ++i) {
        if (n.parent.is_final(n.parent.transition(steps[i].t).dst)) visits_final = true;
        if (n.label(steps[i].t) > 0) non_silent = true;
    }
    if (!visits_final || !non_silent) return ExtValue::neg_inf();

    // Child value for a spawn at lasso position p; nullopt when the child never accepts.
    std::map<std::pair<std::size_t, std::size_t>, std::optional<Weight>> memo;
    auto child_value = [&](std::size_t j, std::size_t p) -> std::optional<Weight> {
        auto key = std::pair(j, p);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const auto& c = n.children[j];
        StateId s = c.initial();
        std::vector<Weight> ws;
        std::map<std::pair<StateId, std::size_t>, bool> visited;
        std::optional<Weight> result;
        while (true) {
            if (p >= lasso.stem.size() && !visited.emplace(std::pair(s, p), true).second) break;
            spend();
            auto t = successor(c, s, lasso.at(p));
            if (!t) break;
            ws.push_back(c.transition(*t).weight);
            s = c.transition(*t).dst;
            p = lasso.next(p);
            if (c.is_final(s)) {
                result = eval_finite(g, ws);
                break;
            }
        }
        memo.emplace(key, result);
        return result;
    };

    PeriodicSeq seq;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto j = n.label(steps[i].t);
        if (j == 0) continue;
        auto v = child_value(j - 1, steps[i].pos);
        if (!v) return ExtValue::neg_inf();
        (i < cycle_start ? seq.stem : seq.loop).push_back(*v);
    }
    return eval_lasso(f, seq);
}

}  // namespace nqa

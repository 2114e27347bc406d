#pragma once

// Benchmark families: response time A_{n,k} and resource consumption B_{n,k}.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"

#include <string>
#include <vector>

namespace nqa {

namespace detail {

/// Child that adds 1 per request or idle step and returns on the grant.
inline Automaton response_child(const Alphabet& sigma) {
    AutomatonBuilder<Weight> c{sigma};
    StateId c0 = c.add_state("c0");
    StateId c1 = c.add_state("c1", true);
    c.set_initial(c0);
    c.add_transition(c0, "r", c0, Weight(1));
    c.add_transition(c0, "o", c0, Weight(1));
    c.add_transition(c0, "g", c1, Weight(0));
    return c.build();
}

}  // namespace detail

/// Response-time monitor with at most n pending requests, each answered within k steps.
///
/// A parent state (p, a) records p pending requests, the oldest of age a. Since a grant
/// answers every pending request, nothing else matters, and there are
/// sum_{p=1..n} (k - p + 1) = n(2k - n + 1)/2 such states, plus idle and the sink.
inline NestedAutomaton gen_response(std::size_t n, std::size_t k) {
    if (n < 1 || k < n) throw InvalidInput("response family needs k >= n >= 1");
    Alphabet sigma({"r", "g", "o"});
    AutomatonBuilder<Weight> p{sigma};
    StateId idle = p.add_state("idle", true);
    std::vector<std::vector<StateId>> pa(n + 1, std::vector<StateId>(k + 1, 0));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t a = i; a <= k; ++a)
            pa[i][a] = p.add_state("p" + std::to_string(i) + "a" + std::to_string(a), true);
    StateId sink = p.add_state("sink");
    p.set_initial(idle);
    const Weight silent(0), spawn(1);
    p.add_transition(idle, "r", pa[1][1], spawn);
    p.add_transition(idle, "g", idle, silent);
    p.add_transition(idle, "o", idle, silent);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t a = i; a <= k; ++a) {
            StateId s = pa[i][a];
            p.add_transition(s, "o", a < k ? pa[i][a + 1] : sink, silent);
            p.add_transition(s, "r", i < n && a < k ? pa[i + 1][a + 1] : sink, spawn);
            p.add_transition(s, "g", idle, silent);
        }
    for (Letter l = 0; l < sigma.size(); ++l) p.add_transition(sink, l, sink, silent);
    return {p.build(), {detail::response_child(sigma)}, true};
}

/// Name of the letter a_{i,j}; indices are separated once they may have two digits.
inline std::string resource_use_letter(std::size_t i, std::size_t j, std::size_t n, std::size_t k) {
    if (n < 10 && k < 10) return "a" + std::to_string(i) + std::to_string(j);
    return "a" + std::to_string(i) + "_" + std::to_string(j);
}

/// n processes sharing k resources: process i starts with s_i, uses resources with
/// a_{i,j} and terminates with t_i; its child returns the number of distinct
/// resources used.
inline NestedAutomaton gen_resource(std::size_t n, std::size_t k) {
    if (n < 1 || k < 1) throw InvalidInput("resource family needs n, k >= 1");
    if (k > 16) throw CapacityError("resource family children have 2^k + 3 states; k is limited to 16");
    Alphabet sigma;
    std::vector<Letter> start(n + 1), stop(n + 1);
    std::vector<std::vector<Letter>> use(n + 1, std::vector<Letter>(k + 1));
    for (std::size_t i = 1; i <= n; ++i) {
        start[i] = sigma.add("s" + std::to_string(i));
        for (std::size_t j = 1; j <= k; ++j) use[i][j] = sigma.add(resource_use_letter(i, j, n, k));
        stop[i] = sigma.add("t" + std::to_string(i));
    }
    std::vector<std::size_t> owner(sigma.size());
    for (std::size_t i = 1; i <= n; ++i) {
        owner[start[i]] = owner[stop[i]] = i;
        for (std::size_t j = 1; j <= k; ++j) owner[use[i][j]] = i;
    }

    AutomatonBuilder<Weight> p{sigma};
    StateId q = p.add_state("q", true);
    p.set_initial(q);
    for (Letter l = 0; l < sigma.size(); ++l) {
        bool spawns = l == start[owner[l]];
        p.add_transition(q, l, q, Weight(spawns ? static_cast<std::int64_t>(owner[l]) : 0));
    }

    std::vector<Automaton> children;
    for (std::size_t i = 1; i <= n; ++i) {
        AutomatonBuilder<Weight> c{sigma};
        StateId init = c.add_state("init");
        std::vector<StateId> subset(std::size_t{1} << k);
        for (std::size_t m = 0; m < subset.size(); ++m) {
            std::string name = "{";
            for (std::size_t j = 1; j <= k; ++j)
                if (m >> (j - 1) & 1u) name += (name.size() > 1 ? "." : "") + std::to_string(j);
            subset[m] = c.add_state(name + "}");
        }
        StateId acc = c.add_state("acc", true);
        StateId rej = c.add_state("rej");
        c.set_initial(init);
        for (Letter l = 0; l < sigma.size(); ++l) {
            c.add_transition(init, l, l == start[i] ? subset[0] : rej, Weight(0));
            c.add_transition(rej, l, rej, Weight(0));
        }
        for (std::size_t m = 0; m < subset.size(); ++m) {
            for (Letter l = 0; l < sigma.size(); ++l) {
                if (owner[l] != i) {
                    c.add_transition(subset[m], l, subset[m], Weight(0));
                } else if (l == start[i]) {
                    c.add_transition(subset[m], l, rej, Weight(0));
                } else if (l == stop[i]) {
                    c.add_transition(subset[m], l, acc, Weight(0));
                }
            }
            for (std::size_t j = 1; j <= k; ++j) {
                std::size_t m2 = m | (std::size_t{1} << (j - 1));
                auto used = static_cast<std::int64_t>(__builtin_popcountll(m2));
                c.add_transition(subset[m], use[i][j], subset[m2], Weight(used));
            }
        }
        children.push_back(c.build());
    }
    return {p.build(), std::move(children), true};
}

/// Request/grant monitor: every request spawns a child
/// counting the steps until the next grant, with no bound on pending requests.
inline NestedAutomaton response_time_monitor() {
    Alphabet sigma({"r", "g", "o"});
    AutomatonBuilder<Weight> p{sigma};
    StateId q = p.add_state("q", true);
    p.set_initial(q);
    p.add_transition(q, "r", q, Weight(1));
    p.add_transition(q, "o", q, Weight(0));
    p.add_transition(q, "g", q, Weight(0));
    return {p.build(), {detail::response_child(sigma)}, true};
}

}  // namespace nqa

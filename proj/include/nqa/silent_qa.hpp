#pragma once

// Automata whose transitions may carry the silent marker instead of a weight.

#include "nqa/automaton.hpp"
#include "nqa/weight.hpp"

#include <string>
#include <string_view>

namespace nqa {

/// A weight or the silent marker. Silent transitions may carry a cost that is
/// added to the next non-silent weight when silent segments are compressed;
/// constructions other than the multiset flattening always leave it at zero.
struct FlatWeight {
    bool silent = false;
    Weight value;

    static FlatWeight of(Weight w) { return {false, std::move(w)}; }
    static FlatWeight silent_step(Weight carried = 0) { return {true, std::move(carried)}; }

    std::string str() const {
        if (!silent) return value.str();
        if (value.sign() == 0) return "_";
        return value.sign() > 0 ? "_+" + value.str() : "_" + value.str();
    }

    /// Inverse of str(): `_`, `_+c`, `_-c` or a plain weight.
    static FlatWeight parse(std::string_view text) {
        if (!text.empty() && text[0] == '_') {
            if (text.size() == 1) return silent_step();
            return silent_step(Weight::parse(text.substr(1)));
        }
        return of(Weight::parse(text));
    }

    friend bool operator==(const FlatWeight&, const FlatWeight&) = default;
};

using SilentQA = BasicAutomaton<FlatWeight>;

}  // namespace nqa

template <>
struct std::hash<nqa::FlatWeight> {
    std::size_t operator()(const nqa::FlatWeight& w) const { return w.value.hash() ^ (w.silent ? 0x7f4a7c15u : 0u); }
};

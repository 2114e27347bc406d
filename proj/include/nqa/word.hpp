#pragma once

// Ultimately periodic words and run lassos.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace nqa {

/// The word stem . loop^omega; loop is nonempty.
struct Lasso {
    std::vector<Letter> stem;
    std::vector<Letter> loop;

    std::size_t size() const { return stem.size() + loop.size(); }
    /// Letter at 0-based position i of the infinite word.
    Letter at(std::size_t i) const { return i < stem.size() ? stem[i] : loop[(i - stem.size()) % loop.size()]; }
    /// Position index after reading the letter at `pos` (positions >= stem.size() wrap within the loop).
    std::size_t next(std::size_t pos) const {
        ++pos;
        return pos < size() ? pos : stem.size();
    }

    friend bool operator==(const Lasso&, const Lasso&) = default;
};

/// A lasso-shaped run given by transition ids: stem path then a cycle back to the cycle's start.
struct PathLasso {
    std::vector<TransitionId> stem;
    std::vector<TransitionId> loop;
};

inline std::vector<Letter> parse_letters(const Alphabet& alphabet, const std::string& text) {
    std::istringstream in(text);
    std::vector<Letter> out;
    std::string tok;
    while (in >> tok) out.push_back(alphabet.at(tok));
    return out;
}

inline std::string format_letters(const Alphabet& alphabet, const std::vector<Letter>& letters) {
    std::string out;
    for (Letter l : letters) {
        if (!out.empty()) out += ' ';
        out += alphabet.name(l);
    }
    return out;
}

inline Lasso parse_lasso(const Alphabet& alphabet, const std::string& stem, const std::string& loop) {
    Lasso l{parse_letters(alphabet, stem), parse_letters(alphabet, loop)};
    if (l.loop.empty()) throw InvalidInput("lasso loop must be nonempty");
    return l;
}

template <class W>
Lasso to_lasso(const BasicAutomaton<W>& a, const PathLasso& p) {
    Lasso l;
    for (TransitionId t : p.stem) l.stem.push_back(a.transition(t).letter);
    for (TransitionId t : p.loop) l.loop.push_back(a.transition(t).letter);
    return l;
}

}  // namespace nqa

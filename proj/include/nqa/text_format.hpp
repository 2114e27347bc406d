#pragma once

// Plain-text automaton formats.
//
//   letter : weight, source -> target     one transition per line
//   final: s1 s2 ...                      optional; absent means every state is final
//   # comment
//
// The initial state is the source of the first transition. Nested automata
// consist of an @PARENT block, whose weights are child labels (0 silent), and
// one @CHILD i block per child i = 1..k. Weights are integers or p/q; `_`
// denotes a silent weight in flattening output.

#include "nqa/automaton.hpp"
#include "nqa/errors.hpp"
#include "nqa/nested.hpp"
#include "nqa/silent_qa.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nqa {

namespace detail {

struct SourceLine {
    std::size_t number;  // 1-based
    std::string text;    // comment and trailing CR removed
};

struct RawBlock {
    std::size_t header_line = 1;
    std::vector<SourceLine> lines;
};

struct ParsedTransition {
    std::string letter;
    std::string weight;
    std::string src;
    std::string dst;
    std::size_t line;
    std::size_t weight_column;
};

struct ParsedBlock {
    std::size_t header_line = 1;
    std::vector<ParsedTransition> transitions;
    std::optional<std::vector<std::pair<std::string, std::size_t>>> finals;  // name, column
    std::size_t finals_line = 0;
};

inline std::vector<SourceLine> split_lines(std::string_view text) {
    std::vector<SourceLine> out;
    std::size_t number = 0, start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        out.push_back({number, std::move(line)});
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

inline bool is_blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

inline std::size_t skip_ws(const std::string& s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return i;
}

/// Reads a token up to whitespace or any of `stops`.
inline std::string read_token(const std::string& s, std::size_t& i, std::string_view stops) {
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && stops.find(s[i]) == std::string_view::npos) {
        if (s.compare(i, 2, "->") == 0 && stops.find('-') != std::string_view::npos) break;
        ++i;
    }
    return s.substr(start, i - start);
}

inline void expect(const SourceLine& l, std::size_t& i, std::string_view what) {
    i = skip_ws(l.text, i);
    if (l.text.compare(i, what.size(), what) != 0)
        throw ParseError("expected '" + std::string(what) + "'", l.number, i + 1);
    i += what.size();
}

inline ParsedBlock parse_block(const RawBlock& raw) {
    ParsedBlock out;
    out.header_line = raw.header_line;
    for (const auto& l : raw.lines) {
        if (is_blank(l.text)) continue;
        const std::string& s = l.text;
        std::size_t i = skip_ws(s, 0);
        if (s.compare(i, 6, "final:") == 0) {
            i += 6;
            if (!out.finals) {
                out.finals.emplace();
                out.finals_line = l.number;
            }
            while ((i = skip_ws(s, i)) < s.size()) {
                std::size_t col = i + 1;
                out.finals->emplace_back(read_token(s, i, ""), col);
            }
            continue;
        }
        ParsedTransition t;
        t.line = l.number;
        t.letter = read_token(s, i, ":,");
        if (t.letter.empty()) throw ParseError("expected a letter", l.number, i + 1);
        expect(l, i, ":");
        i = skip_ws(s, i);
        t.weight_column = i + 1;
        t.weight = read_token(s, i, ",");
        if (t.weight.empty()) throw ParseError("expected a weight", l.number, i + 1);
        expect(l, i, ",");
        i = skip_ws(s, i);
        t.src = read_token(s, i, ",:-");
        if (t.src.empty()) throw ParseError("expected a source state", l.number, i + 1);
        expect(l, i, "->");
        i = skip_ws(s, i);
        t.dst = read_token(s, i, ",:");
        if (t.dst.empty()) throw ParseError("expected a target state", l.number, i + 1);
        i = skip_ws(s, i);
        if (i != s.size()) throw ParseError("unexpected text after transition", l.number, i + 1);
        out.transitions.push_back(std::move(t));
    }
    if (out.transitions.empty()) throw ParseError("empty transition set", raw.header_line, 1);
    return out;
}

template <class W>
BasicAutomaton<W> assemble(const ParsedBlock& b, const Alphabet& alphabet,
                           const std::function<W(const ParsedTransition&)>& weight) {
    AutomatonBuilder<W> builder{alphabet};
    builder.set_initial(builder.state(b.transitions.front().src));
    for (const auto& t : b.transitions) {
        StateId s = builder.state(t.src);
        StateId d = builder.state(t.dst);
        builder.add_transition(s, alphabet.at(t.letter), d, weight(t));
    }
    if (b.finals) {
        for (const auto& [name, col] : *b.finals) {
            auto s = builder.find_state(name);
            if (!s) throw ParseError("unknown state '" + name + "' in final directive", b.finals_line, col);
            builder.set_final(*s);
        }
    } else {
        for (StateId s = 0; s < builder.num_states(); ++s) builder.set_final(s);
    }
    return builder.build();
}

template <class W>
W parse_weight_at(const ParsedTransition& t, const std::function<W(std::string_view)>& parse) {
    try {
        return parse(t.weight);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), t.line, t.weight_column);
    }
}

inline bool is_marker(const std::string& s) { return s[skip_ws(s, 0)] == '@'; }

template <class W>
BasicAutomaton<W> parse_flat(std::string_view text, const std::function<W(std::string_view)>& parse) {
    auto lines = split_lines(text);
    RawBlock raw;
    bool any = false;
    for (auto& l : lines) {
        if (is_blank(l.text)) continue;
        if (is_marker(l.text)) throw ParseError("block marker in a flat automaton file", l.number, 1);
        any = true;
        raw.lines.push_back(l);
    }
    if (!any) throw ParseError("empty file", 1, 1);
    raw.header_line = raw.lines.front().number;
    auto block = parse_block(raw);
    Alphabet alphabet;
    for (const auto& t : block.transitions) alphabet.add(t.letter);
    std::function<W(const ParsedTransition&)> weight = [&](const ParsedTransition& t) {
        return parse_weight_at<W>(t, parse);
    };
    return assemble<W>(block, alphabet, weight);
}

template <class W, class Fmt>
std::string serialize_flat(const BasicAutomaton<W>& a, Fmt&& fmt) {
    std::ostringstream out;
    for (const auto& t : a.transitions())
        out << a.alphabet().name(t.letter) << " : " << fmt(t.weight) << ", " << a.state_name(t.src) << " -> "
            << a.state_name(t.dst) << '\n';
    if (a.num_finals() != a.num_states()) {
        out << "final:";
        for (StateId s = 0; s < a.num_states(); ++s)
            if (a.is_final(s)) out << ' ' << a.state_name(s);
        out << '\n';
    }
    return out.str();
}

}  // namespace detail

inline Automaton parse_qa(std::string_view text) {
    return detail::parse_flat<Weight>(text, [](std::string_view s) {
        if (!s.empty() && s[0] == '_') throw std::invalid_argument("silent weight in a quantitative automaton");
        return Weight::parse(s);
    });
}

/// Flattening output: weights or the silent token.
inline SilentQA parse_silent_qa(std::string_view text) {
    return detail::parse_flat<FlatWeight>(text, [](std::string_view s) { return FlatWeight::parse(s); });
}

inline std::string serialize_qa(const Automaton& a) {
    return detail::serialize_flat(a, [](const Weight& w) { return w.str(); });
}

inline std::string serialize_silent_qa(const SilentQA& a) {
    return detail::serialize_flat(a, [](const FlatWeight& w) { return w.str(); });
}

inline NestedAutomaton parse_nqa(std::string_view text) {
    auto lines = detail::split_lines(text);
    std::optional<detail::RawBlock> parent;
    std::map<std::size_t, detail::RawBlock> children;
    detail::RawBlock* current = nullptr;
    bool any = false;
    for (const auto& l : lines) {
        if (detail::is_blank(l.text)) continue;
        any = true;
        std::size_t i = detail::skip_ws(l.text, 0);
        if (l.text[i] == '@') {
            std::string marker = detail::read_token(l.text, i, "");
            if (marker == "@PARENT") {
                if (parent) throw ParseError("duplicate @PARENT block", l.number, 1);
                parent.emplace();
                parent->header_line = l.number;
                current = &*parent;
            } else if (marker == "@CHILD") {
                i = detail::skip_ws(l.text, i);
                std::size_t col = i + 1;
                std::string idx = detail::read_token(l.text, i, "");
                std::size_t k = 0;
                if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos || (k = std::stoul(idx)) == 0)
                    throw ParseError("expected a positive child index", l.number, col);
                auto [it, fresh] = children.emplace(k, detail::RawBlock{});
                if (!fresh) throw ParseError("duplicate child index " + idx, l.number, col);
                it->second.header_line = l.number;
                current = &it->second;
            } else {
                throw ParseError("unknown block marker '" + marker + "'", l.number, 1);
            }
            if (detail::skip_ws(l.text, i) != l.text.size())
                throw ParseError("unexpected text after block marker", l.number, i + 1);
            continue;
        }
        if (!current) throw ParseError("transition outside of a block (missing @PARENT)", l.number, 1);
        current->lines.push_back(l);
    }
    if (!any) throw ParseError("empty file", 1, 1);
    if (!parent) throw ParseError("missing @PARENT block", 1, 1);
    std::size_t expected = 1;
    for (const auto& [k, b] : children) {
        if (k != expected) throw ParseError("child indices must form 1..k; missing @CHILD " + std::to_string(expected), b.header_line, 1);
        ++expected;
    }
    const std::size_t k = children.size();

    auto pblock = detail::parse_block(*parent);
    std::vector<detail::ParsedBlock> cblocks;
    for (const auto& [idx, b] : children) cblocks.push_back(detail::parse_block(b));
    Alphabet alphabet;
    for (const auto& t : pblock.transitions) alphabet.add(t.letter);
    for (const auto& b : cblocks)
        for (const auto& t : b.transitions) alphabet.add(t.letter);

    std::function<Weight(const detail::ParsedTransition&)> label = [&](const detail::ParsedTransition& t) {
        Weight w = detail::parse_weight_at<Weight>(t, [](std::string_view s) { return Weight::parse(s); });
        if (!w.is_integer() || w.sign() < 0) throw ParseError("label must be a non-negative integer", t.line, t.weight_column);
        if (w > Weight(static_cast<std::int64_t>(k)))
            throw ParseError("label " + w.str() + " references nonexistent child", t.line, t.weight_column);
        return w;
    };
    std::function<Weight(const detail::ParsedTransition&)> weight = [](const detail::ParsedTransition& t) {
        return detail::parse_weight_at<Weight>(t, [](std::string_view s) {
            if (!s.empty() && s[0] == '_') throw std::invalid_argument("silent weight in a child automaton");
            return Weight::parse(s);
        });
    };
    NestedAutomaton n;
    try {
        n.parent = detail::assemble<Weight>(pblock, alphabet, label);
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), pblock.header_line, 1);
    }
    for (const auto& b : cblocks) {
        try {
            n.children.push_back(detail::assemble<Weight>(b, alphabet, weight));
        } catch (const InvalidInput& e) {
            throw ParseError(e.what(), b.header_line, 1);
        }
    }
    n.declared_deterministic = is_deterministic(n);
    auto diags = validate_nqa(n);
    if (has_errors(diags)) throw ParseError(first_error(diags), pblock.header_line, 1);
    return n;
}

inline std::string serialize_nqa(const NestedAutomaton& n) {
    std::string out = "@PARENT\n" + serialize_qa(n.parent);
    for (std::size_t j = 0; j < n.num_children(); ++j)
        out += "@CHILD " + std::to_string(j + 1) + "\n" + serialize_qa(n.children[j]);
    return out;
}

}  // namespace nqa

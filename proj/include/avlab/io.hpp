#pragma once
// Plain-text fixtures. .bits: '0'/'1', whitespace ignored. .nat: decimals
// separated by whitespace. Bad sets: one word per line, letters separated by
// spaces, the empty word written '-'; blank lines and '#' comments skipped. Errors carry the 1-based line.

#include "bushy.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace avlab {

struct format_error : domain_error {
    std::string message;
    std::size_t line;
    format_error(const std::string& what, std::size_t at, const std::string& file = "")
        : domain_error((file.empty() ? "line " : file + ":") + std::to_string(at) + ": " + what), message(what), line(at) {}
};

inline Bits read_bits(std::istream& in) {
    Bits out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == '0' || c == '1') out.push_back(c);
            else if (!std::isspace(static_cast<unsigned char>(c)))
                throw format_error(std::string("unexpected '") + c + "' at column " + std::to_string(i + 1), line);
        }
    }
    return out;
}

namespace detail {

inline Nat parse_nat_token(const std::string& tok, std::size_t line) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw format_error("not a natural number: '" + tok + "'", line);
    return Nat(tok);
}

}  // namespace detail

inline Nats read_nats(std::istream& in) {
    Nats out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        std::istringstream ss(text);
        std::string tok;
        while (ss >> tok) out.push_back(detail::parse_nat_token(tok, line));
    }
    return out;
}

// Words must satisfy the alphabet bound h.
inline BadSet read_bad_set(std::istream& in, const BoundFamily& h) {
    std::set<Nats> words;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
        std::istringstream ss(text);
        std::string tok;
        Nats w;
        bool empty_word = false;
        while (ss >> tok) {
            if (tok == "-" && w.empty() && !empty_word) empty_word = true;
            else if (empty_word) throw format_error("'-' must stand alone", line);
            else w.push_back(detail::parse_nat_token(tok, line));
        }
        if (w.empty() && !empty_word) continue;
        if (!in_bounds(w, h)) throw format_error("word " + show(w) + " outside the alphabet bound", line);
        words.insert(std::move(w));
    }
    return BadSet(std::move(words), h);
}

inline void write_bits(std::ostream& out, const Bits& b, std::size_t width = 64) {
    for (std::size_t i = 0; i < b.size(); i += width) out << b.substr(i, width) << '\n';
}

inline void write_nats(std::ostream& out, const Nats& v) {
    for (auto& x : v) out << x << '\n';
}

inline void write_bad_set(std::ostream& out, const BadSet& B) {
    for (auto& w : B.strings) {
        if (w.empty()) out << '-';
        for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
        out << '\n';
    }
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

template <class F>
auto read_file(const std::string& path, F reader) {
    auto in = open_input(path);
    try {
        return reader(in);
    } catch (const format_error& e) {
        throw format_error(e.message, e.line, path);
    }
}

}  // namespace avlab

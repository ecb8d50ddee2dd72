#pragma once

// Symbols, alphabets, words and the canonical length-then-lexicographic word order.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hardattn/errors.hpp"

namespace hardattn {

using Symbol = std::string;
using Word = std::vector<Symbol>;

enum class OutputPosition { first, last };

inline std::string_view to_string(OutputPosition p) { return p == OutputPosition::first ? "first" : "last"; }

inline OutputPosition parse_output_position(std::string_view s) {
    if (s == "first") return OutputPosition::first;
    if (s == "last") return OutputPosition::last;
    throw ParseError("output position must be 'first' or 'last', got '" + std::string(s) + "'");
}

/// Ordered, duplicate-free symbol list. Declaration order is the enumeration order.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
        for (std::size_t k = 0; k < symbols_.size(); ++k) {
            if (symbols_[k].empty()) throw ParseError("empty symbol in alphabet");
            for (std::size_t l = 0; l < k; ++l)
                if (symbols_[l] == symbols_[k]) throw ParseError("duplicate symbol '" + symbols_[k] + "' in alphabet");
        }
    }

    [[nodiscard]] std::size_t size() const { return symbols_.size(); }
    [[nodiscard]] const Symbol& operator[](std::size_t k) const { return symbols_[k]; }
    [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view s) const {
        for (std::size_t k = 0; k < symbols_.size(); ++k)
            if (symbols_[k] == s) return k;
        return std::nullopt;
    }
    [[nodiscard]] bool contains(std::string_view s) const { return index_of(s).has_value(); }

    /// Symbol indices of a nonempty word over this alphabet.
    [[nodiscard]] std::vector<std::size_t> encode(const Word& w) const {
        if (w.empty()) throw WordError("empty word");
        std::vector<std::size_t> out;
        out.reserve(w.size());
        for (const auto& s : w) {
            auto k = index_of(s);
            if (!k) throw WordError("symbol '" + s + "' is not in the alphabet");
            out.push_back(*k);
        }
        return out;
    }

    /// Same symbols, ignoring order.
    [[nodiscard]] bool same_symbols(const Alphabet& other) const {
        if (size() != other.size()) return false;
        return std::all_of(symbols_.begin(), symbols_.end(), [&](const Symbol& s) { return other.contains(s); });
    }

    friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
    std::vector<Symbol> symbols_;
};

/// Splits on whitespace if there is any; otherwise tokenizes by longest alphabet match.
inline Word parse_word(std::string_view text, const Alphabet& alphabet) {
    Word w;
    if (std::any_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
        std::size_t k = 0;
        while (k < text.size()) {
            while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            std::size_t start = k;
            while (k < text.size() && !std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            if (k > start) w.emplace_back(text.substr(start, k - start));
        }
        return w;
    }
    std::size_t k = 0;
    while (k < text.size()) {
        std::size_t best = 0;
        for (const auto& s : alphabet.symbols())
            if (s.size() > best && text.substr(k, s.size()) == s) best = s.size();
        if (best == 0) throw WordError("cannot tokenize word at offset " + std::to_string(k) + ": '" +
                                       std::string(text.substr(k)) + "'");
        w.emplace_back(text.substr(k, best));
        k += best;
    }
    return w;
}

/// Concatenates symbols; separates with spaces unless every symbol is one character.
inline std::string format_word(const Word& w) {
    bool compact = std::all_of(w.begin(), w.end(), [](const Symbol& s) { return s.size() == 1; });
    std::string out;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!compact && k) out += ' ';
        out += w[k];
    }
    return out;
}

/// Enumerates all words of length 1..max_len in length-then-lexicographic order over the
/// alphabet's declaration order.
class WordEnumerator {
public:
    WordEnumerator(const Alphabet& alphabet, std::size_t max_len) : alphabet_(&alphabet), max_len_(max_len) {
        if (alphabet.size() > 0 && max_len > 0) digits_.assign(1, 0);
    }

    [[nodiscard]] bool done() const { return digits_.empty(); }
    [[nodiscard]] const std::vector<std::size_t>& indices() const { return digits_; }

    [[nodiscard]] Word word() const {
        Word w;
        w.reserve(digits_.size());
        for (auto d : digits_) w.push_back((*alphabet_)[d]);
        return w;
    }

    void next() {
        const std::size_t base = alphabet_->size();
        std::size_t k = digits_.size();
        while (k > 0) {
            --k;
            if (++digits_[k] < base) return;
            digits_[k] = 0;
        }
        if (digits_.size() >= max_len_) {
            digits_.clear();
        } else {
            digits_.assign(digits_.size() + 1, 0);
        }
    }

private:
    const Alphabet* alphabet_;
    std::size_t max_len_;
    std::vector<std::size_t> digits_;
};

/// The k-th word (0-based) of the enumeration order, computed directly.
inline Word nth_word(const Alphabet& alphabet, std::uint64_t k) {
    const std::uint64_t base = alphabet.size();
    std::size_t len = 1;
    std::uint64_t block = base;
    while (k >= block) {
        k -= block;
        ++len;
        block *= base;
    }
    Word w(len);
    for (std::size_t p = len; p-- > 0;) {
        w[p] = alphabet[k % base];
        k /= base;
    }
    return w;
}

/// Number of words of length 1..max_len.
inline std::uint64_t count_words(std::size_t alphabet_size, std::size_t max_len) {
    std::uint64_t total = 0, block = 1;
    for (std::size_t l = 1; l <= max_len; ++l) {
        block *= alphabet_size;
        total += block;
    }
    return total;
}

/// Strict length-then-lexicographic comparison of two words over `alphabet`.
inline bool word_less(const Alphabet& alphabet, const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t k = 0; k < a.size(); ++k) {
        auto x = alphabet.index_of(a[k]).value_or(0), y = alphabet.index_of(b[k]).value_or(0);
        if (x != y) return x < y;
    }
    return false;
}

}  // namespace hardattn

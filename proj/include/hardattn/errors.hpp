#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hardattn {

/// Width mismatch between vectors, maps or layers.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed model text. Line and column are 1-based; 0 means unknown.
struct ParseError : std::runtime_error {
    std::size_t line;
    std::size_t column;
    ParseError(const std::string& msg, std::size_t l = 0, std::size_t c = 0)
        : std::runtime_error(l == 0 ? msg
                                    : "line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
          line(l), column(c) {}
};

/// A name is used before (or without) being defined, or a position variable is used where it is not allowed.
struct ScopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad input word: empty, or containing a symbol outside the alphabet.
struct WordError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A construct the translator does not support.
struct TranslationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two acceptors compared over different alphabets.
struct AlphabetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A reachable value set grew past its cap.
struct BlowUpError : std::runtime_error {
    std::size_t layer;
    BlowUpError(const std::string& msg, std::size_t l) : std::runtime_error(msg), layer(l) {}
};

}  // namespace hardattn

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "hardattn/errors.hpp"

namespace hardattn {

/// Attention mask: every position, strictly earlier positions (j < i), or strictly later positions (j > i).
enum class Mask { none, future, past };

/// Whether position j is visible from position i.
constexpr bool unmasked(Mask m, std::size_t i, std::size_t j) {
    switch (m) {
        case Mask::none: return true;
        case Mask::future: return j < i;
        case Mask::past: return j > i;
    }
    return false;
}

/// Model-file spelling: "none", "future", "past".
inline std::string_view to_string(Mask m) {
    switch (m) {
        case Mask::none: return "none";
        case Mask::future: return "future";
        case Mask::past: return "past";
    }
    return "none";
}

inline Mask parse_mask(std::string_view s) {
    if (s == "none") return Mask::none;
    if (s == "future") return Mask::future;
    if (s == "past") return Mask::past;
    throw ParseError("mask must be none, future or past, got '" + std::string(s) + "'");
}

}  // namespace hardattn

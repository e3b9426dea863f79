#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace azsc {

/// Minimum single-character insertions, deletions and substitutions turning
/// a into b. Operates on Unicode scalar values.
size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Levenshtein plus unit-cost adjacent transposition (optimal string
/// alignment: no substring is edited twice).
size_t damerau_levenshtein(std::u32string_view a, std::u32string_view b);

// UTF-8 conveniences; invalid input raises InputError.
size_t levenshtein_utf8(std::string_view a, std::string_view b);
size_t damerau_levenshtein_utf8(std::string_view a, std::string_view b);

} // namespace azsc

#pragma once

#include <string>
#include <string_view>

namespace azsc::utf8 {

/// Strict UTF-8 decode to Unicode scalar values. Rejects overlong forms,
/// surrogates, values above U+10FFFF and truncated sequences.
/// `what` names the input in the error message.
std::u32string decode(std::string_view bytes, std::string_view what = "input");

std::string encode(std::u32string_view text);
std::string encode(char32_t c);

bool is_valid(std::string_view bytes);

} // namespace azsc::utf8

#include "azsc/utf8.hpp"

#include "azsc/errors.hpp"

#include <cstdint>

namespace azsc::utf8 {

namespace {

[[noreturn]] void bad(std::string_view what, size_t pos) {
    throw InputError("invalid UTF-8 in " + std::string(what) + " at byte " + std::to_string(pos));
}

} // namespace

std::u32string decode(std::string_view bytes, std::string_view what) {
    std::u32string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        uint32_t cp = 0;
        size_t extra = 0;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            extra = 1;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            extra = 2;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            extra = 3;
        } else {
            bad(what, i);
        }
        for (size_t k = 1; k <= extra; ++k) {
            if (i + k >= bytes.size()) bad(what, i);
            const auto bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) bad(what, i);
            cp = (cp << 6) | (bk & 0x3F);
        }
        // overlong forms
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000)) {
            bad(what, i);
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) bad(what, i);
        out.push_back(static_cast<char32_t>(cp));
        i += extra + 1;
    }
    return out;
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) out += encode(c);
    return out;
}

std::string encode(char32_t c) {
    const auto cp = static_cast<uint32_t>(c);
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

bool is_valid(std::string_view bytes) {
    try {
        decode(bytes);
        return true;
    } catch (const InputError&) {
        return false;
    }
}

} // namespace azsc::utf8

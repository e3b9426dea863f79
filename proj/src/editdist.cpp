#include "azsc/editdist.hpp"

#include "azsc/utf8.hpp"

#include <algorithm>
#include <vector>

namespace azsc {

size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    const size_t m = a.size(), n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;

    std::vector<size_t> prev(n + 1), cur(n + 1);
    for (size_t j = 0; j <= n; ++j) prev[j] = j;
    for (size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= n; ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

size_t damerau_levenshtein(std::u32string_view a, std::u32string_view b) {
    const size_t m = a.size(), n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;

    // three rolling rows: i-2, i-1, i
    std::vector<size_t> r0(n + 1), r1(n + 1), r2(n + 1);
    for (size_t j = 0; j <= n; ++j) r1[j] = j;
    for (size_t i = 1; i <= m; ++i) {
        r2[0] = i;
        for (size_t j = 1; j <= n; ++j) {
            const size_t sub = r1[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            size_t best = std::min({r1[j] + 1, r2[j - 1] + 1, sub});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
                best = std::min(best, r0[j - 2] + 1);
            }
            r2[j] = best;
        }
        std::swap(r0, r1);
        std::swap(r1, r2);
    }
    return r1[n];
}

size_t levenshtein_utf8(std::string_view a, std::string_view b) {
    return levenshtein(utf8::decode(a, "first string"), utf8::decode(b, "second string"));
}

size_t damerau_levenshtein_utf8(std::string_view a, std::string_view b) {
    return damerau_levenshtein(utf8::decode(a, "first string"), utf8::decode(b, "second string"));
}

} // namespace azsc

#include "azsc/errors.hpp"
#include "azsc/rng.hpp"
#include "azsc/textcodec.hpp"

#include "doctest.h"

#include <string>
#include <vector>

using namespace azsc;

TEST_CASE("vocab assigns markers then first-appearance ids") {
    Vocab v = Vocab::build({U"ab"});
    CHECK(v.size() == 5); // pad, <, >, a, b
    CHECK(v.start_id() == 1);
    CHECK(v.end_id() == 2);
    CHECK(v.id_of(U'<') == 1);
    CHECK(v.id_of(U'>') == 2);
    CHECK(v.id_of(U'a') == 3);
    CHECK(v.id_of(U'b') == 4);
    CHECK(v.char_of(3) == U'a');

    Vocab order = Vocab::build({U"ba", U"ab"});
    CHECK(order.id_of(U'b') == 3);
    CHECK(order.id_of(U'a') == 4);
}

TEST_CASE("markers in the corpus do not get duplicate ids") {
    Vocab v = Vocab::build({U"a<b>"});
    CHECK(v.size() == 5);
    CHECK(v.id_of(U'<') == 1);
    CHECK(v.id_of(U'>') == 2);
}

TEST_CASE("a corpus with 96 distinct letters yields a 99-entry vocab") {
    // 96 + markers + pad = 99 ids
    std::u32string letters;
    for (char32_t c = 0x100; c < 0x160; ++c) letters.push_back(c);
    REQUIRE(letters.size() == 96);
    Vocab v = Vocab::build({letters});
    CHECK(v.size() == 99);
}

TEST_CASE("vocab over a corpus equals vocab over its concatenation") {
    std::vector<std::u32string> corpus{U"salam", U"dünya", U"mən"};
    std::u32string joined;
    for (const auto& s : corpus) joined += s;
    Vocab split = Vocab::build(corpus);
    Vocab whole = Vocab::build({joined});
    CHECK(split.size() == whole.size());
    for (const auto& [id, c] : split.entries()) CHECK(whole.contains(c));
}

TEST_CASE("vocab rejects bad input") {
    CHECK_THROWS_WITH_AS(Vocab::build({}), "empty corpus", InputError);
    CHECK_THROWS_AS(Vocab::build({std::u32string(1, U'\0')}), InputError);
    Vocab v = Vocab::build({U"ab"});
    CHECK_THROWS_WITH_AS(v.id_of(U'z'), "unknown character 'z'", VocabError);
    CHECK_THROWS_WITH_AS(v.char_of(42), "unknown id 42", VocabError);
    CHECK_FALSE(v.contains(U'z'));
}

TEST_CASE("from_entries round trips and validates") {
    Vocab v = Vocab::build({U"ba", U"ab"});
    Vocab back = Vocab::from_entries(v.entries());
    CHECK(back.size() == v.size());
    for (const auto& [id, c] : v.entries()) {
        CHECK(back.id_of(c) == id);
        CHECK(back.char_of(id) == c);
    }

    using E = std::vector<std::pair<int, char32_t>>;
    CHECK_THROWS_AS(Vocab::from_entries(E{{1, U'<'}, {3, U'>'}}), InputError); // gap
    CHECK_THROWS_AS(Vocab::from_entries(E{{1, U'<'}, {2, U'>'}, {3, U'<'}}), InputError);
    CHECK_THROWS_AS(Vocab::from_entries(E{{1, U'<'}, {2, U'>'}, {2, U'a'}}), InputError);
    CHECK_THROWS_AS(Vocab::from_entries(E{{1, U'a'}, {2, U'b'}}), InputError); // no markers
    CHECK_THROWS_AS(Vocab::from_entries(E{{1, U'<'}, {2, U'>'}, {3, U'\0'}}), InputError);
}

TEST_CASE("encode wraps pads and pre-truncates") {
    Vocab v = Vocab::build({U"ab"});
    CHECK(encode(U"ab", v, 6).ids == std::vector<int>{1, 3, 4, 2, 0, 0});
    CHECK(encode(U"ab", v, 6).source_len == 4);
    // over-long input loses its head, keeping the tail and end marker
    CHECK(encode(U"ab", v, 3).ids == std::vector<int>{3, 4, 2});
    CHECK(encode(U"", v, 4).ids == std::vector<int>{1, 2, 0, 0});
    CHECK(encode(U"aaaa", v, 4).ids == std::vector<int>{3, 3, 3, 2});
}

TEST_CASE("encode output length is always max_len") {
    Vocab v = Vocab::build({U"abc"});
    Rng rng(8);
    const std::u32string alphabet = U"abc";
    for (int i = 0; i < 200; ++i) {
        std::u32string s;
        const size_t n = rng.uniform_index(12);
        for (size_t j = 0; j < n; ++j) s.push_back(alphabet[rng.uniform_index(3)]);
        const size_t max_len = 2 + rng.uniform_index(9);
        EncodedSentence e = encode(s, v, max_len);
        CHECK(e.ids.size() == max_len);
        CHECK(e.source_len <= max_len);
    }
}

TEST_CASE("encode errors name the character and position") {
    Vocab v = Vocab::build({U"ab"});
    CHECK_THROWS_WITH_AS(encode(U"axb", v, 8), "unknown character 'x' at position 1", VocabError);
    CHECK_THROWS_AS(encode(U"ab", v, 1), std::invalid_argument);
}

TEST_CASE("decode strips markers and padding") {
    Vocab v = Vocab::build({U"ab"});
    CHECK(decode(std::vector<int>{1, 3, 4, 2, 0, 0}, v) == U"ab");
    CHECK(decode(std::vector<int>{3, 4, 2}, v) == U"ab"); // missing start tolerated
    CHECK(decode(std::vector<int>{1, 2}, v) == U"");
    // everything after the first end marker is dropped
    CHECK(decode(std::vector<int>{1, 3, 2, 4, 4}, v) == U"a");
    CHECK_THROWS_AS(decode(std::vector<int>{1, 42, 2}, v), VocabError);
}

TEST_CASE("round trip holds whenever the text fits") {
    Vocab v = Vocab::build({U"salam dünya"});
    Rng rng(31);
    const std::u32string alphabet = U"salm düny";
    for (int i = 0; i < 300; ++i) {
        std::u32string s;
        const size_t n = rng.uniform_index(10);
        for (size_t j = 0; j < n; ++j) s.push_back(alphabet[rng.uniform_index(alphabet.size())]);
        if (s.size() + 2 > 12) continue;
        EncodedSentence e = encode(s, v, 12);
        CHECK(decode(e.ids, v) == s);
    }
}

TEST_CASE("split and join words") {
    CHECK(split_words(U"  salam   dünya ") ==
          std::vector<std::u32string>{U"salam", U"dünya"});
    CHECK(split_words(U"") == std::vector<std::u32string>{});
    CHECK(split_words(U" \t\n ") == std::vector<std::u32string>{});
    CHECK(split_words(U"tek") == std::vector<std::u32string>{U"tek"});
    CHECK(join_words({U"a", U"b", U"c"}) == U"a b c");
    CHECK(join_words({}) == U"");
    CHECK(join_words(split_words(U"a  b\tc")) == U"a b c");
}

TEST_CASE("is_space covers the separators the corpus formats use") {
    CHECK(is_space(U' '));
    CHECK(is_space(U'\t'));
    CHECK(is_space(U'\n'));
    CHECK(is_space(U'\r'));
    CHECK_FALSE(is_space(U'a'));
    CHECK_FALSE(is_space(U'ə'));
}

#include "azsc/io.hpp"

#include "azsc/errors.hpp"
#include "azsc/utf8.hpp"

#include <fstream>
#include <sstream>

namespace azsc {

namespace {

// Calls fn(line, line_no) for every line, trailing '\r' stripped.
template <class Fn>
void for_lines(std::string_view text, Fn&& fn) {
    size_t pos = 0;
    size_t line_no = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
    }
}

bool blank(std::string_view line) {
    for (char c : line)
        if (c != ' ' && c != '\t') return false;
    return true;
}

} // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw InputError("cannot read '" + path + "'");
    return std::move(buf).str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw InputError("cannot write '" + path + "'");
}

std::vector<std::u32string> read_corpus(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::u32string> lines;
    for_lines(text, [&](std::string_view line, size_t line_no) {
        if (blank(line)) return;
        lines.push_back(utf8::decode(line, "'" + path + "' line " + std::to_string(line_no)));
    });
    return lines;
}

std::vector<SentencePair> parse_pairs_tsv(std::string_view text, const std::string& what) {
    std::vector<SentencePair> pairs;
    for_lines(text, [&](std::string_view line, size_t line_no) {
        if (blank(line)) return;
        std::string where = what + " line " + std::to_string(line_no);
        size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw InputError(where + ": expected wrong<TAB>correct");
        std::string_view wrong = line.substr(0, tab);
        std::string_view correct = line.substr(tab + 1);
        if (correct.find('\t') != std::string_view::npos)
            throw InputError(where + ": more than two fields");
        if (wrong.empty() || correct.empty())
            throw InputError(where + ": empty field");
        pairs.push_back({utf8::decode(wrong, where), utf8::decode(correct, where)});
    });
    return pairs;
}

std::vector<SentencePair> read_pairs_tsv(const std::string& path) {
    return parse_pairs_tsv(read_file(path), "'" + path + "'");
}

void write_pairs_tsv(const std::string& path, const std::vector<SentencePair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += utf8::encode(p.wrong);
        out.push_back('\t');
        out += utf8::encode(p.correct);
        out.push_back('\n');
    }
    write_file(path, out);
}

} // namespace azsc

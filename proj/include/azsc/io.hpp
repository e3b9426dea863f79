#pragma once

#include "azsc/corruptor.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace azsc {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

/// Decoded non-blank lines of a UTF-8 text file.
std::vector<std::u32string> read_corpus(const std::string& path);

/// TSV with one `wrong<TAB>correct` record per line.
std::vector<SentencePair> parse_pairs_tsv(std::string_view text, const std::string& what);
std::vector<SentencePair> read_pairs_tsv(const std::string& path);
void write_pairs_tsv(const std::string& path, const std::vector<SentencePair>& pairs);

} // namespace azsc

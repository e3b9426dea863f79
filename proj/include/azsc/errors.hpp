#pragma once

#include <stdexcept>
#include <string>

namespace azsc {

// Error taxonomy mirrors the CLI exit-code contract:
// InputError -> 2, NumericError -> 3, VocabError -> 4.

class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class VocabError : public std::runtime_error {
public:
    explicit VocabError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace azsc

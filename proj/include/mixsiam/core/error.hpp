#pragma once

#include <stdexcept>
#include <string>

namespace mixsiam {

// Shape or dimension disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration value; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file; carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// NaN/Inf encountered in a loss or gradient.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's contract (e.g. passed a gradient-carrying target).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mixsiam

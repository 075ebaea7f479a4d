#pragma once

#include <stdexcept>
#include <string>

namespace ksw {

// Bad user input: config files, potential strings, malformed graph specs.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure in the potential DSL, with the byte offset of the offending token.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ConfigError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// The potential violates a standing hypothesis (degenerate critical point,
// unequal well depths, disconnected graph, ...).  Reported, never repaired.
class HypothesisError : public std::runtime_error {
public:
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: iteration caps, overflow guards, rank deficiency.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ksw

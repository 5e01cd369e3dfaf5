#pragma once

#include <stdexcept>
#include <string>

namespace courtside {

/// Invalid configuration or format parameters.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A transition or query was attempted on a completed match.
class TerminalStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Sequence gap or regression on a feed topic.
class OrderingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed schema or limit validation.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when not line oriented.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Transport or remote failure of a model provider. Non-fatal to callers.
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProviderTimeout : public ProviderError {
public:
    using ProviderError::ProviderError;
};

} // namespace courtside

#pragma once

#include <stdexcept>
#include <string>

namespace vlx {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameters, malformed model files, bad seeds. CLI exit 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

// Input ended in the middle of an extraction. CLI exit 3.
class StreamExhausted : public Error {
public:
    explicit StreamExhausted(const std::string& what) : Error("stream: " + what) {}
};

// Enumeration budget, length cap, or threshold violations. CLI exit 4.
class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& what) : Error("budget: " + what) {}
};

// Mathematically undefined request (e.g. divergence with zero-probability
// reference mass).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain: " + what) {}
};

} // namespace vlx

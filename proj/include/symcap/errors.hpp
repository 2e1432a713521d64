#pragma once
#include <stdexcept>
#include <string>

namespace symcap {

/// Numerical failure inside a pipeline (maps to CLI exit code 1).
class ComputationError : public std::runtime_error {
public:
    ComputationError(const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(module) {}
    const std::string& module() const { return module_; }
private:
    std::string module_;
};

/// A documented precondition or hypothesis does not hold (exit code 3).
class HypothesisError : public std::runtime_error {
public:
    HypothesisError(const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(module) {}
    const std::string& module() const { return module_; }
private:
    std::string module_;
};

/// Malformed input specification (exit code 2 when raised while parsing arguments).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace symcap

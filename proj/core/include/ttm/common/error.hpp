#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ttm {

/// Input violates a documented invariant. Carries the names of every violated
/// invariant so callers (CLI, service) can report them structurally.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string invariant, const std::string& message)
        : std::invalid_argument(invariant + ": " + message), violations_{std::move(invariant)} {}

    ValidationError(std::vector<std::string> invariants, const std::string& message)
        : std::invalid_argument(message), violations_(std::move(invariants)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Failure while executing a valid request (I/O, divergence, degenerate data).
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accumulates invariant violations and throws them together.
class ViolationList {
public:
    void check(bool ok, std::string invariant) {
        if (!ok) names_.push_back(std::move(invariant));
    }
    void add(std::string invariant) { names_.push_back(std::move(invariant)); }
    bool empty() const noexcept { return names_.empty(); }

    void throw_if_any(const std::string& context) const {
        if (names_.empty()) return;
        std::string message = context + " violates:";
        for (const auto& n : names_) message += " " + n;
        throw ValidationError(names_, message);
    }

private:
    std::vector<std::string> names_;
};

}  // namespace ttm

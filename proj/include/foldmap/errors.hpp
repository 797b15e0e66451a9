#pragma once

#include <stdexcept>
#include <string>

namespace foldmap {

// Invalid or out-of-contract input (bad shape, parameter outside the
// polytope, mismatched depths, ...).  CLI maps this to exit code 2.
class ConstraintError : public std::invalid_argument {
public:
    explicit ConstraintError(const std::string& what) : std::invalid_argument(what) {}
};

// Numeric failure (solver did not converge, orbit did not close, ...).
// CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A symbolic comparison genuinely needs more kneading depth than is stored
// or derivable from period flags.  Never silently guessed.
class UndecidableError : public std::runtime_error {
public:
    explicit UndecidableError(const std::string& what) : std::runtime_error(what) {}
};

// A configured resource budget (e.g. lap-propagation piece count) was hit.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace foldmap

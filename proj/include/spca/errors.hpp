#pragma once

#include <stdexcept>
#include <string>

namespace spca {

/// Invalid input: bad dimensions, violated preconditions, unreadable files.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: non-finite iterates, failed factorizations.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Every variable was eliminated by the diagonal threshold; no problem left.
class EmptyProblemError : public InputError {
public:
    explicit EmptyProblemError(const std::string& what) : InputError(what) {}
};

} // namespace spca

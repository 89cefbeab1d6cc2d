#pragma once

#include <stdexcept>
#include <string>

namespace gfc {

// Base class for all library errors. Every message names the violated
// precondition or the condition that failed.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of an operation (t <= 0, x < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Gamma evaluated at a nonpositive integer.
class PoleError : public Error {
public:
    using Error::Error;
};

// Result exceeds the representable double range.
class OverflowError : public Error {
public:
    using Error::Error;
};

// A series hit its term cap before the stopping rule fired.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A term budget (max_terms) would be exceeded.
class BudgetError : public Error {
public:
    using Error::Error;
};

// Kernel specification violates a parameter range.
class SpecError : public Error {
public:
    using Error::Error;
};

// Degenerate input to the associate-kernel solver (a0 = 0).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Valid request the implementation refuses to approximate
// (e.g. incommensurable multi-term orders).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Expression tree exceeded the depth or node budget.
class DepthError : public Error {
public:
    using Error::Error;
};

// A derivative value at t = 0 does not exist or cannot be stabilised.
class SingularAtZeroError : public Error {
public:
    using Error::Error;
};

// A verification theorem was requested outside its hypotheses.
class HypothesisError : public Error {
public:
    using Error::Error;
};

}  // namespace gfc

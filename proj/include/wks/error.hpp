#pragma once

#include <stdexcept>
#include <string>

namespace wks {

// Bad input: out-of-range dimension, non-positive rate, malformed vector.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A lemma check was asked to run on inputs outside its hypothesis
// (typically a non-monotone probability vector).
class HypothesisViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Something that cannot happen did: singular level system, broken
// simulator invariant, failed potential audit.
class InternalConsistency : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Gauss-Seidel did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw InvalidArgument(what);
}

} // namespace detail
} // namespace wks

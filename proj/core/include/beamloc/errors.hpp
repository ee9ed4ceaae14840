#pragma once

#include <stdexcept>
#include <string>

namespace beamloc {

// Malformed arguments: dimension mismatches, out-of-range indices, bad configs.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, singular denominators, non-finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two retained eigenvalues coincide, so eigenvector derivatives are undefined.
class DegenerateSpectrumError : public NumericError {
public:
    DegenerateSpectrumError(int mode_a, int mode_b, const std::string& what)
        : NumericError(what), mode_a_(mode_a), mode_b_(mode_b) {}

    int mode_a() const noexcept { return mode_a_; }
    int mode_b() const noexcept { return mode_b_; }

private:
    int mode_a_;
    int mode_b_;
};

// Dempster combination with conflict K -> 1.
class TotalConflictError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace beamloc

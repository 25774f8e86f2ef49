#pragma once

#include <stdexcept>
#include <string>

namespace hdgvl {

/// Invalid user-supplied parameter (level out of range, wrong vector size, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Gram-Schmidt breakdown while orthonormalizing on a degenerate element.
class NumericalDegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotSpdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double final_residual)
        : std::runtime_error(what), final_residual_(final_residual) {}

    double final_residual() const noexcept { return final_residual_; }

private:
    double final_residual_;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace hdgvl

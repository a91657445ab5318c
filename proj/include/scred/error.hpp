#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace scred {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Netlist, schema or structural problems. Carries every problem found.
class NetlistError : public Error {
public:
    explicit NetlistError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Requested combination is not supported (wrong basis kind, arity, complex input, ...).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular matrices, solver non-convergence, root finding.
class NumericError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public NumericError {
public:
    SingularMatrixError(const std::string& what, double condition)
        : NumericError(what), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : NumericError(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// A reduction method's own applicability condition failed.
class ValidityError : public Error {
public:
    using Error::Error;
};

/// Local-basis validity failure. o0, o1 are the projected observable eigenvalues.
class ReductionValidityError : public ValidityError {
public:
    ReductionValidityError(const std::string& what, double o0, double o1)
        : ValidityError(what), o0_(o0), o1_(o1) {}
    double o0() const { return o0_; }
    double o1() const { return o1_; }

private:
    double o0_, o1_;
};

}  // namespace scred

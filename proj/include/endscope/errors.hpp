#pragma once

#include <stdexcept>
#include <string>

namespace endscope {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation outside a profile's domain, or a positivity violation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Operation requested on the wrong kind of end (e.g. mean curvature of an
// abstract warped product without an immersion model).
class KindError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class MaxDepthExceeded : public QuadratureError {
public:
    MaxDepthExceeded(double partial_value, double error_estimate)
        : QuadratureError("adaptive quadrature exceeded its maximum depth"),
          partial_value(partial_value), error_estimate(error_estimate) {}

    double partial_value;
    double error_estimate;
};

class NonFiniteSample : public QuadratureError {
public:
    explicit NonFiniteSample(double t)
        : QuadratureError("integrand returned a non-finite value at t = " + std::to_string(t)),
          t(t) {}

    double t;
};

// improper_value called on a tail that is not known to converge, or whose
// value could not be pinned down within the truncation cap.
class VerdictError : public Error {
public:
    using Error::Error;
};

// Singular linear systems, eigen-iterations that fail to converge.
class SolverError : public Error {
public:
    using Error::Error;
};

// A computed quantity contradicts a mathematical invariant (maximum
// principle, monotone exhaustion).  Signals a bug, never a verdict.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = -1, int column = -1)
        : Error(line >= 0 ? "line " + std::to_string(line + 1) + ", column " +
                                std::to_string(column + 1) + ": " + what
                          : what),
          line(line), column(column) {}

    int line;
    int column;
};

}  // namespace endscope

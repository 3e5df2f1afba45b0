#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace csmooth {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user input: domain violations, malformed data or config.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Cholesky factorization failed even after exhausting the jitter ladder.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// The constraint system admits no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Iteration limit reached or an optimality certificate could not be met.
/// Carries the best iterate seen and its residuals.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(what) {}
    SolverError(const std::string& what, std::vector<double> best_iterate,
                double primal_residual, double stationarity_residual)
        : Error(what),
          best_iterate(std::move(best_iterate)),
          primal_residual(primal_residual),
          stationarity_residual(stationarity_residual) {}

    std::vector<double> best_iterate;
    double primal_residual = 0.0;
    double stationarity_residual = 0.0;
};

/// Rejection sampler ran out of attempts before collecting enough draws.
class LowAcceptanceError : public Error {
public:
    LowAcceptanceError(const std::string& what, double rate, long attempted, long accepted)
        : Error(what), acceptance_rate(rate), attempted(attempted), accepted(accepted) {}

    double acceptance_rate = 0.0;
    long attempted = 0;
    long accepted = 0;
};

}  // namespace csmooth

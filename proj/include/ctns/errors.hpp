#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctns {

/// Base for every failure raised by a time step or linear solve.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CflViolation : public SolverError {
public:
    CflViolation(double number, double limit)
        : SolverError("CFL number " + std::to_string(number) + " exceeds limit " + std::to_string(limit)),
          number_(number), limit_(limit) {}
    double number() const { return number_; }
    double limit() const { return limit_; }

private:
    double number_;
    double limit_;
};

class LinearSolveFailure : public SolverError {
public:
    LinearSolveFailure(const std::string& what, int iterations, double residual)
        : SolverError(what + ": no convergence after " + std::to_string(iterations) +
                      " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

class NegativeDensity : public SolverError {
public:
    explicit NegativeDensity(double min_value)
        : SolverError("density dropped to " + std::to_string(min_value)), min_value_(min_value) {}
    double min_value() const { return min_value_; }

private:
    double min_value_;
};

/// Online invariant failed during a run; carries the step index.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(std::size_t step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SupportMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace ctns

#pragma once

#include <stdexcept>
#include <string>

namespace dqtrack {

// Thrown when a caller violates a documented precondition (non-unit pose,
// wrong argument type, state outside the admissible set).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for out-of-range parameters (non-positive gains, empty trajectory).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Integration produced a non-finite state.
struct SimulationDiverged : std::runtime_error {
    SimulationDiverged(std::size_t step, const std::string& what)
        : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what),
          step_index(step) {}
    std::size_t step_index;
};

// The safety QP has no feasible point inside the input set.  Carries the
// best constraint value achievable over the box so the caller can clamp.
struct QpInfeasible : std::runtime_error {
    QpInfeasible(double best, double required)
        : std::runtime_error("safety QP infeasible: best achievable " +
                             std::to_string(best) + " < required " + std::to_string(required)),
          best_achievable(best), required_rhs(required) {}
    double best_achievable;
    double required_rhs;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dqtrack

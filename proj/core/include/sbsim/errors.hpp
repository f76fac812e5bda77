// Exception types shared by the numerical modules
//
// Argument/contract violations use std::invalid_argument. Numerical failures
// derive from NumericalError so the CLI can map them to a distinct exit code.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbsim {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Hilbert/Liouville dimension above the configured cap.
class CapExceeded : public std::runtime_error {
public:
    CapExceeded(std::size_t requested, std::size_t cap)
        : std::runtime_error("dimension " + std::to_string(requested) +
                             " exceeds cap " + std::to_string(cap)),
          requested_(requested), cap_(cap) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

// Time propagation failed at a specific output step.
class PropagationError : public NumericalError {
public:
    PropagationError(std::size_t step, double time, const std::string& what)
        : NumericalError("propagation failed at step " + std::to_string(step) +
                         " (t = " + std::to_string(time) + " s): " + what),
          step_(step), time_(time) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

// Quadrature whose error estimate stayed above tolerance.
class QuadratureError : public NumericalError {
public:
    QuadratureError(double estimate, double tolerance)
        : NumericalError("quadrature did not converge: error estimate " +
                         std::to_string(estimate) + " > tolerance " +
                         std::to_string(tolerance)),
          estimate_(estimate), tolerance_(tolerance) {}

    double estimate() const noexcept { return estimate_; }
    double tolerance() const noexcept { return tolerance_; }

private:
    double estimate_;
    double tolerance_;
};

}  // namespace sbsim

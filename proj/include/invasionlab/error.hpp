#pragma once

#include <stdexcept>
#include <string>

namespace invasionlab {

/// Failure categories raised by library operations.
enum class ErrorKind {
    invalid_argument,
    integration_blowup,
    front_not_found,
    front_not_converged,
    insufficient_data,
    insufficient_decades,
    no_convergence,
    rank_deficient,
    regime,
    singular_integrand,
    window_too_small,
    no_root,
    pinching_undetermined,
    no_spreading_speed,
    branch_ambiguity,
    multiplicity,
    hypothesis_violation,
    solver,
    grid_mismatch,
    low_coherence,
    fit_failed,
    phase_undetermined,
    truncated_track,
    config,
    missing_data,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Blow-up during time integration; carries the offending step index.
class BlowupError : public Error {
public:
    BlowupError(long step, double t)
        : Error(ErrorKind::integration_blowup,
                "non-finite state at step " + std::to_string(step) + " (t=" + std::to_string(t) + ")"),
          step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace invasionlab

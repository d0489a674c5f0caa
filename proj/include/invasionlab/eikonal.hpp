#pragma once

#include <span>
#include <vector>

#include "invasionlab/core.hpp"

namespace invasionlab {

/// psi_t = D_eff psi_xx - c_g psi_x + beta psi_x^2.
struct EikonalConfig {
    double D_eff = 1.0;
    double c_g = 0.0;
    double beta = 0.0;
    Grid grid;
    double dt = 0.05;
    int record_every = 20;

    void validate() const;
};

struct PhaseTrajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> psi;
};

/// CN diffusion and centered advection, Heun for the quadratic term,
/// mirror ghosts at both ends. Records psi0 and every record_every steps.
PhaseTrajectory eikonal_run(std::span<const double> psi0, const EikonalConfig& cfg, double t_end);

/// Integral of exp(-w^2) from -inf to z (tends to sqrt(pi)).
double erf_unnormalized(double z);

/// offset + amplitude * erf_unnormalized((xi - c_g t) / sqrt(D0 (1 + t))).
double erf_profile(double xi, double t, double c_g, double D0, double amplitude, double offset);

struct ErfFit {
    double D0 = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double shift = 0.0;     ///< center minus c_g t (0 unless free_center)
    double residual = 0.0;  ///< RMS misfit
    int iterations = 0;
    std::vector<double> residual_history;
};

/// Levenberg-Marquardt fit of erf_profile to (xi, psi) at time t. With
/// free_center the center c_g t + shift carries one more unknown.
ErfFit fit_erf(std::span<const double> xi, std::span<const double> psi, double t, double c_g,
               bool free_center = false);

}  // namespace invasionlab

#pragma once

#include <vector>

#include "invasionlab/core.hpp"
#include "invasionlab/stepper.hpp"

namespace invasionlab {

/// One period of a traveling wave train, stationary in the frame of speed c.
/// Samples sit at xi_j = j L / m, j = 0..m-1; the endpoint xi = L is not
/// stored (it equals sample 0).
struct WaveTrain {
    int m = 256;
    std::vector<double> profile_u;
    std::vector<double> profile_w;
    double L = 0.0;
    double k_wt = 0.0;
    double c = 0.0;
    double residual = 0.0;
    int newton_steps = 0;

    double h() const { return L / m; }
};

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-10;
};

/// Periodic traveling wave at speed c by Newton on the Fourier-collocation
/// system in sigma = xi / L, closed by an integral phase condition against
/// the guess.
WaveTrain solve_wavetrain(const Params& params, double c, const WaveTrain& guess,
                          const NewtonOptions& opts = {});

/// Sup norm of the collocation residual of wt at its own speed.
double wavetrain_residual(const Params& params, const WaveTrain& wt);

/// Resamples wt to m_new points by trigonometric interpolation.
WaveTrain resample_wavetrain(const WaveTrain& wt, int m_new);

struct HomogeneousOrbit {
    double T = 0.0;
    std::vector<double> t;  ///< one period, t[0] = 0 at an upward crossing of u_mean
    std::vector<double> u;
    std::vector<double> w;
    double u_mean = 0.0;
};

struct OrbitOptions {
    double dt = 0.01;
    double t_transient = 3000.0;
    int periods_averaged = 5;
};

/// Limit cycle of the spatially constant ODE started from (0.5, 0).
HomogeneousOrbit homogeneous_oscillation(const Params& params, const OrbitOptions& opts = {});

/// Phase-wave guess U(xi) = orbit(-xi / c) with L = c T.
WaveTrain wavetrain_from_orbit(const HomogeneousOrbit& orbit, double c, int m = 256);

/// Roots entering the wavelength integral: the printed form
/// (1 - 2a +- j sqrt(1 + a + a^2)) / 3, or the same with sqrt(1 - a + a^2),
/// which places u_{1,+-} at the critical points of the cubic.
enum class RootConvention { printed, cubic_critical_points };

struct WavelengthQuadrature {
    double L_minus = 0.0;
    double L_plus = 0.0;
    double u1_minus = 0.0, u1_plus = 0.0, u2_minus = 0.0, u2_plus = 0.0;
    double error_estimate = 0.0;
};

/// L_+- = integral from u_{1,+-} to u_{2,+-} of (1+a) f'(u) / (sqrt 2 (gamma f(u) - u)).
WavelengthQuadrature wavelength_quadrature(const Params& params,
                                           RootConvention conv = RootConvention::printed,
                                           double tol = 1e-10);

/// Guess from the last snapshot of traj on [xi_lo, xi_hi]: L is the mean
/// spacing of upward crossings of the window mean; one period is taken
/// starting at the first crossing.
WaveTrain wavetrain_from_simulation(const Trajectory& traj, double xi_lo, double xi_hi, double c,
                                    int m = 256);
WaveTrain wavetrain_from_state(const State& state, double xi_lo, double xi_hi, double c,
                               int m = 256);

/// Upward crossings of v through level on [xi_lo, xi_hi], linearly interpolated.
std::vector<double> upward_crossings(const State& state, double xi_lo, double xi_hi, double level);

/// Evaluates the periodic profile (component 0 = u, 1 = w) at xi.
double wavetrain_eval(const WaveTrain& wt, int component, double xi);

}  // namespace invasionlab

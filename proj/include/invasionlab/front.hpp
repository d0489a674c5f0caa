#pragma once

#include <span>
#include <vector>

#include "invasionlab/core.hpp"
#include "invasionlab/front_profile.hpp"
#include "invasionlab/stepper.hpp"
#include "invasionlab/wavetrain.hpp"

namespace invasionlab {

/// Default front level (1 - a) / 2.
double default_front_level(const Params& params);

/// Rightmost downward crossing of u through level, linearly interpolated.
double front_position(const State& state, double level);

struct SpeedFit {
    double c = 0.0;
    double stderr_c = 0.0;
};

/// Least-squares slope over the trailing half of the samples (at least 10 samples).
SpeedFit measure_speed(std::span<const double> times, std::span<const double> positions);

/// Front positions of every snapshot (throws if any snapshot lacks a front).
std::vector<double> front_positions(const Trajectory& traj, double level);

struct ExtractOptions {
    int K = 8;
    double level = -1.0;         ///< < 0 selects default_front_level
    double frame_speed = 0.0;    ///< speed of the frame the trajectory was run in
    double window = 50.0;        ///< alignment residual measured on |xi| <= window
    double max_residual = 0.05;
};

/// Averages the last K snapshots after shifting each so its front sits at xi = 0.
FrontProfile extract_front(const Trajectory& traj, const Params& params,
                           const ExtractOptions& opts = {});

struct TailFit {
    double eta = 0.0;
    double prefactor = 0.0;  ///< u_ps^0 estimate: |u| ~ prefactor exp(-eta xi)
    double r2 = 0.0;
    double xi_lo = 0.0, xi_hi = 0.0;
};

/// Slope of -log|u| ahead of the front where lo <= |u| <= hi; the window must
/// span at least three decades above floor.
TailFit fit_tail_decay(const FrontProfile& fp, double hi = 1e-2, double lo = 1e-8,
                       double floor = 1e-10);

/// min over shifts s of sup |u_ps(xi) - u_wt(xi + s)| for xi in [xi_lo, xi_hi].
double wake_mismatch(const FrontProfile& fp, const WaveTrain& wt, double xi_lo, double xi_hi);

/// Change of the profile after integrating it in its own frame for time t,
/// measured in the omega_0 = Weight{0, eta0} sup norm on |xi| <= window.
double stationarity_defect(const FrontProfile& fp, const Params& params, double dt, double t,
                           double eta0, double window = 100.0);

/// Profile resampled onto another comoving grid (zero to the right, constant
/// extension to the left is not attempted: values outside are clamped).
FrontProfile resample_front(const FrontProfile& fp, const Grid& grid);

struct PolishReport {
    int newton_steps = 0;
    double residual = 0.0;
    double speed_change = 0.0;
};

/// Newton solve of the stationary comoving problem on grid, started from fp
/// resampled: centered differences, Neumann on the left, u = w = 0 on the
/// right, speed as extra unknown fixed by the value of u at the node nearest
/// xi = 0. The w equation carries the stepper's fourth-difference damping.
/// Equations and unknowns are scaled by Weight{0, scale_eta} so the leading
/// tail keeps relative accuracy.
struct PolishOptions {
    double tol = 1e-11;  ///< on the scaled residual
    int max_iter = 30;
    double w_dissipation = 1e-3;
    double scale_eta = 0.4;
};
FrontProfile polish_front(const FrontProfile& fp, const Params& params, const Grid& grid,
                          const PolishOptions& opts = {}, PolishReport* report = nullptr);

}  // namespace invasionlab

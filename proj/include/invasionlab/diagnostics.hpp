#pragma once

#include <span>
#include <string>
#include <vector>

#include "invasionlab/core.hpp"
#include "invasionlab/front_profile.hpp"
#include "invasionlab/spectral.hpp"
#include "invasionlab/stepper.hpp"
#include "invasionlab/wavetrain.hpp"

namespace invasionlab {

struct WavenumberMeasurement {
    double k = 0.0;
    double L = 0.0;
    double spacing_cv = 0.0;  ///< standard deviation / mean of crossing spacings
    int crossings = 0;
    bool coherent = true;
};

/// 2 pi over the mean spacing of upward crossings of u through its window
/// mean; coherent is false when spacing_cv exceeds cv_threshold.
WavenumberMeasurement measure_wavenumber(const State& state, double xi_lo, double xi_hi,
                                         double cv_threshold = 0.1);

struct PhaseSamples {
    std::vector<double> xi;
    std::vector<double> psi;   ///< u(xi) ~ u_wt(xi + psi), unwrapped along xi
    std::vector<double> peak;  ///< Pearson correlation at the maximum
};

struct PhaseOptions {
    double stride = 1.0;
    int samples_per_period = 256;
    double min_peak = 0.5;
};

/// Sliding one-period windows centred on [xi_lo + L/2, xi_hi - L/2]; each
/// window is circularly correlated against u_wt, the argmax refined by a
/// parabola, and the phases unwrapped with jump threshold L/2.
PhaseSamples extract_phase(const State& state, const WaveTrain& wt, double xi_lo, double xi_hi,
                           const PhaseOptions& opts = {});

/// Phase of a linear perturbation V = omega_0 v about the front sampled on
/// fp.grid: Hann-weighted projection of V onto omega_0 U_ps' over windows of
/// half-width L centred at xi_lo, xi_lo + stride, ... <= xi_hi.
PhaseSamples linear_phase(const State& V, const FrontProfile& fp, double eta0, double L,
                          double xi_lo, double xi_hi, double stride);

struct PhaseTrack {
    std::vector<double> times;
    std::vector<PhaseSamples> samples;
};

PhaseTrack extract_phase_track(const Trajectory& traj, const WaveTrain& wt, double xi_lo,
                               double xi_hi, const PhaseOptions& opts = {});

struct DefectSpeed {
    double speed = 0.0;
    double stderr_speed = 0.0;
    std::vector<double> times, positions;
    bool truncated = false;  ///< the crossing left the window before the last snapshot
};

/// Slope of the position where psi crosses the middle of its end values,
/// fitted over the trailing fraction of the tracked times. Snapshots whose
/// end values differ by less than min_jump carry no defect. A positive
/// smooth_length applies a centred moving average of that length to psi
/// first (the per-window phase of a pulse train is a staircase of step L).
DefectSpeed defect_speed(const PhaseTrack& track, double min_jump = 1e-2,
                         double trailing_fraction = 0.6, double smooth_length = 0.0);

enum class DecayKind { algebraic, exponential };

struct DecayFit {
    DecayKind kind = DecayKind::algebraic;
    double exponent_or_rate = 0.0;
    double prefactor = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    double r2 = 0.0;
    int used = 0;
    int dropped = 0;  ///< nonpositive values removed
};

/// Least squares of log(value) against log(1 + t) or t over the trailing
/// fraction of the time range.
DecayFit decay_fit(std::span<const double> times, std::span<const double> values, DecayKind kind,
                   double trailing_fraction = 0.6);

struct LightconeSeries {
    std::vector<double> times;  ///< time since t0
    std::vector<double> right;  ///< NaN where the cone misses the grid
    std::vector<double> left;
};

/// Per snapshot: sup over xi >= (c_g + delta_c) s of omega_0 |U - U_ps(. + psi_inf)|
/// and sup over xi <= (c_g - delta_c) s of omega_0 |U - U_ps|, s = t - t0,
/// with |.| the Euclidean norm of (u, w).
LightconeSeries lightcone_norms(const Trajectory& traj, const FrontProfile& fp, double psi_inf,
                                double c_g, double delta_c, double eta0, double t0 = 0.0);

struct AsymptoticPhase {
    double psi_inf_measured = 0.0;
    double ptr_predicted = 0.0;
    double misfit_min = 0.0;
    double misfit_contrast = 0.0;  ///< (max - min) / max over the scan
};

/// On the last snapshot of traj: the shift s minimizing the omega_0-weighted
/// sup misfit against U_ps(. + s) on xi >= -K, and P_tr(omega_0 w0) with w0
/// resampled onto the report grid.
AsymptoticPhase asymptotic_phase(const Trajectory& traj, const FrontProfile& fp,
                                 const PointSpectrumReport& report, const State& w0,
                                 double K = 50.0, double s_range = 5.0);

/// Shift minimizing the misfit alone (no spectral report).
double best_shift(const State& state, const FrontProfile& fp, double eta0, double K = 50.0,
                  double s_range = 5.0, double* misfit_min = nullptr,
                  double* contrast = nullptr);

}  // namespace invasionlab

#pragma once

#include <cstdint>
#include <vector>

#include "invasionlab/core.hpp"
#include "invasionlab/diagnostics.hpp"
#include "invasionlab/eikonal.hpp"
#include "invasionlab/front.hpp"
#include "invasionlab/spectral.hpp"
#include "invasionlab/stepper.hpp"
#include "invasionlab/wavetrain.hpp"

namespace invasionlab {

// ---------------------------------------------------------------------------
// Front acquisition: a lab-frame run measures the speed, a comoving run at
// that speed relaxes the profile.

struct StageAOptions {
    double x_min = -400.0, x_max = 400.0, h = 0.1, dt = 0.02, t_end = 1000.0;
    int record_every = 250;
    double bump_center = -380.0, bump_width = 5.0, bump_amplitude = 0.5;
};

struct StageAResult {
    std::vector<double> times, positions;
    SpeedFit speed;
    State final_state;
    WaveTrain wake_guess;  ///< one period read off the wake, not yet solved
};

StageAResult run_stage_a(const Params& params, const StageAOptions& opts = {});

struct StageBOptions {
    double x_min = -400.0, x_max = 200.0, dt = 0.02, t_end = 300.0;
    int record_every = 50;
};

struct StageBResult {
    double frame_speed = 0.0;
    double drift = 0.0;  ///< residual front speed in the comoving frame
    FrontProfile fp;
    State final_state;
};

/// Comoving run started from the stage A state shifted so its front sits at 0;
/// the part left of the stage A grid is filled from the wake five periods on.
StageBResult run_stage_b(const Params& params, const StageAResult& a, const StageBOptions& opts = {});

/// s sampled on grid; points left of s.grid.x_min + join are read whole
/// periods L further right, points right of s.grid.x_max are zero.
State extend_wake(const State& s, const Grid& grid, double L, double join = 20.0);

// ---------------------------------------------------------------------------
// Phase defect transport

struct DefectOptions {
    double dt = 0.05;
    double t_run = 700.0;
    double record_interval = 10.0;
    double offset = 5.0;  ///< bump centre relative to the front
    double width = 2.0;
    double amplitude = 0.3;
    double xi_lo = -380.0;    ///< phase window, left end
    double front_gap = 30.0;  ///< phase window ends this far behind the front
    double stride = 2.0;
};

struct DefectExperiment {
    DefectSpeed defect;
    PhaseTrack phase_difference;  ///< perturbed minus reference
    double front_shift = 0.0;     ///< final front offset relative to the reference
};

/// Fires a u bump ahead of the front of a developed comoving state and tracks
/// the phase difference against an unperturbed reference run.
DefectExperiment defect_experiment(const Params& params, const State& developed,
                                   double frame_speed, const WaveTrain& wt,
                                   const DefectOptions& opts = {});

// ---------------------------------------------------------------------------
// Asymptotic phase and light cones (nonlinear runs from the polished front)

struct PhaseScalingOptions {
    std::vector<double> amplitudes{0.02, 0.01, 0.005};
    double bump_center = 5.0, bump_width = 2.0;
    double dt = 0.05;
    double t_end = 300.0;
    double cone_record = 5.0;  ///< snapshot interval of the light-cone run
    double cone_delta = 0.25;      ///< delta_c as a fraction of |c_g|
    double cone_delta_alt = 0.5;   ///< second, wider cone opening
};

struct PhaseScalingPoint {
    double amplitude = 0.0;
    double weighted_amplitude = 0.0;  ///< sup of omega_0 w0
    double measured = 0.0;
    double predicted = 0.0;
};

struct PhaseScaling {
    std::vector<PhaseScalingPoint> points;
    double reference_shift = 0.0;  ///< drift of the unperturbed run
    double slope = 0.0;            ///< log-log slope of |measured - predicted|
    LightconeSeries cones;         ///< from the second amplitude
    LightconeSeries cones_alt;     ///< same run, opening cone_delta_alt
    double cone_psi_inf = 0.0;
};

/// Runs from U_ps + A w0 with w0 a u bump, in the frame of the report's
/// profile, on the report grid.
PhaseScaling phase_scaling_experiment(const Params& params, const PointSpectrumReport& report,
                                      double c_g, const PhaseScalingOptions& opts = {});

// ---------------------------------------------------------------------------
// Linearized modulation dynamics

struct LinearModulationOptions {
    double x_min = -1300.0;
    double h = 0.1, dt = 0.05, t_end = 1500.0;
    double record_interval = 10.0;
    double bump_center = 5.0, bump_width = 2.0;
    double eta0 = 0.4;
    double phase_right = -40.0;  ///< phase sampled on [x_min + L, phase_right]
    double stride = 0.5;
    double erf_time = 200.0;
    double erf_window = 0.6;  ///< centre speed fitted over the trailing fraction
};

struct LinearModulation {
    FrontProfile extended;  ///< polished front on [x_min, report right end]
    std::vector<double> times;
    std::vector<double> grad_sup;  ///< sup |psi_xi|
    std::vector<double> l2_proxy;  ///< |psi_xi|_2 + |psi_t|_2 + |V - psi omega_0 U'|_2
    ErfFit erf_at;                 ///< fit at erf_time
    std::vector<double> center_times, centers;
    double center_speed = 0.0;
    double final_psi = 0.0;  ///< psi just behind the front at the last snapshot
};

/// Frozen-coefficient weighted linearization about the front continued
/// periodically to x_min and re-polished; initial data omega_0 times a u bump.
LinearModulation linear_modulation_experiment(const Params& params, const FrontProfile& fp,
                                              const WaveTrain& wt, double c_g,
                                              const LinearModulationOptions& opts = {});

// ---------------------------------------------------------------------------
// Lab-frame spacetime panels

enum class PanelKind { noise, bump, bump_event };

struct PanelOptions {
    double x_min = 0.0, x_max = 600.0, h = 0.2, dt = 0.05, t_end = 800.0;
    double record_interval = 5.0;
    double column_spacing = 1.0;
    std::uint64_t seed = 1;
    double noise_amplitude = 1e-2;  ///< noise panel: white noise on the whole domain
    double event_time = 600.0;
};

struct SpacetimePanel {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<std::vector<double>> u;  ///< one row per snapshot
    std::vector<double> front;           ///< front position per row (NaN if none)
};

SpacetimePanel spacetime_panel(const Params& params, PanelKind kind, const PanelOptions& opts = {});

}  // namespace invasionlab

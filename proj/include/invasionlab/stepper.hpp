#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "invasionlab/core.hpp"
#include "invasionlab/front_profile.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

enum class BoundaryCondition { neumann, periodic };

struct SchemeConfig {
    double dt = 0.02;
    double frame_speed = 0.0;  ///< 0 selects the lab frame
    BoundaryCondition bc = BoundaryCondition::neumann;
    int record_every = 50;
    double t_end = 100.0;
    /// Coefficient of the explicit h^3 d^4 damping on w in moving frames.
    double w_dissipation = 1e-3;
};

/// min(0.25, 1 / (2 max |f'(u)|)) with the max taken over u in [-0.5, 1.5].
double stability_bound(const Params& p);
/// Throws ErrorKind::config naming the offending field.
void validate(const SchemeConfig& cfg, const Params& p);

enum class Component { u, w };

struct PerturbationEvent {
    double t_fire = 0.0;
    double center = 0.0;
    double width = 1.0;
    double amplitude = 0.0;
    Component component = Component::u;
};

struct FiredEvent {
    PerturbationEvent event;
    long step = 0;
    double t = 0.0;
};

struct Trajectory {
    std::vector<State> snapshots;
    std::vector<FiredEvent> events_fired;
};

using SnapshotSink = std::function<void(const State&)>;

/// How the frozen-coefficient linearization is posed.
enum class LinearForm {
    unweighted,  ///< A_ps v
    weighted,    ///< omega_0 A_ps (V / omega_0), omega_0 = Weight{0, eta0}
};

/// IMEX integrator: Crank-Nicolson on diffusion and advection, Heun on the
/// reaction. Operators are factored once at construction.
class Integrator {
public:
    /// Full nonlinear system in the frame of speed cfg.frame_speed.
    Integrator(const Grid& grid, const Params& params, const SchemeConfig& cfg);

    /// Linearization about a frozen profile sampled on grid.
    static Integrator linearized(const Grid& grid, const Params& params, const SchemeConfig& cfg,
                                 std::span<const double> u_frozen, LinearForm form, double eta0);

    /// Advances state by one step. Throws BlowupError (with step_index) on
    /// non-finite output.
    void step(State& state, long step_index = 0) const;

    const Grid& grid() const { return grid_; }
    const SchemeConfig& config() const { return cfg_; }
    /// Boundary node held fixed in moving frames with Neumann conditions, or -1.
    int pinned_node() const { return pinned_; }

private:
    Integrator(const Grid& grid, const Params& params, const SchemeConfig& cfg,
               std::vector<double> b, std::vector<double> q, std::vector<double> qw,
               std::vector<double> fprime);

    void build();
    void apply_explicit(std::span<const double> x, const std::vector<double>& lo,
                        const std::vector<double>& di, const std::vector<double>& up,
                        std::span<double> out) const;
    void reaction_terms(const State& s, std::vector<double>& ru, std::vector<double>& rw) const;
    void dissipation(std::span<const double> w, std::span<double> out) const;

    Grid grid_;
    Params params_;
    SchemeConfig cfg_;
    bool linear_ = false;
    std::vector<double> b_, q_, qw_, fprime_;
    std::vector<double> ulo_, udi_, uup_, wlo_, wdi_, wup_;
    Tridiagonal usolve_, wsolve_;
    int pinned_ = -1;
    bool dissipate_ = false;
};

/// One step of the nonlinear scheme.
State step(const State& state, const Params& params, const SchemeConfig& cfg);

/// Integrates from initial.t to cfg.t_end. Events fire at the first step
/// boundary with t >= t_fire, adding amplitude exp(-((x-center)/width)^2) to
/// the named component. The initial state and every record_every-th step are
/// recorded; keep_snapshots = false streams to sink only.
Trajectory run(const State& initial, const Params& params, const SchemeConfig& cfg,
               std::span<const PerturbationEvent> events, const SnapshotSink& sink = {},
               bool keep_snapshots = true);

/// Same loop driven by a prebuilt integrator.
Trajectory run(const Integrator& integ, const State& initial,
               std::span<const PerturbationEvent> events, const SnapshotSink& sink = {},
               bool keep_snapshots = true);

/// One step of the frozen-coefficient linearization about frozen (which must
/// share state.grid).
State linearized_step(const State& state, const FrontProfile& frozen, const Params& params,
                      const SchemeConfig& cfg, LinearForm form = LinearForm::unweighted,
                      double eta0 = 0.0);

void add_event(State& state, const PerturbationEvent& ev);

}  // namespace invasionlab

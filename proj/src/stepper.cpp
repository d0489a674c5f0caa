#include "invasionlab/stepper.hpp"

#include <algorithm>
#include <cmath>

#include "invasionlab/error.hpp"

namespace invasionlab {

double stability_bound(const Params& p) {
    double m = 0.0;
    for (int i = 0; i <= 2000; ++i) m = std::max(m, std::abs(cubic_prime(p, -0.5 + 2.0 * i / 2000)));
    return std::min(0.25, 1.0 / (2.0 * m));
}

void validate(const SchemeConfig& cfg, const Params& p) {
    if (!(cfg.dt > 0.0)) throw Error(ErrorKind::config, "scheme.dt must be positive");
    if (cfg.dt > stability_bound(p))
        throw Error(ErrorKind::config, "scheme.dt exceeds the stability bound " +
                                           std::to_string(stability_bound(p)));
    if (cfg.record_every < 1) throw Error(ErrorKind::config, "scheme.record_every must be >= 1");
    if (!std::isfinite(cfg.frame_speed)) throw Error(ErrorKind::config, "scheme.frame_speed must be finite");
    if (!std::isfinite(cfg.t_end)) throw Error(ErrorKind::config, "scheme.t_end must be finite");
}

Integrator::Integrator(const Grid& grid, const Params& params, const SchemeConfig& cfg)
    : grid_(grid), params_(params), cfg_(cfg) {
    grid_.validate();
    b_.assign(grid.n, cfg.frame_speed);
    q_.assign(grid.n, 0.0);
    qw_.assign(grid.n, 0.0);
    build();
}

Integrator::Integrator(const Grid& grid, const Params& params, const SchemeConfig& cfg,
                       std::vector<double> b, std::vector<double> q, std::vector<double> qw,
                       std::vector<double> fprime)
    : grid_(grid), params_(params), cfg_(cfg), linear_(true), b_(std::move(b)), q_(std::move(q)),
      qw_(std::move(qw)), fprime_(std::move(fprime)) {
    grid_.validate();
    build();
}

Integrator Integrator::linearized(const Grid& grid, const Params& params, const SchemeConfig& cfg,
                                  std::span<const double> u_frozen, LinearForm form, double eta0) {
    if (static_cast<int>(u_frozen.size()) != grid.n)
        throw Error(ErrorKind::grid_mismatch, "frozen profile does not match the state grid");
    const double c = cfg.frame_speed;
    std::vector<double> b(grid.n, c), q(grid.n, 0.0), qw(grid.n, 0.0), fp(grid.n);
    for (int i = 0; i < grid.n; ++i) fp[i] = cubic_prime(params, u_frozen[i]);
    if (form == LinearForm::weighted) {
        const Weight w0{0.0, eta0};
        for (int i = 0; i < grid.n; ++i) {
            const double xi = grid.x(i);
            const double g = weight_log_slope(w0, xi);
            const double gp = weight_log_curvature(w0, xi);
            b[i] = c - 2.0 * g;
            q[i] = g * g - gp - c * g;
            qw[i] = -c * g;
        }
    }
    return Integrator(grid, params, cfg, std::move(b), std::move(q), std::move(qw), std::move(fp));
}

void Integrator::build() {
    const int n = grid_.n;
    const double h = grid_.h();
    const double c = cfg_.frame_speed;
    const bool periodic = cfg_.bc == BoundaryCondition::periodic;
    ulo_.resize(n);
    udi_.resize(n);
    uup_.resize(n);
    wlo_.resize(n);
    wdi_.resize(n);
    wup_.resize(n);
    for (int i = 0; i < n; ++i) {
        ulo_[i] = 1.0 / (h * h) - b_[i] / (2.0 * h);
        udi_[i] = -2.0 / (h * h) + q_[i];
        uup_[i] = 1.0 / (h * h) + b_[i] / (2.0 * h);
        wlo_[i] = -c / (2.0 * h);
        wdi_[i] = qw_[i];
        wup_[i] = c / (2.0 * h);
    }
    if (!periodic) {
        // Mirror ghost nodes for zero normal derivative.
        uup_[0] += ulo_[0];
        ulo_[0] = 0.0;
        ulo_[n - 1] += uup_[n - 1];
        uup_[n - 1] = 0.0;
        wup_[0] += wlo_[0];
        wlo_[0] = 0.0;
        wlo_[n - 1] += wup_[n - 1];
        wup_[n - 1] = 0.0;
        if (c > 0.0) pinned_ = n - 1;
        if (c < 0.0) pinned_ = 0;
    }
    dissipate_ = c != 0.0 && cfg_.w_dissipation > 0.0;

    auto lhs = [&](const std::vector<double>& lo, const std::vector<double>& di,
                   const std::vector<double>& up) {
        std::vector<double> l(n), d(n), u(n);
        for (int i = 0; i < n; ++i) {
            l[i] = -0.5 * cfg_.dt * lo[i];
            d[i] = 1.0 - 0.5 * cfg_.dt * di[i];
            u[i] = -0.5 * cfg_.dt * up[i];
        }
        if (pinned_ >= 0) {
            l[pinned_] = 0.0;
            d[pinned_] = 1.0;
            u[pinned_] = 0.0;
        }
        return Tridiagonal(std::move(l), std::move(d), std::move(u), periodic);
    };
    usolve_ = lhs(ulo_, udi_, uup_);
    wsolve_ = lhs(wlo_, wdi_, wup_);
}

void Integrator::apply_explicit(std::span<const double> x, const std::vector<double>& lo,
                                const std::vector<double>& di, const std::vector<double>& up,
                                std::span<double> out) const {
    const int n = grid_.n;
    for (int i = 1; i < n - 1; ++i) out[i] = lo[i] * x[i - 1] + di[i] * x[i] + up[i] * x[i + 1];
    // Periodic corners; the Neumann fold leaves lo[0] = up[n-1] = 0.
    out[0] = lo[0] * x[n - 1] + di[0] * x[0] + up[0] * x[1];
    out[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1] + up[n - 1] * x[0];
}

void Integrator::reaction_terms(const State& s, std::vector<double>& ru,
                                std::vector<double>& rw) const {
    const int n = grid_.n;
    const double eps = params_.eps, gamma = params_.gamma;
    if (linear_) {
        for (int i = 0; i < n; ++i) {
            ru[i] = fprime_[i] * s.u[i] - s.w[i];
            rw[i] = eps * (s.u[i] - gamma * s.w[i]);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            ru[i] = cubic(params_, s.u[i]) - s.w[i];
            rw[i] = eps * (s.u[i] - gamma * s.w[i]);
        }
    }
}

void Integrator::dissipation(std::span<const double> w, std::span<double> out) const {
    const int n = grid_.n;
    std::fill(out.begin(), out.end(), 0.0);
    if (!dissipate_) return;
    const double k = -cfg_.w_dissipation / grid_.h();
    if (cfg_.bc == BoundaryCondition::periodic) {
        auto at = [&](int j) { return w[(j + n) % n]; };
        for (int i = 0; i < n; ++i)
            out[i] = k * (at(i - 2) - 4 * at(i - 1) + 6 * w[i] - 4 * at(i + 1) + at(i + 2));
    } else {
        for (int i = 2; i < n - 2; ++i)
            out[i] = k * (w[i - 2] - 4 * w[i - 1] + 6 * w[i] - 4 * w[i + 1] + w[i + 2]);
    }
}

void Integrator::step(State& s, long step_index) const {
    const int n = grid_.n;
    if (static_cast<int>(s.u.size()) != n || static_cast<int>(s.w.size()) != n)
        throw Error(ErrorKind::grid_mismatch, "state arrays do not match the integrator grid");
    const double dt = cfg_.dt;
    std::vector<double> au(n), aw(n), ru0(n), rw0(n), d0(n), ru1(n), rw1(n), d1(n);
    apply_explicit(s.u, ulo_, udi_, uup_, au);
    apply_explicit(s.w, wlo_, wdi_, wup_, aw);
    reaction_terms(s, ru0, rw0);
    dissipation(s.w, d0);

    State pred{s.grid, s.t, std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        pred.u[i] = s.u[i] + 0.5 * dt * au[i] + dt * ru0[i];
        pred.w[i] = s.w[i] + 0.5 * dt * aw[i] + dt * (rw0[i] + d0[i]);
    }
    if (pinned_ >= 0) {
        pred.u[pinned_] = s.u[pinned_];
        pred.w[pinned_] = s.w[pinned_];
    }
    usolve_.solve(pred.u);
    wsolve_.solve(pred.w);

    reaction_terms(pred, ru1, rw1);
    dissipation(pred.w, d1);
    const double pu = pinned_ >= 0 ? s.u[pinned_] : 0.0;
    const double pw = pinned_ >= 0 ? s.w[pinned_] : 0.0;
    for (int i = 0; i < n; ++i) {
        s.u[i] += 0.5 * dt * (au[i] + ru0[i] + ru1[i]);
        s.w[i] += 0.5 * dt * (aw[i] + rw0[i] + rw1[i] + d0[i] + d1[i]);
    }
    if (pinned_ >= 0) {
        s.u[pinned_] = pu;
        s.w[pinned_] = pw;
    }
    usolve_.solve(s.u);
    wsolve_.solve(s.w);
    s.t += dt;
    if (!s.finite()) throw BlowupError(step_index, s.t);
}

State step(const State& state, const Params& params, const SchemeConfig& cfg) {
    Integrator integ(state.grid, params, cfg);
    State out = state;
    integ.step(out);
    return out;
}

void add_event(State& state, const PerturbationEvent& ev) {
    if (!(ev.width > 0.0)) throw Error(ErrorKind::invalid_argument, "event width must be positive");
    auto& f = ev.component == Component::u ? state.u : state.w;
    for (int i = 0; i < state.grid.n; ++i) {
        const double z = (state.grid.x(i) - ev.center) / ev.width;
        f[i] += ev.amplitude * std::exp(-z * z);
    }
}

Trajectory run(const Integrator& integ, const State& initial,
               std::span<const PerturbationEvent> events, const SnapshotSink& sink,
               bool keep_snapshots) {
    const SchemeConfig& cfg = integ.config();
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].t_fire < events[i - 1].t_fire)
            throw Error(ErrorKind::invalid_argument, "events must be sorted by t_fire");
    Trajectory traj;
    State s = initial;
    const double t0 = initial.t;
    const long nsteps = std::max(0L, std::lround((cfg.t_end - t0) / cfg.dt));
    auto record = [&](const State& st) {
        if (sink) sink(st);
        if (keep_snapshots) traj.snapshots.push_back(st);
    };
    std::size_t next = 0;
    const double tol = 1e-9 * cfg.dt;
    auto fire = [&](long k) {
        while (next < events.size() && s.t >= events[next].t_fire - tol) {
            add_event(s, events[next]);
            traj.events_fired.push_back({events[next], k, s.t});
            ++next;
        }
    };
    fire(0);
    record(s);
    for (long k = 1; k <= nsteps; ++k) {
        integ.step(s, k);
        s.t = t0 + k * cfg.dt;
        fire(k);
        if (k % cfg.record_every == 0) record(s);
    }
    return traj;
}

Trajectory run(const State& initial, const Params& params, const SchemeConfig& cfg,
               std::span<const PerturbationEvent> events, const SnapshotSink& sink,
               bool keep_snapshots) {
    Integrator integ(initial.grid, params, cfg);
    return run(integ, initial, events, sink, keep_snapshots);
}

State linearized_step(const State& state, const FrontProfile& frozen, const Params& params,
                      const SchemeConfig& cfg, LinearForm form, double eta0) {
    if (frozen.grid.n != state.grid.n || frozen.grid.x_min != state.grid.x_min ||
        frozen.grid.x_max != state.grid.x_max)
        throw Error(ErrorKind::grid_mismatch, "frozen profile is not sampled on the state grid");
    const Integrator integ = Integrator::linearized(state.grid, params, cfg, frozen.u_ps, form, eta0);
    State out = state;
    integ.step(out);
    return out;
}

}  // namespace invasionlab

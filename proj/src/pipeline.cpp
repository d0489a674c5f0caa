#include "invasionlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invasionlab/error.hpp"
#include "invasionlab/io.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

namespace {

int steps_per(double interval, double dt) {
    return std::max(1, static_cast<int>(std::lround(interval / dt)));
}

void add_gaussian(std::vector<double>& v, const Grid& g, double center, double width, double amp) {
    for (int i = 0; i < g.n; ++i) {
        const double z = (g.x(i) - center) / width;
        v[i] += amp * std::exp(-z * z);
    }
}

}  // namespace

StageAResult run_stage_a(const Params& params, const StageAOptions& o) {
    const Grid g = make_grid(o.x_min, o.x_max, o.h);
    State s = State::zeros(g);
    add_gaussian(s.u, g, o.bump_center, o.bump_width, o.bump_amplitude);
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.t_end = o.t_end;
    cfg.record_every = o.record_every;
    validate(cfg, params);
    const Trajectory tr = run(s, params, cfg, {});
    StageAResult a;
    a.positions = front_positions(tr, default_front_level(params));
    for (const State& st : tr.snapshots) a.times.push_back(st.t);
    a.speed = measure_speed(a.times, a.positions);
    a.final_state = tr.snapshots.back();
    a.wake_guess =
        wavetrain_from_state(a.final_state, o.x_min + 100.0, a.positions.back() - 100.0, a.speed.c);
    return a;
}

StageBResult run_stage_b(const Params& params, const StageAResult& a, const StageBOptions& o) {
    const State& sa = a.final_state;
    const Grid& ga = sa.grid;
    const double pf = a.positions.back();
    const double L = a.wake_guess.L;
    const Grid g = make_grid(o.x_min, o.x_max, ga.h());
    State s = State::zeros(g);
    for (int i = 0; i < g.n; ++i) {
        double x = g.x(i) + pf;
        if (x > ga.x_max) continue;
        if (x < ga.x_min) x += 5.0 * L;
        s.u[i] = interp_cubic(sa.u, ga.x_min, ga.h(), x);
        s.w[i] = interp_cubic(sa.w, ga.x_min, ga.h(), x);
    }
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.frame_speed = a.speed.c;
    cfg.t_end = o.t_end;
    cfg.record_every = o.record_every;
    validate(cfg, params);
    const Trajectory tr = run(s, params, cfg, {});
    StageBResult b;
    b.frame_speed = a.speed.c;
    const auto pos = front_positions(tr, default_front_level(params));
    std::vector<double> ts;
    for (const State& st : tr.snapshots) ts.push_back(st.t);
    b.drift = measure_speed(ts, pos).c;
    ExtractOptions eo;
    eo.frame_speed = a.speed.c;
    b.fp = extract_front(tr, params, eo);
    b.final_state = tr.snapshots.back();
    return b;
}

State extend_wake(const State& s, const Grid& g, double L, double join) {
    State out = State::zeros(g, s.t);
    const double start = s.grid.x_min + join;
    for (int i = 0; i < g.n; ++i) {
        double x = g.x(i);
        if (x > s.grid.x_max) continue;
        if (x < start) x += std::ceil((start - x) / L) * L;
        out.u[i] = interp_cubic(s.u, s.grid.x_min, s.grid.h(), x);
        out.w[i] = interp_cubic(s.w, s.grid.x_min, s.grid.h(), x);
    }
    return out;
}

DefectExperiment defect_experiment(const Params& params, const State& developed,
                                   double frame_speed, const WaveTrain& wt,
                                   const DefectOptions& o) {
    const double level = default_front_level(params);
    const double pf = front_position(developed, level);
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.frame_speed = frame_speed;
    cfg.t_end = developed.t + o.t_run;
    cfg.record_every = steps_per(o.record_interval, o.dt);
    validate(cfg, params);
    PerturbationEvent ev;
    ev.t_fire = developed.t;
    ev.center = pf + o.offset;
    ev.width = o.width;
    ev.amplitude = o.amplitude;
    ev.component = Component::u;
    const std::vector<PerturbationEvent> evs{ev};
    const Trajectory ref = run(developed, params, cfg, {});
    const Trajectory per = run(developed, params, cfg, evs);

    DefectExperiment out;
    PhaseOptions po;
    po.stride = o.stride;
    const double hi = pf - o.front_gap;
    for (std::size_t k = 0; k < per.snapshots.size(); ++k) {
        const PhaseSamples a = extract_phase(per.snapshots[k], wt, o.xi_lo, hi, po);
        const PhaseSamples b = extract_phase(ref.snapshots[k], wt, o.xi_lo, hi, po);
        PhaseSamples d = a;
        for (std::size_t i = 0; i < d.psi.size(); ++i) d.psi[i] = a.psi[i] - b.psi[i];
        out.phase_difference.times.push_back(per.snapshots[k].t);
        out.phase_difference.samples.push_back(std::move(d));
    }
    out.defect = defect_speed(out.phase_difference, 1e-2, 0.6, wt.L);
    out.front_shift =
        front_position(per.snapshots.back(), level) - front_position(ref.snapshots.back(), level);
    return out;
}

PhaseScaling phase_scaling_experiment(const Params& params, const PointSpectrumReport& report,
                                      double c_g, const PhaseScalingOptions& o) {
    if (o.amplitudes.size() < 2)
        throw Error(ErrorKind::invalid_argument, "phase scaling needs at least two amplitudes");
    const FrontProfile& fp = report.profile;
    const Grid& g = fp.grid;
    State w0 = State::zeros(g);
    add_gaussian(w0.u, g, o.bump_center, o.bump_width, 1.0);
    const Weight om{0.0, report.eta0};
    double wsup = 0.0;
    for (int i = 0; i < g.n; ++i) wsup = std::max(wsup, weight_eval(om, g.x(i)) * std::abs(w0.u[i]));

    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.frame_speed = fp.c_ps;
    cfg.t_end = o.t_end;
    cfg.record_every = steps_per(o.cone_record, o.dt);
    validate(cfg, params);
    State base = State::zeros(g);
    base.u = fp.u_ps;
    base.w = fp.w_ps;
    const Integrator integ(g, params, cfg);

    PhaseScaling out;
    {
        State last = base;
        run(integ, base, {}, [&](const State& st) { last = st; }, false);
        out.reference_shift = best_shift(last, fp, report.eta0);
    }
    std::vector<double> la, ld;
    for (std::size_t k = 0; k < o.amplitudes.size(); ++k) {
        const double A = o.amplitudes[k];
        State s = base;
        for (int i = 0; i < g.n; ++i) s.u[i] += A * w0.u[i];
        const bool cones = k == 1;
        const Trajectory tr = run(integ, s, {}, {}, true);
        Trajectory last{{tr.snapshots.back()}, {}};
        State scaled = w0;
        for (double& v : scaled.u) v *= A;
        const AsymptoticPhase ap = asymptotic_phase(last, fp, report, scaled);
        PhaseScalingPoint pt;
        pt.amplitude = A;
        pt.weighted_amplitude = A * wsup;
        pt.measured = ap.psi_inf_measured - out.reference_shift;
        pt.predicted = ap.ptr_predicted;
        out.points.push_back(pt);
        la.push_back(std::log(A));
        ld.push_back(std::log(std::abs(pt.measured - pt.predicted)));
        if (cones) {
            out.cone_psi_inf = ap.psi_inf_measured;
            out.cones = lightcone_norms(tr, fp, ap.psi_inf_measured, c_g, o.cone_delta * std::abs(c_g),
                                        report.eta0, s.t);
            out.cones_alt = lightcone_norms(tr, fp, ap.psi_inf_measured, c_g,
                                            o.cone_delta_alt * std::abs(c_g), report.eta0, s.t);
        }
    }
    out.slope = linear_fit(la, ld).slope;
    return out;
}

LinearModulation linear_modulation_experiment(const Params& params, const FrontProfile& fp,
                                              const WaveTrain& wt, double c_g,
                                              const LinearModulationOptions& o) {
    const double L = wt.L;
    // Periodic continuation of the wake, then a Newton polish on the long grid.
    State base = State::zeros(fp.grid);
    base.u = fp.u_ps;
    base.w = fp.w_ps;
    const Grid g = make_grid(o.x_min, fp.grid.x_max, o.h);
    const State long_state = extend_wake(base, g, L);
    FrontProfile ext;
    ext.grid = g;
    ext.c_ps = fp.c_ps;
    ext.eta_ps = fp.eta_ps;
    ext.u_ps = long_state.u;
    ext.w_ps = long_state.w;
    LinearModulation out;
    out.extended = polish_front(ext, params, g);

    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.frame_speed = out.extended.c_ps;
    cfg.t_end = o.t_end;
    validate(cfg, params);
    const Integrator integ =
        Integrator::linearized(g, params, cfg, out.extended.u_ps, LinearForm::weighted, o.eta0);
    const Weight om{0.0, o.eta0};
    State V = State::zeros(g);
    add_gaussian(V.u, g, o.bump_center, o.bump_width, 1.0);
    for (int i = 0; i < g.n; ++i) V.u[i] *= weight_eval(om, g.x(i));

    std::vector<double> du = gradient(out.extended.u_ps, g.h());
    std::vector<double> dw = gradient(out.extended.w_ps, g.h());
    for (int i = 0; i < g.n; ++i) {
        du[i] *= weight_eval(om, g.x(i));
        dw[i] *= weight_eval(om, g.x(i));
    }
    const double lo = o.x_min + L + 1.0;
    const int every = steps_per(o.record_interval, o.dt);
    const long nsteps = std::lround(o.t_end / o.dt);
    const double t_fit = o.t_end * (1.0 - o.erf_window);
    std::vector<double> prev;
    bool erf_done = false;
    for (long k = 1; k <= nsteps; ++k) {
        integ.step(V, k);
        if (k % every != 0) continue;
        const double t = k * o.dt;
        const PhaseSamples ph = linear_phase(V, out.extended, o.eta0, L, lo, o.phase_right, o.stride);
        const std::vector<double> grad = gradient(ph.psi, o.stride);
        double sup = 0.0, g2 = 0.0, t2 = 0.0;
        for (double q : grad) {
            sup = std::max(sup, std::abs(q));
            g2 += q * q * o.stride;
        }
        if (!prev.empty())
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const double q = (ph.psi[i] - prev[i]) / o.record_interval;
                t2 += q * q * o.stride;
            }
        double r2 = 0.0;
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            if (x < ph.xi.front() || x > ph.xi.back()) continue;
            const double p = interp_linear(ph.psi, ph.xi.front(), o.stride, x);
            const double ru = V.u[i] - p * du[i], rw = V.w[i] - p * dw[i];
            r2 += (ru * ru + rw * rw) * g.h();
        }
        out.times.push_back(t);
        out.grad_sup.push_back(sup);
        out.l2_proxy.push_back(std::sqrt(g2) + (prev.empty() ? 0.0 : std::sqrt(t2)) + std::sqrt(r2));
        prev = ph.psi;
        if (!erf_done && t >= o.erf_time - 1e-9) {
            out.erf_at = fit_erf(ph.xi, ph.psi, t, c_g, true);
            erf_done = true;
        }
        if (t >= t_fit - 1e-9) {
            try {
                const ErfFit f = fit_erf(ph.xi, ph.psi, t, c_g, true);
                out.center_times.push_back(t);
                out.centers.push_back(c_g * t + f.shift);
            } catch (const Error&) {
                // A failed fit leaves a gap in the centre series.
            }
        }
        out.final_psi = ph.psi.back();
    }
    if (out.center_times.size() >= 3)
        out.center_speed = linear_fit(out.center_times, out.centers).slope;
    return out;
}

SpacetimePanel spacetime_panel(const Params& params, PanelKind kind, const PanelOptions& o) {
    const Grid g = make_grid(o.x_min, o.x_max, o.h);
    State s = State::zeros(g);
    if (kind == PanelKind::noise) {
        for (int i = 0; i < g.n; ++i)
            s.u[i] = o.noise_amplitude * counter_uniform(o.seed, static_cast<std::uint64_t>(i));
    } else {
        add_gaussian(s.u, g, o.x_min + 10.0, 5.0, 0.5);
    }
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.record_every = steps_per(o.record_interval, o.dt);
    validate(cfg, params);
    const Integrator integ(g, params, cfg);
    SpacetimePanel p;
    const int stride = std::max(1, static_cast<int>(std::lround(o.column_spacing / g.h())));
    for (int i = 0; i < g.n; i += stride) p.xs.push_back(g.x(i));
    const double level = default_front_level(params);
    auto record = [&](const State& st) {
        if (!p.times.empty() && std::abs(st.t - p.times.back()) < 1e-9) return;
        p.times.push_back(st.t);
        std::vector<double> row;
        for (int i = 0; i < g.n; i += stride) row.push_back(st.u[i]);
        p.u.push_back(std::move(row));
        try {
            p.front.push_back(front_position(st, level));
        } catch (const Error&) {
            p.front.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    };
    if (kind == PanelKind::bump_event) {
        SchemeConfig first = cfg;
        first.t_end = o.event_time;
        const Integrator i1(g, params, first);
        State mid = s;
        run(i1, s, {}, [&](const State& st) {
            record(st);
            mid = st;
        }, false);
        PerturbationEvent ev;
        ev.t_fire = mid.t;
        ev.center = front_position(mid, level) + 5.0;
        ev.width = 2.0;
        ev.amplitude = 0.3;
        add_event(mid, ev);
        SchemeConfig second = cfg;
        second.t_end = o.t_end;
        const Integrator i2(g, params, second);
        run(i2, mid, {}, record, false);
    } else {
        cfg.t_end = o.t_end;
        const Integrator i0(g, params, cfg);
        run(i0, s, {}, record, false);
    }
    return p;
}

}  // namespace invasionlab

#include "invasionlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double window_mean(const State& s, double lo, double hi) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < s.grid.n; ++i) {
        const double x = s.grid.x(i);
        if (x >= lo && x <= hi) {
            sum += s.u[i];
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorKind::window_too_small, "window contains no grid points");
    return sum / count;
}

// Interpolates fp at xi; zero to the right of the grid, clamped on the left.
double profile_at(const FrontProfile& fp, const std::vector<double>& v, double xi) {
    if (xi > fp.grid.x_max) return 0.0;
    return interp_cubic(v, fp.grid.x_min, fp.grid.h(), xi);
}

}  // namespace

WavenumberMeasurement measure_wavenumber(const State& state, double xi_lo, double xi_hi,
                                         double cv_threshold) {
    const double level = window_mean(state, xi_lo, xi_hi);
    const auto cr = upward_crossings(state, xi_lo, xi_hi, level);
    if (cr.size() < 4)
        throw Error(ErrorKind::insufficient_data,
                    "fewer than three oscillations in [" + std::to_string(xi_lo) + ", " +
                        std::to_string(xi_hi) + "]");
    std::vector<double> sp(cr.size() - 1);
    for (std::size_t i = 0; i + 1 < cr.size(); ++i) sp[i] = cr[i + 1] - cr[i];
    const double mean = std::accumulate(sp.begin(), sp.end(), 0.0) / sp.size();
    double var = 0.0;
    for (double d : sp) var += (d - mean) * (d - mean);
    var /= sp.size();
    WavenumberMeasurement m;
    m.L = mean;
    m.k = 2.0 * std::numbers::pi / mean;
    m.spacing_cv = std::sqrt(var) / mean;
    m.crossings = static_cast<int>(cr.size());
    m.coherent = m.spacing_cv <= cv_threshold;
    return m;
}

PhaseSamples extract_phase(const State& state, const WaveTrain& wt, double xi_lo, double xi_hi,
                           const PhaseOptions& opts) {
    const int M = opts.samples_per_period;
    const double L = wt.L;
    const double d = L / M;
    if (M < 8 || !(opts.stride > 0.0) || !(L > 0.0))
        throw Error(ErrorKind::invalid_argument, "bad phase extraction options");
    if (xi_hi - xi_lo < L)
        throw Error(ErrorKind::window_too_small, "window shorter than one period");

    std::vector<double> tmpl(M);
    for (int q = 0; q < M; ++q) tmpl[q] = wavetrain_eval(wt, 0, q * d);
    const double tm = std::accumulate(tmpl.begin(), tmpl.end(), 0.0) / M;
    double tn = 0.0;
    for (double& v : tmpl) {
        v -= tm;
        tn += v * v;
    }
    tn = std::sqrt(tn);

    PhaseSamples out;
    const double x0 = state.grid.x_min, h = state.grid.h();
    std::vector<double> win(M), corr(M);
    for (double xc = xi_lo + 0.5 * L; xc <= xi_hi - 0.5 * L + 1e-12; xc += opts.stride) {
        const double start = xc - 0.5 * L;
        for (int j = 0; j < M; ++j) win[j] = interp_cubic(state.u, x0, h, start + j * d);
        const double wm = std::accumulate(win.begin(), win.end(), 0.0) / M;
        double wn = 0.0;
        for (double& v : win) {
            v -= wm;
            wn += v * v;
        }
        wn = std::sqrt(wn);
        int best = 0;
        for (int q = 0; q < M; ++q) {
            double acc = 0.0;
            for (int j = 0; j < M; ++j) acc += win[j] * tmpl[(j + q) % M];
            corr[q] = wn > 0.0 ? acc / (wn * tn) : 0.0;
            if (corr[q] > corr[best]) best = q;
        }
        if (corr[best] < opts.min_peak)
            throw Error(ErrorKind::low_coherence,
                        "correlation peak " + std::to_string(corr[best]) + " at xi = " +
                            std::to_string(xc));
        const double cm = corr[(best + M - 1) % M], cp = corr[(best + 1) % M];
        const double den = cm - 2.0 * corr[best] + cp;
        const double off = den != 0.0 ? 0.5 * (cm - cp) / den : 0.0;
        double psi = std::fmod((best + off) * d - start, L);
        if (psi < 0.0) psi += L;
        if (!out.psi.empty()) {
            const double prev = out.psi.back();
            while (psi - prev > 0.5 * L) psi -= L;
            while (psi - prev < -0.5 * L) psi += L;
        }
        out.xi.push_back(xc);
        out.psi.push_back(psi);
        out.peak.push_back(corr[best]);
    }
    return out;
}

PhaseSamples linear_phase(const State& V, const FrontProfile& fp, double eta0, double L,
                          double xi_lo, double xi_hi, double stride) {
    const Grid& g = fp.grid;
    if (V.grid.n != g.n || V.grid.x_min != g.x_min || V.grid.x_max != g.x_max)
        throw Error(ErrorKind::grid_mismatch, "perturbation is not sampled on the profile grid");
    if (!(stride > 0.0) || !(L > 0.0)) throw Error(ErrorKind::invalid_argument, "bad window");
    const Weight w0{0.0, eta0};
    std::vector<double> du = gradient(fp.u_ps, g.h()), dw = gradient(fp.w_ps, g.h());
    for (int i = 0; i < g.n; ++i) {
        const double om = weight_eval(w0, g.x(i));
        du[i] *= om;
        dw[i] *= om;
    }
    const int hw = static_cast<int>(std::lround(L / g.h()));
    PhaseSamples out;
    for (double xc = xi_lo; xc <= xi_hi + 1e-12; xc += stride) {
        const int c = static_cast<int>(std::lround((xc - g.x_min) / g.h()));
        if (c - hw < 0 || c + hw >= g.n)
            throw Error(ErrorKind::window_too_small, "projection window leaves the grid at xi = " +
                                                         std::to_string(xc));
        double num = 0.0, den = 0.0;
        for (int j = c - hw; j <= c + hw; ++j) {
            const double wt = 0.5 * (1.0 + std::cos(std::numbers::pi * (j - c) / hw));
            num += wt * (V.u[j] * du[j] + V.w[j] * dw[j]);
            den += wt * (du[j] * du[j] + dw[j] * dw[j]);
        }
        out.xi.push_back(g.x(c));
        out.psi.push_back(den > 0.0 ? num / den : 0.0);
        out.peak.push_back(1.0);
    }
    return out;
}

PhaseTrack extract_phase_track(const Trajectory& traj, const WaveTrain& wt, double xi_lo,
                               double xi_hi, const PhaseOptions& opts) {
    PhaseTrack track;
    for (const State& s : traj.snapshots) {
        track.times.push_back(s.t);
        track.samples.push_back(extract_phase(s, wt, xi_lo, xi_hi, opts));
    }
    return track;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& xi, const std::vector<double>& v,
                                   double length) {
    if (!(length > 0.0) || xi.size() < 2) return v;
    const double dx = xi[1] - xi[0];
    const int w = static_cast<int>(std::lround(0.5 * length / dx));
    const int n = static_cast<int>(v.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - w), hi = std::min(n - 1, i + w);
        out[i] = std::accumulate(v.begin() + lo, v.begin() + hi + 1, 0.0) / (hi - lo + 1);
    }
    return out;
}

}  // namespace

DefectSpeed defect_speed(const PhaseTrack& track, double min_jump, double trailing_fraction,
                         double smooth_length) {
    if (!(trailing_fraction > 0.0 && trailing_fraction <= 1.0))
        throw Error(ErrorKind::invalid_argument, "trailing fraction must lie in (0, 1]");
    DefectSpeed ds;
    bool started = false;
    double last = kNaN;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        const PhaseSamples& raw = track.samples[k];
        const std::vector<double> psi = moving_average(raw.xi, raw.psi, smooth_length);
        const std::vector<double>& xs = raw.xi;
        const std::size_t n = psi.size();
        const std::size_t edge = std::max<std::size_t>(1, n / 20);
        if (n < 2 * edge + 2) continue;
        const double left = std::accumulate(psi.begin(), psi.begin() + edge, 0.0) / edge;
        const double right = std::accumulate(psi.end() - edge, psi.end(), 0.0) / edge;
        double pos = kNaN;
        if (std::abs(right - left) >= min_jump) {
            const double mid = 0.5 * (left + right);
            // Crossing nearest the previous position, else the rightmost one.
            for (std::size_t i = n - 1; i-- > 0;) {
                const double a = psi[i] - mid, b = psi[i + 1] - mid;
                if ((a <= 0.0) != (b <= 0.0)) {
                    const double x = xs[i] + a / (a - b) * (xs[i + 1] - xs[i]);
                    if (std::isnan(pos) ||
                        (!std::isnan(last) && std::abs(x - last) < std::abs(pos - last)))
                        pos = x;
                    if (std::isnan(last)) break;
                }
            }
            // A crossing within an edge block means the defect is leaving.
            if (!std::isnan(pos) && (pos <= xs[edge] || pos >= xs[n - 1 - edge])) pos = kNaN;
        }
        if (std::isnan(pos)) {
            if (started) {
                ds.truncated = true;
                break;
            }
            continue;
        }
        started = true;
        last = pos;
        ds.times.push_back(track.times[k]);
        ds.positions.push_back(pos);
    }
    if (ds.times.size() < 10)
        throw Error(ErrorKind::insufficient_data,
                    "defect tracked in " + std::to_string(ds.times.size()) + " snapshots");
    const double t_cut = ds.times.back() - trailing_fraction * (ds.times.back() - ds.times.front());
    std::vector<double> ft, fx;
    for (std::size_t i = 0; i < ds.times.size(); ++i)
        if (ds.times[i] >= t_cut - 1e-9) {
            ft.push_back(ds.times[i]);
            fx.push_back(ds.positions[i]);
        }
    if (ft.size() < 3) throw Error(ErrorKind::insufficient_data, "trailing window holds fewer than 3 samples");
    const auto f = linear_fit(ft, fx);
    ds.speed = f.slope;
    ds.stderr_speed = f.slope_stderr;
    return ds;
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> values, DecayKind kind,
                   double trailing_fraction) {
    if (times.size() != values.size())
        throw Error(ErrorKind::invalid_argument, "times and values differ in length");
    if (!(trailing_fraction > 0.0 && trailing_fraction <= 1.0))
        throw Error(ErrorKind::invalid_argument, "trailing fraction must lie in (0, 1]");
    DecayFit fit;
    fit.kind = kind;
    std::vector<double> t, v;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (values[i] > 0.0 && std::isfinite(values[i])) {
            t.push_back(times[i]);
            v.push_back(values[i]);
        } else {
            ++fit.dropped;
        }
    }
    if (t.size() < 10)
        throw Error(ErrorKind::insufficient_data,
                    std::to_string(t.size()) + " positive samples, need 10");
    const double t_min = *std::min_element(t.begin(), t.end());
    const double t_max = *std::max_element(t.begin(), t.end());
    const double cut = t_max - trailing_fraction * (t_max - t_min);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < cut) continue;
        x.push_back(kind == DecayKind::algebraic ? std::log1p(t[i]) : t[i]);
        y.push_back(std::log(v[i]));
    }
    if (x.size() < 3) throw Error(ErrorKind::insufficient_data, "trailing window too short");
    const auto f = linear_fit(x, y);
    fit.exponent_or_rate = f.slope;
    fit.prefactor = std::exp(f.intercept);
    fit.t_lo = cut;
    fit.t_hi = t_max;
    fit.r2 = std::clamp(f.r2, 0.0, 1.0);
    fit.used = static_cast<int>(x.size());
    return fit;
}

LightconeSeries lightcone_norms(const Trajectory& traj, const FrontProfile& fp, double psi_inf,
                                double c_g, double delta_c, double eta0, double t0) {
    if (!(delta_c > 0.0) || !(c_g + delta_c < 0.0))
        throw Error(ErrorKind::invalid_argument, "light cones need delta_c > 0 and c_g + delta_c < 0");
    const Weight w0{0.0, eta0};
    LightconeSeries out;
    for (const State& s : traj.snapshots) {
        const double tau = s.t - t0;
        if (tau < 0.0) continue;
        const double xr = (c_g + delta_c) * tau, xl = (c_g - delta_c) * tau;
        double right = kNaN, left = kNaN;
        for (int i = 0; i < s.grid.n; ++i) {
            const double xi = s.grid.x(i);
            if (xi >= xr) {
                const double du = s.u[i] - profile_at(fp, fp.u_ps, xi + psi_inf);
                const double dw = s.w[i] - profile_at(fp, fp.w_ps, xi + psi_inf);
                const double v = weight_eval(w0, xi) * std::hypot(du, dw);
                right = std::isnan(right) ? v : std::max(right, v);
            }
            if (xi <= xl) {
                const double du = s.u[i] - profile_at(fp, fp.u_ps, xi);
                const double dw = s.w[i] - profile_at(fp, fp.w_ps, xi);
                const double v = weight_eval(w0, xi) * std::hypot(du, dw);
                left = std::isnan(left) ? v : std::max(left, v);
            }
        }
        out.times.push_back(tau);
        out.right.push_back(right);
        out.left.push_back(left);
    }
    return out;
}

double best_shift(const State& state, const FrontProfile& fp, double eta0, double K,
                  double s_range, double* misfit_min, double* contrast) {
    const Weight w0{0.0, eta0};
    std::vector<int> idx;
    std::vector<double> om;
    for (int i = 0; i < state.grid.n; ++i)
        if (state.grid.x(i) >= -K) {
            idx.push_back(i);
            om.push_back(weight_eval(w0, state.grid.x(i)));
        }
    if (idx.empty()) throw Error(ErrorKind::window_too_small, "no grid points with xi >= -K");
    auto misfit = [&](double s) {
        double m = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double xi = state.grid.x(idx[k]);
            const double du = state.u[idx[k]] - profile_at(fp, fp.u_ps, xi + s);
            const double dw = state.w[idx[k]] - profile_at(fp, fp.w_ps, xi + s);
            m = std::max(m, om[k] * std::hypot(du, dw));
        }
        return m;
    };
    const double ds = 0.25 * std::min(state.grid.h(), fp.grid.h());
    const int ns = static_cast<int>(std::ceil(s_range / ds));
    double best_s = 0.0, best = std::numeric_limits<double>::infinity(), worst = 0.0;
    for (int j = -ns; j <= ns; ++j) {
        const double m = misfit(j * ds);
        worst = std::max(worst, m);
        if (m < best) {
            best = m;
            best_s = j * ds;
        }
    }
    const double c = worst > 0.0 ? (worst - best) / worst : 0.0;
    if (c < 1e-3)
        throw Error(ErrorKind::phase_undetermined, "misfit landscape is flat over the shift scan");
    // Golden-section refinement on the bracketing cells.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_s - ds, b = best_s + ds;
    double x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = misfit(x1), f2 = misfit(x2);
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = misfit(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = misfit(x2);
        }
    }
    const double s = 0.5 * (a + b);
    const double fs = misfit(s);
    if (misfit_min) *misfit_min = std::min(fs, best);
    if (contrast) *contrast = c;
    return fs <= best ? s : best_s;
}

AsymptoticPhase asymptotic_phase(const Trajectory& traj, const FrontProfile& fp,
                                 const PointSpectrumReport& report, const State& w0, double K,
                                 double s_range) {
    if (traj.snapshots.empty()) throw Error(ErrorKind::missing_data, "trajectory has no snapshots");
    AsymptoticPhase ap;
    ap.psi_inf_measured = best_shift(traj.snapshots.back(), fp, report.eta0, K, s_range,
                                     &ap.misfit_min, &ap.misfit_contrast);
    const Grid& g = report.grid;
    const Weight om{0.0, report.eta0};
    std::vector<double> fu(g.n, 0.0), fw(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double xi = g.x(i);
        if (xi < w0.grid.x_min || xi > w0.grid.x_max) continue;
        const double wt = weight_eval(om, xi);
        fu[i] = wt * interp_cubic(w0.u, w0.grid.x_min, w0.grid.h(), xi);
        fw[i] = wt * interp_cubic(w0.w, w0.grid.x_min, w0.grid.h(), xi);
    }
    ap.ptr_predicted = ptr(fu, fw, report);
    return ap;
}

}  // namespace invasionlab

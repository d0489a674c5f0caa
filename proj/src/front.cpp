#include "invasionlab/front.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

double default_front_level(const Params& p) { return 0.5 * (1.0 - p.a); }

double front_position(const State& s, double level) {
    const Grid& g = s.grid;
    for (int i = g.n - 2; i >= 0; --i)
        if (s.u[i] >= level && s.u[i + 1] < level)
            return g.x(i) + (s.u[i] - level) / (s.u[i] - s.u[i + 1]) * g.h();
    throw Error(ErrorKind::front_not_found, "no downward crossing of level " + std::to_string(level));
}

SpeedFit measure_speed(std::span<const double> times, std::span<const double> positions) {
    const std::size_t n = times.size();
    if (n < 10 || positions.size() != n)
        throw Error(ErrorKind::insufficient_data, "speed fit needs at least 10 samples");
    const std::size_t start = n / 2;
    const auto f = linear_fit(times.subspan(start), positions.subspan(start));
    return {f.slope, f.slope_stderr};
}

std::vector<double> front_positions(const Trajectory& traj, double level) {
    std::vector<double> p;
    p.reserve(traj.snapshots.size());
    for (const auto& s : traj.snapshots) p.push_back(front_position(s, level));
    return p;
}

FrontProfile extract_front(const Trajectory& traj, const Params& params, const ExtractOptions& opts) {
    const int ns = static_cast<int>(traj.snapshots.size());
    if (ns < opts.K) throw Error(ErrorKind::insufficient_data, "fewer snapshots than K");
    const double level = opts.level < 0 ? default_front_level(params) : opts.level;

    std::vector<double> times, pos;
    for (int k = ns / 2; k < ns; ++k) {
        times.push_back(traj.snapshots[k].t);
        pos.push_back(front_position(traj.snapshots[k], level));
    }
    const Grid& g0 = traj.snapshots.back().grid;
    const double h = g0.h();
    std::vector<double> last(opts.K);
    double lo = -1e300, hi = 1e300;
    for (int j = 0; j < opts.K; ++j) {
        const State& s = traj.snapshots[ns - opts.K + j];
        last[j] = front_position(s, level);
        lo = std::max(lo, s.grid.x_min - last[j]);
        hi = std::min(hi, s.grid.x_max - last[j]);
    }
    // Common grid aligned with the last snapshot's nodes.
    const double anchor = g0.x_min - last.back();
    const int i0 = static_cast<int>(std::ceil((lo - anchor) / h - 1e-9));
    const int i1 = static_cast<int>(std::floor((hi - anchor) / h + 1e-9));
    FrontProfile fp;
    fp.grid = Grid{anchor + i0 * h, anchor + i1 * h, i1 - i0 + 1};
    fp.grid.validate();
    const int n = fp.grid.n;
    std::vector<std::vector<double>> au(opts.K, std::vector<double>(n)),
        aw(opts.K, std::vector<double>(n));
    for (int j = 0; j < opts.K; ++j) {
        const State& s = traj.snapshots[ns - opts.K + j];
        for (int i = 0; i < n; ++i) {
            const double x = fp.grid.x(i) + last[j];
            au[j][i] = interp_cubic(s.u, s.grid.x_min, s.grid.h(), x);
            aw[j][i] = interp_cubic(s.w, s.grid.x_min, s.grid.h(), x);
        }
    }
    fp.u_ps.assign(n, 0.0);
    fp.w_ps.assign(n, 0.0);
    for (int j = 0; j < opts.K; ++j)
        for (int i = 0; i < n; ++i) {
            fp.u_ps[i] += au[j][i] / opts.K;
            fp.w_ps[i] += aw[j][i] / opts.K;
        }
    double res = 0.0;
    for (int a = 0; a < opts.K; ++a)
        for (int b = a + 1; b < opts.K; ++b)
            for (int i = 0; i < n; ++i) {
                if (std::abs(fp.grid.x(i)) > opts.window) continue;
                res = std::max({res, std::abs(au[a][i] - au[b][i]), std::abs(aw[a][i] - aw[b][i])});
            }
    fp.alignment_residual = res;
    fp.c_ps = opts.frame_speed + (times.size() >= 10 ? measure_speed(times, pos).c : 0.0);
    if (res > opts.max_residual)
        throw Error(ErrorKind::front_not_converged,
                    "alignment residual " + std::to_string(res) + " exceeds " +
                        std::to_string(opts.max_residual));
    try {
        fp.eta_ps = fit_tail_decay(fp).eta;
    } catch (const Error&) {
        fp.eta_ps = 0.0;
    }
    return fp;
}

TailFit fit_tail_decay(const FrontProfile& fp, double hi, double lo, double floor) {
    const Grid& g = fp.grid;
    std::vector<double> xs, ys;
    double vmax = 0.0, vmin = 1e300;
    // Walk right from the interface and keep the first contiguous window.
    int start = 0;
    for (int i = g.n - 1; i >= 0; --i)
        if (std::abs(fp.u_ps[i]) > hi) {
            start = i + 1;
            break;
        }
    for (int i = start; i < g.n; ++i) {
        const double v = std::abs(fp.u_ps[i]);
        if (v < lo || v <= floor) break;
        if (v > hi) continue;
        xs.push_back(g.x(i));
        ys.push_back(-std::log(v));
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    if (xs.size() < 5 || vmin < floor || vmax / vmin < 1e3)
        throw Error(ErrorKind::insufficient_decades, "leading edge spans fewer than three decades");
    const auto f = linear_fit(xs, ys);
    TailFit t;
    t.eta = f.slope;
    t.prefactor = std::exp(-f.intercept);
    t.r2 = f.r2;
    t.xi_lo = xs.front();
    t.xi_hi = xs.back();
    return t;
}

double wake_mismatch(const FrontProfile& fp, const WaveTrain& wt, double xi_lo, double xi_hi) {
    auto sup_at = [&](double s) {
        double m = 0.0;
        for (int i = 0; i < fp.grid.n; ++i) {
            const double xi = fp.grid.x(i);
            if (xi < xi_lo || xi > xi_hi) continue;
            m = std::max(m, std::abs(fp.u_ps[i] - wavetrain_eval(wt, 0, xi + s)));
        }
        return m;
    };
    const int coarse = 400;
    double best_s = 0.0, best = 1e300;
    for (int k = 0; k < coarse; ++k) {
        const double s = wt.L * k / coarse;
        const double v = sup_at(s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }
    double step = wt.L / coarse;
    for (int it = 0; it < 40; ++it) {
        for (double s : {best_s - step, best_s + step}) {
            const double v = sup_at(s);
            if (v < best) {
                best = v;
                best_s = s;
            }
        }
        step *= 0.6;
    }
    return best;
}

double stationarity_defect(const FrontProfile& fp, const Params& params, double dt, double t,
                           double eta0, double window) {
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.frame_speed = fp.c_ps;
    cfg.t_end = t;
    cfg.record_every = std::max(1L, std::lround(t / dt));
    State s{fp.grid, 0.0, fp.u_ps, fp.w_ps};
    const auto traj = run(s, params, cfg, {});
    const State& e = traj.snapshots.back();
    const Weight w0{0.0, eta0};
    double m = 0.0;
    for (int i = 0; i < fp.grid.n; ++i) {
        const double xi = fp.grid.x(i);
        if (std::abs(xi) > window) continue;
        const double wt = weight_eval(w0, xi);
        m = std::max({m, wt * std::abs(e.u[i] - fp.u_ps[i]), wt * std::abs(e.w[i] - fp.w_ps[i])});
    }
    return m;
}

FrontProfile resample_front(const FrontProfile& fp, const Grid& grid) {
    FrontProfile out = fp;
    out.grid = grid;
    out.u_ps.resize(grid.n);
    out.w_ps.resize(grid.n);
    const double h = fp.grid.h();
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x > fp.grid.x_max) {
            out.u_ps[i] = 0.0;
            out.w_ps[i] = 0.0;
            continue;
        }
        out.u_ps[i] = interp_cubic(fp.u_ps, fp.grid.x_min, h, x);
        out.w_ps[i] = interp_cubic(fp.w_ps, fp.grid.x_min, h, x);
    }
    return out;
}

FrontProfile polish_front(const FrontProfile& fp, const Params& p, const Grid& grid, const PolishOptions& opts,
                          PolishReport* report) {
    FrontProfile out = resample_front(fp, grid);
    const int n = grid.n;
    const double h = grid.h();
    int jp = static_cast<int>(std::lround(-grid.x_min / h));
    if (jp <= 0 || jp >= n - 1) throw Error(ErrorKind::invalid_argument, "grid does not contain xi = 0");
    const double pin = out.u_ps[jp];
    const int N = 2 * n + 1;  // (u, w, c)
    Eigen::VectorXd z(N);
    for (int i = 0; i < n; ++i) {
        z(i) = out.u_ps[i];
        z(n + i) = out.w_ps[i];
    }
    z(2 * n) = out.c_ps;
    auto neighbours = [&](int i) {
        // Neumann ghost on the left
        const int l = i == 0 ? 1 : i - 1;
        return std::pair<int, int>{l, i + 1};
    };
    const double kd = -opts.w_dissipation / h;
    std::vector<double> om(n);
    for (int i = 0; i < n; ++i) om[i] = weight_eval(Weight{0.0, opts.scale_eta}, grid.x(i));
    auto scale = [&](int row) { return row < 2 * n ? om[row % n] : 1.0; };
    auto residual = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r(N);
        const double c = v(2 * n);
        for (int i = 0; i < n - 1; ++i) {
            const auto [l, rr] = neighbours(i);
            const double u = v(i), w = v(n + i);
            const auto f = reaction(p, u, w);
            const double dxu = i == 0 ? 0.0 : (v(rr) - v(l)) / (2 * h);
            const double dxw = i == 0 ? 0.0 : (v(n + rr) - v(n + l)) / (2 * h);
            r(i) = (v(rr) - 2 * u + v(l)) / (h * h) + c * dxu + f[0];
            r(n + i) = c * dxw + f[1];
            if (i >= 2 && i < n - 2)
                r(n + i) += kd * (v(n + i - 2) - 4 * v(n + i - 1) + 6 * w - 4 * v(n + i + 1) + v(n + i + 2));
        }
        r(n - 1) = v(n - 1);
        r(2 * n - 1) = v(2 * n - 1);
        r(2 * n) = v(jp) - pin;
        for (int q = 0; q < N; ++q) r(q) *= scale(q);
        return r;
    };
    PolishReport rep;
    Eigen::VectorXd r = residual(z);
    for (int it = 0; it < opts.max_iter && r.lpNorm<Eigen::Infinity>() > opts.tol; ++it) {
        std::vector<Eigen::Triplet<double>> tr;
        tr.reserve(10 * n);
        const double c = z(2 * n);
        for (int i = 0; i < n - 1; ++i) {
            const auto [l, rr] = neighbours(i);
            const auto J = jacobian(p, z(i), z(n + i));
            const double adv = i == 0 ? 0.0 : c / (2 * h);
            tr.emplace_back(i, i, -2.0 / (h * h) + J[0][0]);
            tr.emplace_back(i, l, 1.0 / (h * h) - adv);
            tr.emplace_back(i, rr, 1.0 / (h * h) + adv);
            tr.emplace_back(i, n + i, J[0][1]);
            tr.emplace_back(n + i, i, J[1][0]);
            tr.emplace_back(n + i, n + i, J[1][1]);
            if (i >= 2 && i < n - 2) {
                const double st[5] = {1, -4, 6, -4, 1};
                for (int q = 0; q < 5; ++q) tr.emplace_back(n + i, n + i - 2 + q, kd * st[q]);
            }
            if (i > 0) {
                tr.emplace_back(n + i, n + l, -adv);
                tr.emplace_back(n + i, n + rr, adv);
                tr.emplace_back(i, 2 * n, (z(rr) - z(l)) / (2 * h));
                tr.emplace_back(n + i, 2 * n, (z(n + rr) - z(n + l)) / (2 * h));
            }
        }
        tr.emplace_back(n - 1, n - 1, 1.0);
        tr.emplace_back(2 * n - 1, 2 * n - 1, 1.0);
        tr.emplace_back(2 * n, jp, 1.0);
        for (auto& t : tr) t = {t.row(), t.col(), t.value() * scale(t.row()) / scale(t.col())};
        Eigen::SparseMatrix<double> A(N, N);
        A.setFromTriplets(tr.begin(), tr.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::no_convergence, "singular Jacobian in front polish");
        const Eigen::VectorXd dz = lu.solve(r);
        for (int q = 0; q < N; ++q) z(q) -= dz(q) / scale(q);
        r = residual(z);
        ++rep.newton_steps;
    }
    rep.residual = r.lpNorm<Eigen::Infinity>();
    if (!(rep.residual <= opts.tol)) throw Error(ErrorKind::no_convergence, "front polish did not converge");
    rep.speed_change = z(2 * n) - out.c_ps;
    for (int i = 0; i < n; ++i) {
        out.u_ps[i] = z(i);
        out.w_ps[i] = z(n + i);
    }
    out.c_ps = z(2 * n);
    if (report) *report = rep;
    return out;
}

}  // namespace invasionlab

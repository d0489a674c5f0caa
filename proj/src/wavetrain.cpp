#include "invasionlab/wavetrain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

namespace {

using Vec = Eigen::VectorXd;

struct Collocation {
    Eigen::MatrixXd d1, d2;
    explicit Collocation(int m) : d1(fourier_d1(m)), d2(fourier_d2(m)) {}
};

Vec residual_vector(const Params& p, double c, const Collocation& col, const Vec& u, const Vec& w,
                    double L) {
    const int m = static_cast<int>(u.size());
    Vec r(2 * m);
    const Vec d1u = col.d1 * u, d2u = col.d2 * u, d1w = col.d1 * w;
    for (int i = 0; i < m; ++i) {
        r(i) = d2u(i) / (L * L) + c * d1u(i) / L + cubic(p, u(i)) - w(i);
        r(m + i) = c * d1w(i) / L + p.eps * (u(i) - p.gamma * w(i));
    }
    return r;
}

// Real trigonometric interpolant of equispaced samples on [0, 1).
struct TrigSeries {
    std::vector<std::complex<double>> coef;  // k = 0..m/2
    int m = 0;

    explicit TrigSeries(const std::vector<double>& v) : m(static_cast<int>(v.size())) {
        coef.assign(m / 2 + 1, 0.0);
        for (int k = 0; k <= m / 2; ++k) {
            std::complex<double> s = 0.0;
            for (int j = 0; j < m; ++j)
                s += v[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / m);
            coef[k] = s / static_cast<double>(m);
        }
    }

    double operator()(double sigma) const {
        double s = coef[0].real();
        for (int k = 1; k < m / 2; ++k)
            s += 2.0 * (coef[k] * std::polar(1.0, 2.0 * std::numbers::pi * k * sigma)).real();
        s += coef[m / 2].real() * std::cos(std::numbers::pi * m * sigma);
        return s;
    }
};

}  // namespace

double wavetrain_residual(const Params& params, const WaveTrain& wt) {
    const Collocation col(wt.m);
    const Vec u = Eigen::Map<const Vec>(wt.profile_u.data(), wt.m);
    const Vec w = Eigen::Map<const Vec>(wt.profile_w.data(), wt.m);
    return residual_vector(params, wt.c, col, u, w, wt.L).cwiseAbs().maxCoeff();
}

WaveTrain solve_wavetrain(const Params& p, double c, const WaveTrain& guess,
                          const NewtonOptions& opts) {
    const int m = guess.m;
    if (!(guess.L > 0.0) || static_cast<int>(guess.profile_u.size()) != m ||
        static_cast<int>(guess.profile_w.size()) != m)
        throw Error(ErrorKind::invalid_argument, "wave-train guess needs m samples and L > 0");
    const Collocation col(m);
    const Vec ug = Eigen::Map<const Vec>(guess.profile_u.data(), m);
    const Vec dug = col.d1 * ug;
    const double phase_scale = 1.0 / m;

    Vec u = ug;
    Vec w = Eigen::Map<const Vec>(guess.profile_w.data(), m);
    double L = guess.L;
    Vec r = residual_vector(p, c, col, u, w, L);
    double res = r.cwiseAbs().maxCoeff();
    int iter = 0;
    const int n = 2 * m + 1;
    while (res > opts.tol) {
        if (iter >= opts.max_iter)
            throw Error(ErrorKind::no_convergence,
                        "wave-train Newton stalled after " + std::to_string(iter) +
                            " steps, residual " + std::to_string(res));
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        J.block(0, 0, m, m) = col.d2 / (L * L) + c * col.d1 / L;
        J.block(m, m, m, m) = c * col.d1 / L;
        const Vec d1u = col.d1 * u, d2u = col.d2 * u, d1w = col.d1 * w;
        for (int i = 0; i < m; ++i) {
            J(i, i) += cubic_prime(p, u(i));
            J(i, m + i) = -1.0;
            J(m + i, i) = p.eps;
            J(m + i, m + i) -= p.eps * p.gamma;
            J(i, 2 * m) = -2.0 * d2u(i) / (L * L * L) - c * d1u(i) / (L * L);
            J(m + i, 2 * m) = -c * d1w(i) / (L * L);
            J(2 * m, i) = phase_scale * dug(i);
        }
        Vec F(n);
        F.head(2 * m) = r;
        F(2 * m) = phase_scale * dug.dot(u - ug);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        if (!(lu.rcond() > 1e-15))
            throw Error(ErrorKind::rank_deficient, "wave-train Jacobian is numerically singular");
        const Vec delta = lu.solve(F);
        double lambda = 1.0;
        for (;;) {
            const Vec un = u - lambda * delta.head(m);
            const Vec wn = w - lambda * delta.segment(m, m);
            const double Ln = L - lambda * delta(2 * m);
            if (Ln > 0.0) {
                const Vec rn = residual_vector(p, c, col, un, wn, Ln);
                const double resn = rn.cwiseAbs().maxCoeff();
                if (resn < res || lambda < 1.0 / 64) {
                    u = un;
                    w = wn;
                    L = Ln;
                    r = rn;
                    res = resn;
                    break;
                }
            }
            lambda *= 0.5;
            if (lambda < 1.0 / 1024)
                throw Error(ErrorKind::no_convergence, "wave-train line search failed, residual " +
                                                           std::to_string(res));
        }
        ++iter;
    }
    WaveTrain out;
    out.m = m;
    out.profile_u.assign(u.data(), u.data() + m);
    out.profile_w.assign(w.data(), w.data() + m);
    out.L = L;
    out.k_wt = 2.0 * std::numbers::pi / L;
    out.c = c;
    out.residual = res;
    out.newton_steps = iter;
    return out;
}

WaveTrain resample_wavetrain(const WaveTrain& wt, int m_new) {
    const TrigSeries su(wt.profile_u), sw(wt.profile_w);
    WaveTrain out = wt;
    out.m = m_new;
    out.profile_u.resize(m_new);
    out.profile_w.resize(m_new);
    for (int j = 0; j < m_new; ++j) {
        out.profile_u[j] = su(static_cast<double>(j) / m_new);
        out.profile_w[j] = sw(static_cast<double>(j) / m_new);
    }
    return out;
}

double wavetrain_eval(const WaveTrain& wt, int component, double xi) {
    const auto& v = component == 0 ? wt.profile_u : wt.profile_w;
    return interp_cubic_periodic(v, 0.0, wt.h(), xi);
}

HomogeneousOrbit homogeneous_oscillation(const Params& p, const OrbitOptions& opts) {
    auto rhs = [&](double u, double w) { return reaction(p, u, w); };
    auto rk4 = [&](double& u, double& w, double dt) {
        const auto k1 = rhs(u, w);
        const auto k2 = rhs(u + 0.5 * dt * k1[0], w + 0.5 * dt * k1[1]);
        const auto k3 = rhs(u + 0.5 * dt * k2[0], w + 0.5 * dt * k2[1]);
        const auto k4 = rhs(u + dt * k3[0], w + dt * k3[1]);
        u += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        w += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    };
    const double dt = opts.dt;
    double u = 0.5, w = 0.0;
    const long ntr = std::lround(opts.t_transient / dt);
    for (long k = 0; k < ntr; ++k) rk4(u, w, dt);

    // Record a long stretch to locate the mean and the crossings.
    const double span = opts.t_transient;
    const long nrec = std::lround(span / dt);
    std::vector<double> us(nrec + 1), ws(nrec + 1);
    us[0] = u;
    ws[0] = w;
    for (long k = 1; k <= nrec; ++k) {
        rk4(u, w, dt);
        us[k] = u;
        ws[k] = w;
    }
    const auto [mn, mx] = std::minmax_element(us.begin(), us.end());
    if (*mx - *mn < 1e-6)
        throw Error(ErrorKind::regime, "spatially constant dynamics converge to a point");
    double mean = 0.0;
    for (double v : us) mean += v;
    mean /= us.size();
    std::vector<double> cross;
    std::vector<long> idx;
    for (long k = 0; k < nrec; ++k)
        if (us[k] < mean && us[k + 1] >= mean) {
            cross.push_back((k + (mean - us[k]) / (us[k + 1] - us[k])) * dt);
            idx.push_back(k);
        }
    if (static_cast<int>(cross.size()) < opts.periods_averaged + 1)
        throw Error(ErrorKind::regime, "too few oscillations after transients");
    const int np = opts.periods_averaged;
    const std::size_t last = cross.size() - 1;
    const double T = (cross[last] - cross[last - np]) / np;

    HomogeneousOrbit orb;
    orb.T = T;
    orb.u_mean = mean;
    // Re-integrate from the state just before the crossing to sample one period.
    const long k0 = idx[last - np];
    double uu = us[k0], ww = ws[k0];
    const double frac = cross[last - np] / dt - k0;
    rk4(uu, ww, frac * dt);
    const long nper = std::lround(T / dt);
    orb.t.resize(nper);
    orb.u.resize(nper);
    orb.w.resize(nper);
    const double sub = T / nper;
    for (long k = 0; k < nper; ++k) {
        orb.t[k] = k * sub;
        orb.u[k] = uu;
        orb.w[k] = ww;
        rk4(uu, ww, sub);
    }
    return orb;
}

WaveTrain wavetrain_from_orbit(const HomogeneousOrbit& orbit, double c, int m) {
    WaveTrain wt;
    wt.m = m;
    wt.c = c;
    wt.L = c * orbit.T;
    wt.k_wt = 2.0 * std::numbers::pi / wt.L;
    wt.profile_u.resize(m);
    wt.profile_w.resize(m);
    const double dtk = orbit.T / orbit.t.size();
    for (int j = 0; j < m; ++j) {
        // U(sigma L) = orbit(T - sigma T)
        const double t = orbit.T * (1.0 - static_cast<double>(j) / m);
        wt.profile_u[j] = interp_cubic_periodic(orbit.u, 0.0, dtk, t);
        wt.profile_w[j] = interp_cubic_periodic(orbit.w, 0.0, dtk, t);
    }
    return wt;
}

WavelengthQuadrature wavelength_quadrature(const Params& p, RootConvention conv, double tol) {
    const double root = conv == RootConvention::printed ? std::sqrt(1 + p.a + p.a * p.a)
                                                        : std::sqrt(1 - p.a + p.a * p.a);
    WavelengthQuadrature q;
    q.u1_minus = (1 - 2 * p.a - root) / 3;
    q.u1_plus = (1 - 2 * p.a + root) / 3;
    q.u2_minus = (1 - 2 * p.a - 2 * root) / 3;
    q.u2_plus = (1 - 2 * p.a + 2 * root) / 3;
    auto denom = [&](double u) { return p.gamma * cubic(p, u) - u; };
    auto integrand = [&](double u) {
        return (1 + p.a) * cubic_prime(p, u) / (std::numbers::sqrt2 * denom(u));
    };
    auto integrate = [&](double lo, double hi, double& err) {
        // Chebyshev nodes of the open interval must share the denominator's sign.
        const int nodes = 64;
        double sign0 = 0.0;
        for (int k = 0; k < nodes; ++k) {
            const double s = std::cos(std::numbers::pi * (k + 0.5) / nodes);
            const double u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s;
            const double d = denom(u);
            if (d == 0.0 || (sign0 != 0.0 && (d > 0) != (sign0 > 0)))
                throw Error(ErrorKind::singular_integrand,
                            "gamma f(u) - u changes sign near u = " + std::to_string(u));
            sign0 = d;
        }
        double e = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, lo, hi, 20, tol, &e);
        err += std::abs(e);
        return v;
    };
    q.L_minus = integrate(q.u1_minus, q.u2_minus, q.error_estimate);
    q.L_plus = integrate(q.u1_plus, q.u2_plus, q.error_estimate);
    return q;
}

std::vector<double> upward_crossings(const State& s, double xi_lo, double xi_hi, double level) {
    std::vector<double> out;
    const Grid& g = s.grid;
    for (int i = 0; i + 1 < g.n; ++i) {
        const double x0 = g.x(i), x1 = g.x(i + 1);
        if (x0 < xi_lo || x1 > xi_hi) continue;
        if (s.u[i] < level && s.u[i + 1] >= level)
            out.push_back(x0 + (level - s.u[i]) / (s.u[i + 1] - s.u[i]) * g.h());
    }
    return out;
}

WaveTrain wavetrain_from_state(const State& s, double xi_lo, double xi_hi, double c, int m) {
    const Grid& g = s.grid;
    double mean = 0.0;
    int cnt = 0;
    for (int i = 0; i < g.n; ++i)
        if (g.x(i) >= xi_lo && g.x(i) <= xi_hi) {
            mean += s.u[i];
            ++cnt;
        }
    if (cnt == 0) throw Error(ErrorKind::window_too_small, "window contains no samples");
    mean /= cnt;
    const auto cr = upward_crossings(s, xi_lo, xi_hi, mean);
    if (cr.size() < 3)
        throw Error(ErrorKind::window_too_small,
                    "found " + std::to_string(cr.size()) + " upward crossings, need 3");
    const double L = (cr.back() - cr.front()) / (cr.size() - 1);
    WaveTrain wt;
    wt.m = m;
    wt.c = c;
    wt.L = L;
    wt.k_wt = 2.0 * std::numbers::pi / L;
    wt.profile_u.resize(m);
    wt.profile_w.resize(m);
    for (int j = 0; j < m; ++j) {
        const double x = cr.front() + L * j / m;
        wt.profile_u[j] = interp_cubic(s.u, g.x_min, g.h(), x);
        wt.profile_w[j] = interp_cubic(s.w, g.x_min, g.h(), x);
    }
    return wt;
}

WaveTrain wavetrain_from_simulation(const Trajectory& traj, double xi_lo, double xi_hi, double c,
                                    int m) {
    if (traj.snapshots.empty()) throw Error(ErrorKind::missing_data, "empty trajectory");
    return wavetrain_from_state(traj.snapshots.back(), xi_lo, xi_hi, c, m);
}

}  // namespace invasionlab

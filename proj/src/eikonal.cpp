#include "invasionlab/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

void EikonalConfig::validate() const {
    if (!(D_eff > 0.0)) throw Error(ErrorKind::config, "eikonal.D_eff must be positive");
    if (!(dt > 0.0)) throw Error(ErrorKind::config, "eikonal.dt must be positive");
    if (record_every < 1) throw Error(ErrorKind::config, "eikonal.record_every must be >= 1");
    if (!std::isfinite(c_g) || !std::isfinite(beta)) throw Error(ErrorKind::config, "eikonal coefficients must be finite");
    grid.validate();
}

PhaseTrajectory eikonal_run(std::span<const double> psi0, const EikonalConfig& cfg, double t_end) {
    cfg.validate();
    const Grid& g = cfg.grid;
    const int n = g.n;
    if (static_cast<int>(psi0.size()) != n) throw Error(ErrorKind::grid_mismatch, "psi0 does not match the grid");
    for (double v : psi0)
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "psi0 is not finite");
    const double h = g.h(), dt = cfg.dt;
    // L psi = D psi_xx - c_g psi_x
    std::vector<double> lo(n, cfg.D_eff / (h * h) + cfg.c_g / (2 * h));
    std::vector<double> di(n, -2.0 * cfg.D_eff / (h * h));
    std::vector<double> up(n, cfg.D_eff / (h * h) - cfg.c_g / (2 * h));
    up[0] += lo[0];
    lo[0] = 0.0;
    lo[n - 1] += up[n - 1];
    up[n - 1] = 0.0;
    std::vector<double> l(n), d(n), u(n);
    for (int i = 0; i < n; ++i) {
        l[i] = -0.5 * dt * lo[i];
        d[i] = 1.0 - 0.5 * dt * di[i];
        u[i] = -0.5 * dt * up[i];
    }
    const Tridiagonal solver(l, d, u, false);

    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        out[0] = di[0] * x[0] + up[0] * x[1];
        for (int i = 1; i < n - 1; ++i) out[i] = lo[i] * x[i - 1] + di[i] * x[i] + up[i] * x[i + 1];
        out[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
    };
    auto quad = [&](const std::vector<double>& x, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (cfg.beta == 0.0) return;
        for (int i = 1; i < n - 1; ++i) {
            const double dx = (x[i + 1] - x[i - 1]) / (2 * h);
            out[i] = cfg.beta * dx * dx;
        }
    };

    PhaseTrajectory tr;
    tr.grid = g;
    std::vector<double> psi(psi0.begin(), psi0.end());
    tr.times.push_back(0.0);
    tr.psi.push_back(psi);
    const long steps = std::lround(t_end / dt);
    std::vector<double> a0(n), q0(n), q1(n), pred(n);
    for (long k = 1; k <= steps; ++k) {
        apply(psi, a0);
        quad(psi, q0);
        for (int i = 0; i < n; ++i) pred[i] = psi[i] + 0.5 * dt * a0[i] + dt * q0[i];
        solver.solve(pred);
        quad(pred, q1);
        for (int i = 0; i < n; ++i) psi[i] += 0.5 * dt * a0[i] + 0.5 * dt * (q0[i] + q1[i]);
        solver.solve(psi);
        for (double v : psi)
            if (!std::isfinite(v)) throw BlowupError(k, k * dt);
        if (k % cfg.record_every == 0 || k == steps) {
            tr.times.push_back(k * dt);
            tr.psi.push_back(psi);
        }
    }
    return tr;
}

double erf_unnormalized(double z) { return 0.5 * std::sqrt(std::numbers::pi) * (1.0 + std::erf(z)); }

double erf_profile(double xi, double t, double c_g, double D0, double amplitude, double offset) {
    return offset + amplitude * erf_unnormalized((xi - c_g * t) / std::sqrt(D0 * (1.0 + t)));
}

ErfFit fit_erf(std::span<const double> xi, std::span<const double> psi, double t, double c_g, bool free_center) {
    const std::size_t n = xi.size();
    if (psi.size() != n || n < 8) throw Error(ErrorKind::insufficient_data, "erf fit needs at least 8 samples");
    const double sqpi = std::sqrt(std::numbers::pi);
    // Initial guess from the end values and the 10/50/90 percent level crossings.
    const double left = psi[0], right = psi[n - 1];
    double amp = (right - left) / sqpi;
    double off = left;
    auto crossing = [&](double frac, double fallback) {
        const double level = left + frac * (right - left);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double a = psi[i] - level, b = psi[i + 1] - level;
            if ((a <= 0.0) != (b <= 0.0)) return xi[i] + a / (a - b) * (xi[i + 1] - xi[i]);
        }
        return fallback;
    };
    const double xmax = crossing(0.5, c_g * t);
    // erf(z) = -0.8 at z = -0.9062, so the 10-90 width is 1.8124 s.
    const double width = std::abs(crossing(0.9, xmax + 1.0) - crossing(0.1, xmax - 1.0));
    double D0 = std::pow(width / 1.8124, 2) / (1.0 + t);
    if (!(D0 > 0.0) || !std::isfinite(D0)) D0 = 1.0;
    const int np = free_center ? 4 : 3;
    Eigen::VectorXd p(np);
    p(0) = std::log(D0);
    p(1) = amp;
    p(2) = off;
    if (free_center) p(3) = xmax - c_g * t;

    auto model = [&](const Eigen::VectorXd& q, double x, double* grad) {
        const double D = std::exp(q(0));
        const double sh = free_center ? q(3) : 0.0;
        const double s = std::sqrt(D * (1.0 + t));
        const double z = (x - c_g * t - sh) / s;
        const double E = erf_unnormalized(z);
        if (grad) {
            const double dEdz = std::exp(-z * z);
            grad[0] = q(1) * dEdz * (-0.5 * z);  // d/d log D
            grad[1] = E;
            grad[2] = 1.0;
            if (free_center) grad[3] = -q(1) * dEdz / s;
        }
        return q(2) + q(1) * E;
    };
    auto rss = [&](const Eigen::VectorXd& q) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = model(q, xi[i], nullptr) - psi[i];
            r += e * e;
        }
        return r;
    };

    ErfFit fit;
    double mu = 1e-3;
    double cur = rss(p);
    fit.residual_history.push_back(std::sqrt(cur / n));
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd J(n, np);
        Eigen::VectorXd r(n);
        double grad[4];
        for (std::size_t i = 0; i < n; ++i) {
            r(i) = model(p, xi[i], grad) - psi[i];
            for (int k = 0; k < np; ++k) J(i, k) = grad[k];
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = A.ldlt().solve(-g);
            const Eigen::VectorXd trial = p + step;
            const double val = rss(trial);
            if (std::isfinite(val) && val <= cur) {
                const double rel = (cur - val) / std::max(cur, 1e-300);
                p = trial;
                cur = val;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                if (rel < 1e-14 || step.norm() < 1e-12 * (1.0 + p.norm())) converged = true;
            } else {
                mu *= 4.0;
            }
        }
        fit.iterations = it + 1;
        fit.residual_history.push_back(std::sqrt(cur / n));
        if (!accepted) converged = g.norm() <= 1e-10 * (1.0 + std::sqrt(cur));
        if (converged || !accepted) break;
    }
    fit.D0 = std::exp(p(0));
    fit.amplitude = p(1);
    fit.offset = p(2);
    fit.shift = free_center ? p(3) : 0.0;
    fit.residual = std::sqrt(cur / n);
    if (!converged || !std::isfinite(fit.D0)) {
        std::ostringstream os;
        os << "erf fit did not converge; residual history:";
        for (double v : fit.residual_history) os << ' ' << v;
        throw Error(ErrorKind::fit_failed, os.str());
    }
    return fit;
}

}  // namespace invasionlab

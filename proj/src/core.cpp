#include "invasionlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "invasionlab/error.hpp"

namespace invasionlab {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::integration_blowup: return "integration-blowup";
        case ErrorKind::front_not_found: return "front-not-found";
        case ErrorKind::front_not_converged: return "front-not-converged";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::insufficient_decades: return "insufficient-decades";
        case ErrorKind::no_convergence: return "no-convergence";
        case ErrorKind::rank_deficient: return "rank-deficiency";
        case ErrorKind::regime: return "regime";
        case ErrorKind::singular_integrand: return "singular-integrand";
        case ErrorKind::window_too_small: return "window-too-small";
        case ErrorKind::no_root: return "no-root";
        case ErrorKind::pinching_undetermined: return "pinching-undetermined";
        case ErrorKind::no_spreading_speed: return "no-spreading-speed";
        case ErrorKind::branch_ambiguity: return "branch-ambiguity";
        case ErrorKind::multiplicity: return "multiplicity";
        case ErrorKind::hypothesis_violation: return "hypothesis-violation";
        case ErrorKind::solver: return "solver";
        case ErrorKind::grid_mismatch: return "grid-mismatch";
        case ErrorKind::low_coherence: return "low-coherence";
        case ErrorKind::fit_failed: return "fit-failed";
        case ErrorKind::phase_undetermined: return "phase-undetermined";
        case ErrorKind::truncated_track: return "truncated-track";
        case ErrorKind::config: return "config";
        case ErrorKind::missing_data: return "missing-data";
    }
    return "unknown";
}

void Params::validate() const {
    if (!(a > 0.0 && a < 1.0 / 3.0))
        throw Error(ErrorKind::invalid_argument, "params.a must lie in (0, 1/3)");
    if (!(gamma > 0.0 && gamma < 4.0))
        throw Error(ErrorKind::invalid_argument, "params.gamma must lie in (0, 4)");
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "params.eps must be positive");
}

std::vector<double> Grid::points() const {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = this->x(i);
    return x;
}

void Grid::validate() const {
    if (n < 3) throw Error(ErrorKind::invalid_argument, "grid.n must be at least 3");
    if (!(x_max > x_min)) throw Error(ErrorKind::invalid_argument, "grid.x_max must exceed grid.x_min");
}

Grid make_grid(double x_min, double x_max, double h) {
    Grid g{x_min, x_max, static_cast<int>(std::lround((x_max - x_min) / h)) + 1};
    g.validate();
    return g;
}

State State::zeros(const Grid& g, double t) {
    return State{g, t, std::vector<double>(g.n, 0.0), std::vector<double>(g.n, 0.0)};
}

bool State::finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(u.begin(), u.end(), ok) && std::all_of(w.begin(), w.end(), ok);
}

double cubic(const Params& p, double u) { return u * (u + p.a) * (1.0 - u - p.a); }

double cubic_prime(const Params& p, double u) {
    return -3.0 * u * u + 2.0 * (1.0 - 2.0 * p.a) * u + p.a * (1.0 - p.a);
}

std::array<double, 2> reaction(const Params& p, double u, double w) {
    return {cubic(p, u) - w, p.eps * (u - p.gamma * w)};
}

Mat2 jacobian(const Params& p, double u, double /*w*/) {
    return {{{cubic_prime(p, u), -1.0}, {p.eps, -p.eps * p.gamma}}};
}

namespace {

// h(s) = s^4 (s^2 - 6 s + 10) / 32 on [0, 2] and its derivatives.
double bridge(double s) { return s * s * s * s * (s * s - 6.0 * s + 10.0) / 32.0; }
double bridge_d1(double s) { return s * s * s * (3.0 * s * s - 15.0 * s + 20.0) / 16.0; }
double bridge_d2(double s) { return 15.0 * s * s * (s - 2.0) * (s - 2.0) / 16.0; }

}  // namespace

double weight_exponent(const Weight& w, double xi) {
    if (xi <= -1.0) return w.eta_minus * xi;
    if (xi >= 1.0) return w.eta_plus * xi;
    return w.eta_plus * bridge(xi + 1.0) - w.eta_minus * bridge(1.0 - xi);
}

double weight_log_slope(const Weight& w, double xi) {
    if (xi <= -1.0) return w.eta_minus;
    if (xi >= 1.0) return w.eta_plus;
    return w.eta_plus * bridge_d1(xi + 1.0) + w.eta_minus * bridge_d1(1.0 - xi);
}

double weight_log_curvature(const Weight& w, double xi) {
    if (xi <= -1.0 || xi >= 1.0) return 0.0;
    return w.eta_plus * bridge_d2(xi + 1.0) - w.eta_minus * bridge_d2(1.0 - xi);
}

double weight_eval(const Weight& w, double xi) { return std::exp(weight_exponent(w, xi)); }

double chi_minus(double xi) {
    const double s = std::clamp(-xi, 0.0, 1.0);
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double chi_plus(double xi) { return 1.0 - chi_minus(xi); }

double weighted_norm(std::span<const double> v, const Grid& grid, const Weight& weight,
                     NormKind kind) {
    if (static_cast<int>(v.size()) != grid.n)
        throw Error(ErrorKind::grid_mismatch, "array length differs from grid size");
    if (kind == NormKind::sup) {
        double m = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            if (v[i] == 0.0) continue;
            m = std::max(m, weight_eval(weight, grid.x(i)) * std::abs(v[i]));
        }
        return m;
    }
    double s = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double q = weight_eval(weight, grid.x(i)) * v[i];
        s += (i == 0 || i == grid.n - 1 ? 0.5 : 1.0) * q * q;
    }
    return std::sqrt(s * grid.h());
}

}  // namespace invasionlab

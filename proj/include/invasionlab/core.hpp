#pragma once

#include <array>
#include <span>
#include <vector>

namespace invasionlab {

/// Model parameters of u_t = u_xx + u(u+a)(1-u-a) - w, w_t = eps (u - gamma w).
struct Params {
    double a = 0.1;
    double gamma = 2.0;
    double eps = 0.01;
    double c = 0.0;  ///< frame speed, used by comoving operations

    /// Throws ErrorKind::invalid_argument outside 0 < a < 1/3, 0 < gamma < 4, eps > 0.
    void validate() const;
};

/// Uniform grid x_min + i h, i = 0..n-1.
struct Grid {
    double x_min = 0.0;
    double x_max = 1.0;
    int n = 3;

    double h() const { return (x_max - x_min) / (n - 1); }
    double x(int i) const { return x_min + i * h(); }
    std::vector<double> points() const;
    void validate() const;
};

/// Grid with spacing as close as possible to h covering [x_min, x_max].
Grid make_grid(double x_min, double x_max, double h);

struct State {
    Grid grid;
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> w;

    static State zeros(const Grid& g, double t = 0.0);
    bool finite() const;
};

/// Smooth two-sided exponential weight: exp(eta_minus xi) on xi <= -1,
/// exp(eta_plus xi) on xi >= 1.
struct Weight {
    double eta_minus = 0.0;
    double eta_plus = 0.0;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Cubic nonlinearity f(u) = u(u+a)(1-u-a).
double cubic(const Params& p, double u);
double cubic_prime(const Params& p, double u);

std::array<double, 2> reaction(const Params& p, double u, double w);
Mat2 jacobian(const Params& p, double u, double w);

/// Exponent E(xi) with weight = exp(E). Inside [-1,1] the exponent is
/// eta_plus h(xi+1) - eta_minus h(1-xi) with h(s) = s^4 (s^2 - 6s + 10) / 32,
/// the degree-six Hermite interpolant matching value and three derivatives
/// at both seams, so E is C^3 and monotone in each rate.
double weight_exponent(const Weight& w, double xi);
/// E'(xi) (logarithmic derivative of the weight).
double weight_log_slope(const Weight& w, double xi);
/// E''(xi).
double weight_log_curvature(const Weight& w, double xi);
double weight_eval(const Weight& w, double xi);

/// Partition of unity: chi_minus = 1 on xi <= -1, 0 on xi >= 0.
double chi_minus(double xi);
double chi_plus(double xi);

enum class NormKind { sup, L2 };

/// sup: max_i weight(x_i)|v_i|; L2: sqrt of the trapezoid rule for (weight v)^2.
double weighted_norm(std::span<const double> v, const Grid& grid, const Weight& weight,
                     NormKind kind);

}  // namespace invasionlab

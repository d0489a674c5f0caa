#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace invasionlab {

/// Pre-factored tridiagonal system. lo[i] multiplies x[i-1], up[i] multiplies
/// x[i+1]; lo[0] and up[n-1] are the periodic corner entries when cyclic.
class Tridiagonal {
public:
    Tridiagonal() = default;
    Tridiagonal(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                bool cyclic);

    int size() const { return static_cast<int>(di_.size()); }
    /// Solves in place.
    void solve(std::span<double> rhs) const;

private:
    void solve_open(std::span<double> rhs) const;

    std::vector<double> lo_, di_, up_;
    std::vector<double> cprime_, inv_denom_;
    bool cyclic_ = false;
    double gamma_ = 0.0, alpha_ = 0.0, beta_ = 0.0;
    std::vector<double> z_;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double trapezoid(std::span<const double> v, double h);

/// Linear interpolation of uniformly sampled data; clamps outside the range.
double interp_linear(std::span<const double> v, double x0, double h, double x);
/// Four-point cubic Lagrange interpolation; clamps outside the range.
double interp_cubic(std::span<const double> v, double x0, double h, double x);
/// Periodic cubic interpolation of samples v_j at x0 + j h, period n h.
double interp_cubic_periodic(std::span<const double> v, double x0, double h, double x);

/// Centered first difference with one-sided second-order ends.
std::vector<double> gradient(std::span<const double> v, double h);

/// Fourier collocation derivative matrices on m equispaced points of a
/// period-1 interval, m even. The Nyquist mode is annihilated by d1 and
/// scaled by -(pi m)^2 by d2.
Eigen::MatrixXd fourier_d1(int m);
Eigen::MatrixXd fourier_d2(int m);

}  // namespace invasionlab

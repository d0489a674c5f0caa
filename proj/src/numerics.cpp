#include "invasionlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "invasionlab/error.hpp"

namespace invasionlab {

Tridiagonal::Tridiagonal(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                         bool cyclic)
    : lo_(std::move(lo)), di_(std::move(di)), up_(std::move(up)), cyclic_(cyclic) {
    const int n = size();
    if (n < 3 || static_cast<int>(lo_.size()) != n || static_cast<int>(up_.size()) != n)
        throw Error(ErrorKind::invalid_argument, "tridiagonal system needs n >= 3 matching bands");
    if (cyclic_) {
        alpha_ = up_[n - 1];
        beta_ = lo_[0];
        gamma_ = -di_[0];
        di_[0] -= gamma_;
        di_[n - 1] -= alpha_ * beta_ / gamma_;
    }
    cprime_.assign(n, 0.0);
    inv_denom_.assign(n, 0.0);
    double denom = di_[0];
    for (int i = 0; i < n; ++i) {
        if (i > 0) denom = di_[i] - lo_[i] * cprime_[i - 1];
        if (denom == 0.0) throw Error(ErrorKind::solver, "zero pivot in tridiagonal solve");
        inv_denom_[i] = 1.0 / denom;
        cprime_[i] = (i < n - 1) ? up_[i] * inv_denom_[i] : 0.0;
    }
    if (cyclic_) {
        z_.assign(n, 0.0);
        z_[0] = gamma_;
        z_[n - 1] = alpha_;
        solve_open(z_);
    }
}

void Tridiagonal::solve_open(std::span<double> r) const {
    const int n = size();
    r[0] *= inv_denom_[0];
    for (int i = 1; i < n; ++i) r[i] = (r[i] - lo_[i] * r[i - 1]) * inv_denom_[i];
    for (int i = n - 2; i >= 0; --i) r[i] -= cprime_[i] * r[i + 1];
}

void Tridiagonal::solve(std::span<double> r) const {
    solve_open(r);
    if (!cyclic_) return;
    const int n = size();
    const double fact = (r[0] + beta_ * r[n - 1] / gamma_) / (1.0 + z_[0] + beta_ * z_[n - 1] / gamma_);
    for (int i = 0; i < n; ++i) r[i] -= fact * z_[i];
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error(ErrorKind::insufficient_data, "linear fit needs >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::insufficient_data, "degenerate abscissae in linear fit");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    f.slope_stderr = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
    return f;
}

double trapezoid(std::span<const double> v, double h) {
    if (v.empty()) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return v.size() == 1 ? 0.0 : s * h;
}

double interp_linear(std::span<const double> v, double x0, double h, double x) {
    const int n = static_cast<int>(v.size());
    const double s = (x - x0) / h;
    if (s <= 0) return v.front();
    if (s >= n - 1) return v.back();
    const int i = static_cast<int>(std::floor(s));
    const double f = s - i;
    return (1 - f) * v[i] + f * v[i + 1];
}

namespace {

double lagrange4(double f0, double f1, double f2, double f3, double t) {
    // nodes at -1, 0, 1, 2
    return -t * (t - 1) * (t - 2) / 6.0 * f0 + (t + 1) * (t - 1) * (t - 2) / 2.0 * f1 -
           (t + 1) * t * (t - 2) / 2.0 * f2 + (t + 1) * t * (t - 1) / 6.0 * f3;
}

}  // namespace

double interp_cubic(std::span<const double> v, double x0, double h, double x) {
    const int n = static_cast<int>(v.size());
    const double s = (x - x0) / h;
    if (s <= 0) return v.front();
    if (s >= n - 1) return v.back();
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 1, n - 3);
    return lagrange4(v[i - 1], v[i], v[i + 1], v[i + 2], s - i);
}

double interp_cubic_periodic(std::span<const double> v, double x0, double h, double x) {
    const int n = static_cast<int>(v.size());
    double s = std::fmod((x - x0) / h, static_cast<double>(n));
    if (s < 0) s += n;
    int i = static_cast<int>(std::floor(s));
    if (i >= n) i = n - 1;
    auto at = [&](int k) { return v[((k % n) + n) % n]; };
    return lagrange4(at(i - 1), at(i), at(i + 1), at(i + 2), s - i);
}

std::vector<double> gradient(std::span<const double> v, double h) {
    const int n = static_cast<int>(v.size());
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    for (int i = 1; i < n - 1; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2 * h);
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
    d[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
    return d;
}

Eigen::MatrixXd fourier_d1(int m) {
    if (m < 4 || m % 2) throw Error(ErrorKind::invalid_argument, "fourier_d1 needs even m >= 4");
    const double pi = std::numbers::pi;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            const int k = i - j;
            const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            d(i, j) = pi * sgn / std::tan(pi * k / m);
        }
    return d;
}

Eigen::MatrixXd fourier_d2(int m) {
    if (m < 4 || m % 2) throw Error(ErrorKind::invalid_argument, "fourier_d2 needs even m >= 4");
    const double pi = std::numbers::pi;
    const double scale = 4.0 * pi * pi;
    const double hh = 2.0 * pi / m;
    Eigen::MatrixXd d(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int k = i - j;
            if (k == 0) {
                d(i, j) = scale * (-pi * pi / (3.0 * hh * hh) - 1.0 / 6.0);
            } else {
                const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
                const double s = std::sin(k * hh / 2.0);
                d(i, j) = scale * (-0.5 * sgn / (s * s));
            }
        }
    return d;
}

}  // namespace invasionlab

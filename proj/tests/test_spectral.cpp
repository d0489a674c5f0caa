#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"
#include "invasionlab/spectral.hpp"

using namespace invasionlab;
using fixtures::kStd;

namespace {

double nearest_distance(const std::vector<cplx>& set, cplx z) {
    double d = 1e300;
    for (const cplx& s : set) d = std::min(d, std::abs(s - z));
    return d;
}

PointSpectrumOptions short_grid(double h) {
    PointSpectrumOptions o;
    o.x_min = -150.0;
    o.x_max = 110.0;
    o.h = h;
    return o;
}

}  // namespace

TEST_CASE("dispersion relation at the origin and at eigenvalues of F'(0)") {
    CHECK(std::abs(dispersion(kStd, 0.0, 0.0, 0.0) - 0.0082) <= 1e-15);
    const auto j = jacobian(kStd, 0.0, 0.0);
    Eigen::Matrix2d J;
    J << j[0][0], j[0][1], j[1][0], j[1][1];
    CHECK(std::abs(dispersion(kStd, 0.0, 0.0, 0.0) - J.determinant()) <= 1e-15);
    Eigen::EigenSolver<Eigen::Matrix2d> es(J);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(dispersion(kStd, 0.7, es.eigenvalues()(k), 0.0)) <= 1e-15);
}

TEST_CASE("dispersion derivatives against finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double h = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
        const double c = 0.8 * (U(rng) + 1.0);
        const cplx lam(U(rng), U(rng)), nu(U(rng), U(rng));
        const auto d = dispersion_derivatives(kStd, c, lam, nu);
        const cplx fl = (dispersion(kStd, c, lam + h, nu) - dispersion(kStd, c, lam - h, nu)) / (2 * h);
        const cplx fn = (dispersion(kStd, c, lam, nu + h) - dispersion(kStd, c, lam, nu - h)) / (2 * h);
        auto dnu = [&](cplx l, cplx n) { return dispersion_derivatives(kStd, c, l, n).d_nu; };
        const cplx fnn = (dnu(lam, nu + h) - dnu(lam, nu - h)) / (2 * h);
        const cplx fnl = (dnu(lam + h, nu) - dnu(lam - h, nu)) / (2 * h);
        CHECK(std::abs(d.d - dispersion(kStd, c, lam, nu)) <= 1e-15);
        CHECK(std::abs(d.d_lambda - fl) <= 1e-8);
        CHECK(std::abs(d.d_nu - fn) <= 1e-8);
        CHECK(std::abs(d.d_nunu - fnn) <= 1e-8);
        CHECK(std::abs(d.d_nulambda - fnl) <= 1e-8);
        for (const cplx& r : spatial_roots(kStd, c, lam)) CHECK(std::abs(dispersion(kStd, c, lam, r)) <= 1e-12 * (1.0 + std::pow(std::abs(r), 3)));
    }
}

TEST_CASE("decoupled double root") {
    const Params p{0.1, 2.0, 0.0};
    const DispersionRoot r = double_root(p, 1.0, cplx(-0.1, 0.0), cplx(-0.4, 0.0));
    CHECK(std::abs(r.lambda - cplx(-0.16, 0.0)) <= 1e-12);
    CHECK(std::abs(r.nu - cplx(-0.5, 0.0)) <= 1e-12);
    CHECK(r.pinched);
}

TEST_CASE("double roots of the full system") {
    const auto roots = double_roots(kStd, 0.5);
    REQUIRE(!roots.empty());
    bool saw_unpinched = false, saw_pinched = false;
    for (const auto& r : roots) {
        CHECK(r.residual_d <= 1e-10);
        CHECK(r.residual_dnu <= 1e-8);
        saw_pinched |= r.pinched;
        // the real root with Re nu > 0 collides roots from the same side
        if (std::abs(r.lambda.imag()) < 1e-12 && r.nu.real() > 0.0) {
            CHECK_FALSE(r.pinched);
            saw_unpinched = true;
        }
    }
    CHECK(saw_unpinched);
    CHECK(saw_pinched);
    const DispersionRoot& r0 = roots.front();
    const DispersionRoot again = double_root(kStd, 0.5, r0.lambda + 1e-4, r0.nu + cplx(1e-4, -1e-4));
    CHECK(std::abs(again.lambda - r0.lambda) <= 1e-9);
    CHECK(std::abs(again.nu - r0.nu) <= 1e-9);
    CHECK_THROWS_AS(is_pinched(kStd, DispersionRoot{r0.lambda, r0.nu, 0.0, false, 0.0, 0.0}), Error);
}

TEST_CASE("linear spreading speed") {
    const SpreadingSpeed s = linear_spreading_speed(kStd);
    CHECK(std::abs(s.root.lambda.real()) <= 1e-8);
    CHECK(s.root.pinched);
    CHECK(s.eta_lin == doctest::Approx(-s.root.nu.real()));
    // fixed point under re-seeding from its own output
    const DispersionRoot again = double_root(kStd, s.c_lin, s.root.lambda + 1e-4, s.root.nu + 1e-4);
    CHECK(std::abs(again.lambda - s.root.lambda) <= 1e-9);
    CHECK(std::abs(again.nu - s.root.nu) <= 1e-9);

    // decoupled limit: 2 sqrt(a (1 - a)) and sqrt(a (1 - a))
    const SpreadingSpeed s0 = linear_spreading_speed(Params{0.1, 2.0, 0.0});
    CHECK(s0.c_lin == doctest::Approx(0.6).epsilon(1e-8));
    CHECK(s0.eta_lin == doctest::Approx(0.3).epsilon(1e-8));
    const SpreadingSpeed s1 = linear_spreading_speed(Params{0.1, 2.0, 1e-4});
    const SpreadingSpeed s2 = linear_spreading_speed(Params{0.1, 2.0, 1e-3});
    CHECK(std::abs(s1.c_lin - 0.6) < std::abs(s2.c_lin - 0.6));
    CHECK(std::abs(s2.c_lin - 0.6) < std::abs(s.c_lin - 0.6));
    CHECK(std::abs(s1.eta_lin - 0.3) < std::abs(s2.eta_lin - 0.3));
}

TEST_CASE("Bloch matrix: translational eigenfunction and symmetry") {
    const WaveTrain& wt = fixtures::wave_train();
    const int m = wt.m;
    const Eigen::MatrixXcd M = bloch_matrix(kStd, wt, 0.0);
    const Eigen::MatrixXd d1 = fourier_d1(m) / wt.L;
    Eigen::VectorXcd v(2 * m);
    v.head(m) = (d1 * Eigen::Map<const Eigen::VectorXd>(wt.profile_u.data(), m)).cast<cplx>();
    v.tail(m) = (d1 * Eigen::Map<const Eigen::VectorXd>(wt.profile_w.data(), m)).cast<cplx>();
    CHECK((M * v).norm() / v.norm() <= 1e-8 * M.norm());

    const double k = 0.3 * wt.k_wt;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ep(bloch_matrix(kStd, wt, cplx(0.0, k)), false);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> em(bloch_matrix(kStd, wt, cplx(0.0, -k)), false);
    std::vector<cplx> minus(em.eigenvalues().data(), em.eigenvalues().data() + 2 * m);
    const double scale = ep.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < 2 * m; ++i) CHECK(nearest_distance(minus, std::conj(ep.eigenvalues()(i))) <= 1e-9 * scale);
}

TEST_CASE("Bloch matrix: constant coefficients reproduce the symbol") {
    const WaveTrain& wt = fixtures::wave_train();
    const int m = wt.m;
    const cplx nu(0.01, 0.2 * wt.k_wt);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch_matrix_constant(kStd, wt, nu), false);
    const auto j = jacobian(kStd, 0.0, 0.0);
    const double c = wt.c;
    std::vector<cplx> expected;
    for (int q = -m / 2; q < m / 2; ++q) {
        const double kq = 2 * std::numbers::pi * q / wt.L;
        // the collocation first derivative annihilates the Nyquist mode
        const cplx d1 = q == -m / 2 ? cplx(0.0) : cplx(0.0, kq);
        const cplx d2 = -kq * kq;
        Eigen::Matrix2cd S;
        S << d2 + 2.0 * nu * d1 + nu * nu + c * (d1 + nu) + j[0][0], j[0][1], j[1][0], c * (d1 + nu) + j[1][1];
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> s2(S, false);
        expected.push_back(s2.eigenvalues()(0));
        expected.push_back(s2.eigenvalues()(1));
    }
    double worst = 0.0;
    for (int i = 0; i < 2 * m; ++i) worst = std::max(worst, nearest_distance(expected, es.eigenvalues()(i)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("Bloch sweep of the wake wave train") {
    const WaveTrain& wt = fixtures::wave_train();
    const BlochSpectrum bs = bloch_sweep(kStd, wt, 8, 2);
    REQUIRE(bs.k_grid.size() == 8);
    CHECK(bs.failed_k.empty());
    CHECK(bs.k_grid.front() == doctest::Approx(-0.5 * wt.k_wt));
    CHECK(bs.zero_eigenvalue_abs <= 1e-8);
    CHECK(bs.simplicity_gap > 0.0);
    CHECK(bs.max_real_nonzero_k < 0.0);
    CHECK(bs.theta_fit > 0.0);
    CHECK_FALSE(bs.violations);
    CHECK(bs.c_g < 0.0);
    CHECK(bs.D_eff > 0.0);
    for (const auto& ev : bs.eigenvalues)
        for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i - 1].real() >= ev[i].real());
    // k and -k are conjugate
    for (std::size_t a = 1; a < bs.k_grid.size(); ++a) {
        const std::size_t b = bs.k_grid.size() - a;
        if (a >= b) break;
        CHECK(std::abs(bs.k_grid[a] + bs.k_grid[b]) <= 1e-12);
        CHECK(std::abs(bs.eigenvalues[a].front().real() - bs.eigenvalues[b].front().real()) <= 1e-9);
    }
}

TEST_CASE("group velocity by two routes") {
    const WaveTrain& wt = fixtures::wave_train();
    const GroupVelocity g = group_velocity_adjoint(kStd, wt);
    const CriticalCurve cc = critical_curve(kStd, wt);
    CHECK(std::abs(g.normalization_check - 1.0) <= 1e-10);
    CHECK(g.c_g < 0.0);
    CHECK(cc.c_g < 0.0);
    CHECK(std::abs(g.c_g - cc.c_g) <= 1e-3 * std::abs(g.c_g));
    CHECK(cc.D_eff > 0.0);
    CHECK(std::abs(cc.lambda0) <= 1e-8);
}

TEST_CASE("conjugated front operator is an exact similarity") {
    // smooth test function against analytic derivatives on a synthetic profile
    const Params p = kStd;
    const double eta = 0.1, eta0 = 0.4, c = 0.7;
    auto err_at = [&](double h) {
        FrontProfile fp;
        fp.grid = make_grid(-30.0, 30.0, h);
        fp.c_ps = c;
        fp.u_ps.resize(fp.grid.n);
        fp.w_ps.assign(fp.grid.n, 0.0);
        for (int i = 0; i < fp.grid.n; ++i) fp.u_ps[i] = 0.45 * (1.0 - std::tanh(fp.grid.x(i)));
        const auto A = conjugated_front_operator(p, fp, eta, eta0);
        const int n = fp.grid.n - 2;
        Eigen::VectorXd v(2 * n), ref(2 * n);
        for (int k = 0; k < n; ++k) {
            const double x = fp.grid.x(k + 1);
            const double s = 0.3;
            const double g = std::exp(-s * x * x);  // u test function
            const double g1 = -2 * s * x * g, g2 = (4 * s * s * x * x - 2 * s) * g;
            const double q = std::exp(-s * (x - 1) * (x - 1));  // w test function
            const double q1 = -2 * s * (x - 1) * q;
            const double om = weight_eval(Weight{eta, 0.0}, x) * weight_eval(Weight{0.0, eta0}, x);
            v(k) = om * g;
            v(n + k) = om * q;
            ref(k) = om * (g2 + c * g1 + cubic_prime(p, fp.u_ps[k + 1]) * g - q);
            ref(n + k) = om * (c * q1 + p.eps * (g - p.gamma * q));
        }
        return (A * v - ref).lpNorm<Eigen::Infinity>();
    };
    const double e1 = err_at(0.1), e2 = err_at(0.05);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("point spectrum of the short-run front") {
    const FrontProfile& fp = fixtures::short_front();
    const PointSpectrumReport r = front_point_spectrum(kStd, fp, short_grid(0.1));
    CHECK(std::abs(r.eigenvalue_nearest_zero) <= 5e-3);
    CHECK(r.eigenfunction_angle <= 1e-2);
    CHECK(r.gap > 0.0);
    CHECK(std::abs(r.ptr_normalization_check - 1.0) <= 1e-6);

    const PointSpectrumReport fine = front_point_spectrum(kStd, fp, short_grid(0.05));
    CHECK(std::abs(fine.eigenvalue_nearest_zero) < std::abs(r.eigenvalue_nearest_zero));
    CHECK(fine.eigenfunction_angle < r.eigenfunction_angle);

    const AdjointTails t = adjoint_tails(r);
    CHECK(t.left_rate > 0.0);
    CHECK(t.right_rate > 0.0);

    const std::vector<double> zero(r.grid.n, 0.0);
    CHECK(ptr(zero, zero, r) == 0.0);
    CHECK_THROWS_AS(ptr(std::vector<double>(3, 1.0), std::vector<double>(3, 1.0), r), Error);

    // support on xi < -100: bound from the fitted left tail with weight rate kappa / 2
    const double kappa = t.left_rate, kw = 0.5 * kappa;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> fu(r.grid.n, 0.0), fw(r.grid.n, 0.0);
    double wsup = 0.0;
    for (int i = 0; i < r.grid.n; ++i) {
        const double x = r.grid.x(i);
        if (x >= -100.0) continue;
        fu[i] = U(rng) * std::exp(-kw * x) * 1e-3;
        fw[i] = U(rng) * std::exp(-kw * x) * 1e-3;
        wsup = std::max(wsup, std::exp(kw * x) * std::max(std::abs(fu[i]), std::abs(fw[i])));
    }
    const double bound = t.left_prefactor * wsup * std::exp(-(kappa - kw) * 100.0) / (kappa - kw);
    CHECK(std::abs(ptr(fu, fw, r)) <= bound);
}

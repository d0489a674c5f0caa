#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

#include "arnoldi.hpp"
#include "invasionlab/error.hpp"
#include "invasionlab/front.hpp"
#include "invasionlab/numerics.hpp"
#include "invasionlab/spectral.hpp"

namespace invasionlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct Conjugation {
    std::vector<double> E, g, dg;
};

Conjugation conjugation(const Grid& grid, double eta, double eta0) {
    const Weight left{eta, 0.0}, right{0.0, eta0};
    Conjugation cj;
    cj.E.resize(grid.n);
    cj.g.resize(grid.n);
    cj.dg.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double xi = grid.x(i);
        cj.E[i] = weight_exponent(left, xi) + weight_exponent(right, xi);
        cj.g[i] = weight_log_slope(left, xi) + weight_log_slope(right, xi);
        cj.dg[i] = weight_log_curvature(left, xi) + weight_log_curvature(right, xi);
    }
    return cj;
}

}  // namespace

Eigen::SparseMatrix<double> conjugated_front_operator(const Params& p, const FrontProfile& fp, double eta,
                                                      double eta0, double w_dissipation) {
    const Grid& grid = fp.grid;
    const int n = grid.n - 2;
    if (n < 3) throw Error(ErrorKind::invalid_argument, "point spectrum grid too small");
    const double h = grid.h();
    const double c = fp.c_ps;
    const Conjugation cj = conjugation(grid, eta, eta0);
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(8 * n);
    for (int k = 0; k < n; ++k) {
        const int i = k + 1;
        const double g = cj.g[i];
        const double b = c - 2.0 * g;
        const double q = g * g - cj.dg[i] - c * g;
        const double fpu = cubic_prime(p, fp.u_ps[i]);
        // u row
        tr.emplace_back(k, k, -2.0 / (h * h) + q + fpu);
        if (k > 0) tr.emplace_back(k, k - 1, 1.0 / (h * h) - b / (2 * h));
        if (k < n - 1) tr.emplace_back(k, k + 1, 1.0 / (h * h) + b / (2 * h));
        tr.emplace_back(k, n + k, -1.0);
        // w row
        tr.emplace_back(n + k, k, p.eps);
        tr.emplace_back(n + k, n + k, -c * g - p.eps * p.gamma);
        if (k > 0) tr.emplace_back(n + k, n + k - 1, -c / (2 * h));
        if (k < n - 1) tr.emplace_back(n + k, n + k + 1, c / (2 * h));
        if (w_dissipation > 0.0 && i >= 2 && i < grid.n - 2) {
            const double kd = -w_dissipation / h;
            const double st[5] = {1, -4, 6, -4, 1};
            for (int q = 0; q < 5; ++q) {
                const int j = i - 2 + q;
                if (j < 1 || j > grid.n - 2) continue;
                tr.emplace_back(n + k, n + j - 1, kd * st[q] * std::exp(cj.E[i] - cj.E[j]));
            }
        }
    }
    SpMat A(2 * n, 2 * n);
    A.setFromTriplets(tr.begin(), tr.end());
    A.makeCompressed();
    return A;
}

std::vector<cplx> shift_invert_eigs(const Eigen::SparseMatrix<double>& A, double sigma, int count, int krylov) {
    const int n = static_cast<int>(A.rows());
    SpMat S = A;
    for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= sigma;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::solver, "sparse LU of shifted operator failed");
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> op = [&](const Eigen::VectorXd& x,
                                                                            Eigen::VectorXd& y) {
        y = lu.solve(x);
    };
    const auto res = detail::arnoldi<double>(op, n, krylov, count);
    std::vector<cplx> out;
    for (int i = 0; i < std::min<int>(count, res.theta.size()); ++i) out.push_back(sigma + 1.0 / res.theta[i]);
    std::sort(out.begin(), out.end(),
              [&](cplx a, cplx b) { return std::abs(a - sigma) < std::abs(b - sigma); });
    return out;
}

PointSpectrumReport front_point_spectrum(const Params& p, const FrontProfile& fp_in,
                                         const PointSpectrumOptions& opts) {
    if (!(opts.eta > 0.0) || !(opts.eta0 > 0.0))
        throw Error(ErrorKind::invalid_argument, "point spectrum weights must be positive");
    PointSpectrumReport r;
    r.grid = make_grid(opts.x_min, opts.x_max, opts.h);
    r.eta = opts.eta;
    r.eta0 = opts.eta0;
    if (opts.polish) {
        PolishReport pr;
        r.profile = polish_front(fp_in, p, r.grid, PolishOptions{.w_dissipation = opts.w_dissipation, .scale_eta = opts.eta0},
                                 &pr);
        r.polish_steps = pr.newton_steps;
    } else {
        r.profile = resample_front(fp_in, r.grid);
    }
    const Grid& grid = r.grid;
    const int n = grid.n - 2;
    const double h = grid.h();

    const SpMat A = conjugated_front_operator(p, r.profile, opts.eta, opts.eta0,
                                                   opts.polish ? opts.w_dissipation : 0.0);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::solver, "sparse LU of front operator failed");
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> op = [&](const Eigen::VectorXd& x,
                                                                            Eigen::VectorXd& y) {
        y = lu.solve(x);
    };
    const auto res = detail::arnoldi<double>(op, 2 * n, opts.krylov, opts.n_eigs);
    if (res.theta.empty()) throw Error(ErrorKind::solver, "shift-invert Arnoldi produced no Ritz values");
    for (int i = 0; i < std::min<int>(opts.n_eigs, res.theta.size()); ++i)
        r.eigenvalues.push_back(1.0 / res.theta[i]);

    // inverse iteration on the leading Ritz vector
    Eigen::VectorXd x = res.vectors[0].real();
    if (x.norm() < 1e-12 * res.vectors[0].norm()) x = res.vectors[0].imag();
    x.normalize();
    for (int it = 0; it < 8; ++it) {
        x = lu.solve(x);
        x.normalize();
    }
    const double lam0 = x.dot(A * x);
    r.eigenvalues[0] = lam0;
    r.eigenvalue_nearest_zero = lam0;
    double top_other = -1e300;
    for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) top_other = std::max(top_other, r.eigenvalues[i].real());
    r.gap = -top_other;

    // reference Omega u_ps'
    const Conjugation cj = conjugation(grid, opts.eta, opts.eta0);
    const std::vector<double> du = gradient(r.profile.u_ps, h);
    const std::vector<double> dw = gradient(r.profile.w_ps, h);
    Eigen::VectorXd ref(2 * n);
    for (int k = 0; k < n; ++k) {
        const double om = std::exp(cj.E[k + 1]);
        ref(k) = om * du[k + 1];
        ref(n + k) = om * dw[k + 1];
    }
    const double cosang = std::abs(ref.dot(x)) / ref.norm();
    r.eigenfunction_angle = std::acos(std::min(1.0, cosang));
    if (ref.dot(x) < 0.0) x = -x;
    r.eigen_u.assign(grid.n, 0.0);
    r.eigen_w.assign(grid.n, 0.0);
    for (int k = 0; k < n; ++k) {
        r.eigen_u[k + 1] = x(k);
        r.eigen_w[k + 1] = x(n + k);
    }

    // left vector: inverse iteration with the transposed operator
    const SpMat At = A.transpose();
    Eigen::SparseLU<SpMat> lut;
    lut.compute(At);
    if (lut.info() != Eigen::Success) throw Error(ErrorKind::solver, "sparse LU of adjoint operator failed");
    Eigen::VectorXd y = x;
    for (int it = 0; it < 12; ++it) {
        y = lut.solve(y);
        y.normalize();
    }
    r.adjoint_u.assign(grid.n, 0.0);
    r.adjoint_w.assign(grid.n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double om = std::exp(weight_exponent(Weight{opts.eta, 0.0}, grid.x(k + 1)));
        r.adjoint_u[k + 1] = om * y(k);
        r.adjoint_w[k + 1] = om * y(n + k);
    }
    const auto [wu, ww] = weighted_derivative(r);
    const double pairing = ptr(wu, ww, r);
    if (pairing == 0.0 || !std::isfinite(pairing))
        throw Error(ErrorKind::solver, "adjoint eigenfunction orthogonal to the translational mode");
    for (int i = 0; i < grid.n; ++i) {
        r.adjoint_u[i] /= pairing;
        r.adjoint_w[i] /= pairing;
    }
    r.ptr_normalization_check = ptr(wu, ww, r);

    if (std::abs(lam0) > 1e-2)
        throw Error(ErrorKind::hypothesis_violation,
                    "nearest eigenvalue " + std::to_string(lam0) + " is farther than 1e-2 from 0");
    return r;
}

std::pair<std::vector<double>, std::vector<double>> weighted_derivative(const PointSpectrumReport& r) {
    const Grid& grid = r.grid;
    const double h = grid.h();
    std::vector<double> du = gradient(r.profile.u_ps, h);
    std::vector<double> dw = gradient(r.profile.w_ps, h);
    const Weight w0{0.0, r.eta0};
    for (int i = 0; i < grid.n; ++i) {
        const double om = weight_eval(w0, grid.x(i));
        du[i] *= om;
        dw[i] *= om;
    }
    return {du, dw};
}

double ptr(std::span<const double> f_u, std::span<const double> f_w, const PointSpectrumReport& r) {
    const auto n = static_cast<std::size_t>(r.grid.n);
    if (f_u.size() != n || f_w.size() != n || r.adjoint_u.size() != n)
        throw Error(ErrorKind::grid_mismatch, "P_tr argument does not live on the point-spectrum grid");
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = f_u[i] * r.adjoint_u[i] + f_w[i] * r.adjoint_w[i];
    return trapezoid(prod, r.grid.h());
}

AdjointTails adjoint_tails(const PointSpectrumReport& r, double core, double chunk, double floor) {
    const Grid& g = r.grid;
    const int per = std::max(1, static_cast<int>(std::lround(chunk / g.h())));
    std::vector<double> xc, env;
    double top = 0.0;
    for (int i0 = 1; i0 + per < g.n - 1; i0 += per) {
        double m = 0.0;
        int im = i0;
        for (int i = i0; i < i0 + per; ++i) {
            const double v = std::abs(r.adjoint_u[i]) + std::abs(r.adjoint_w[i]);
            if (v > m) {
                m = v;
                im = i;
            }
        }
        xc.push_back(g.x(im));
        env.push_back(m);
        top = std::max(top, m);
    }
    AdjointTails t;
    for (int side = 0; side < 2; ++side) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < xc.size(); ++k) {
            const bool in = side == 0 ? xc[k] <= -core : xc[k] >= core;
            if (in && env[k] > floor * top) {
                x.push_back(xc[k]);
                y.push_back(std::log(env[k]));
            }
        }
        if (x.size() < 5) throw Error(ErrorKind::insufficient_data, "adjoint tail window too short");
        const LinearFit f = linear_fit(x, y);
        if (side == 0) {
            t.left_rate = f.slope;
            t.left_r2 = f.r2;
            for (std::size_t k = 0; k < x.size(); ++k)
                t.left_prefactor = std::max(t.left_prefactor, std::exp(y[k] - f.slope * x[k]));
        } else {
            t.right_rate = -f.slope;
            t.right_r2 = f.r2;
        }
    }
    return t;
}

}  // namespace invasionlab

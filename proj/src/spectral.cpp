#include "invasionlab/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include "arnoldi.hpp"
#include "invasionlab/error.hpp"
#include "invasionlab/numerics.hpp"

namespace invasionlab {

cplx dispersion(const Params& p, double c, cplx lambda, cplx nu) {
    const auto j = jacobian(p, 0.0, 0.0);
    const cplx m00 = nu * nu + c * nu + j[0][0] - lambda;
    const cplx m01 = j[0][1];
    const cplx m10 = j[1][0];
    const cplx m11 = c * nu + j[1][1] - lambda;
    return m00 * m11 - m01 * m10;
}

DispersionDerivatives dispersion_derivatives(const Params& p, double c, cplx lambda, cplx nu) {
    const double r = p.a * (1 - p.a);
    const cplx A = nu * nu + c * nu + r - lambda;
    const cplx B = c * nu - p.eps * p.gamma - lambda;
    DispersionDerivatives d;
    d.d = A * B + p.eps;
    d.d_lambda = -(A + B);
    d.d_nu = (2.0 * nu + c) * B + c * A;
    d.d_nunu = 2.0 * B + 2.0 * c * (2.0 * nu + c);
    d.d_nulambda = -(2.0 * nu + c) - c;
    return d;
}

std::vector<cplx> spatial_roots(const Params& p, double c, cplx lambda) {
    const double r = p.a * (1 - p.a);
    const cplx alpha = r - lambda;
    const cplx beta = -p.eps * p.gamma - lambda;
    // c nu^3 + (beta + c^2) nu^2 + c (alpha + beta) nu + alpha beta + eps
    std::vector<cplx> coef{c, beta + c * c, c * (alpha + beta), alpha * beta + p.eps};
    if (c == 0.0) {
        const cplx a2 = coef[1], a0 = coef[3];
        const cplx s = std::sqrt(-a0 / a2);
        return {s, -s};
    }
    Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
    comp(0, 0) = -coef[1] / coef[0];
    comp(0, 1) = -coef[2] / coef[0];
    comp(0, 2) = -coef[3] / coef[0];
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
    return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

namespace {

bool newton_double_root(const Params& p, double c, cplx& lam, cplx& nu) {
    for (int it = 0; it < 80; ++it) {
        const auto d = dispersion_derivatives(p, c, lam, nu);
        if (std::abs(d.d) < 1e-14 && std::abs(d.d_nu) < 1e-13) return true;
        // [d_lambda d_nu; d_nulambda d_nunu] [dl; dn] = -[d; d_nu]
        const cplx det = d.d_lambda * d.d_nunu - d.d_nu * d.d_nulambda;
        if (std::abs(det) < 1e-300) return false;
        const cplx dl = (-d.d * d.d_nunu + d.d_nu * d.d_nu) / det;
        const cplx dn = (-d.d_lambda * d.d_nu + d.d_nulambda * d.d) / det;
        lam += dl;
        nu += dn;
        if (!std::isfinite(lam.real()) || !std::isfinite(nu.real()) || std::abs(nu) > 1e3) return false;
    }
    const auto d = dispersion_derivatives(p, c, lam, nu);
    return std::abs(d.d) <= 1e-10 && std::abs(d.d_nu) <= 1e-8;
}

}  // namespace

bool is_pinched(const Params& p, const DispersionRoot& root, double reference) {
    if (root.c == 0.0)
        throw Error(ErrorKind::pinching_undetermined, "pinching test needs a moving frame");
    const int steps = 1500;
    const double s0 = 1e-7, s1 = 10.0;
    auto roots_at = [&](double s) { return spatial_roots(p, root.c, root.lambda + s); };
    std::vector<cplx> cur = roots_at(s0);
    // the colliding pair: the two roots nearest nu*
    std::vector<int> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return std::abs(cur[a] - root.nu) < std::abs(cur[b] - root.nu); });
    int ia = idx[0], ib = idx[1];
    double max_sep = std::abs(cur[ia] - cur[ib]);
    for (int k = 1; k <= steps; ++k) {
        const double s = s0 * std::pow(s1 / s0, static_cast<double>(k) / steps);
        const std::vector<cplx> nxt = roots_at(s);
        std::array<int, 3> perm{0, 1, 2}, best = perm;
        double best_cost = 1e300;
        do {
            double cost = 0.0;
            for (int q = 0; q < 3; ++q) cost += std::abs(nxt[perm[q]] - cur[q]);
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        std::vector<cplx> reordered(3);
        for (int q = 0; q < 3; ++q) reordered[q] = nxt[best[q]];
        cur = reordered;
        max_sep = std::max(max_sep, std::abs(cur[ia] - cur[ib]));
    }
    if (max_sep < 1e-6)
        throw Error(ErrorKind::pinching_undetermined, "colliding roots never separate");
    const bool a_right = cur[ia].real() > reference;
    const bool b_right = cur[ib].real() > reference;
    return a_right != b_right;
}

DispersionRoot double_root(const Params& p, double c, cplx lambda_seed, cplx nu_seed) {
    cplx lam = lambda_seed, nu = nu_seed;
    if (!newton_double_root(p, c, lam, nu))
        throw Error(ErrorKind::no_root, "Newton on (d, d_nu) diverged");
    DispersionRoot r;
    r.lambda = lam;
    r.nu = nu;
    r.c = c;
    const auto d = dispersion_derivatives(p, c, lam, nu);
    r.residual_d = std::abs(d.d);
    r.residual_dnu = std::abs(d.d_nu);
    r.pinched = is_pinched(p, r);
    return r;
}

std::vector<DispersionRoot> double_roots(const Params& p, double c) {
    struct Seed {
        double score;
        cplx lam, nu;
    };
    const int nr = 61, ni = 61;
    const double re0 = -2.0, re1 = 1.0, im0 = -1.5, im1 = 1.5;
    const double r = p.a * (1 - p.a);
    std::vector<std::vector<std::array<double, 2>>> score(nr, std::vector<std::array<double, 2>>(ni));
    std::vector<std::vector<std::array<cplx, 2>>> lams(nr, std::vector<std::array<cplx, 2>>(ni));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < ni; ++j) {
            const cplx nu(re0 + (re1 - re0) * i / (nr - 1), im0 + (im1 - im0) * j / (ni - 1));
            const cplx A0 = nu * nu + c * nu + r;
            const cplx B0 = c * nu - p.eps * p.gamma;
            const cplx disc = std::sqrt((A0 - B0) * (A0 - B0) - 4.0 * p.eps);
            for (int b = 0; b < 2; ++b) {
                const cplx lam = 0.5 * (A0 + B0 + (b == 0 ? disc : -disc));
                lams[i][j][b] = lam;
                score[i][j][b] = std::abs(dispersion_derivatives(p, c, lam, nu).d_nu);
            }
        }
    std::vector<Seed> seeds;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < ni; ++j)
            for (int b = 0; b < 2; ++b) {
                bool local_min = true;
                for (int di = -1; di <= 1 && local_min; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (!di && !dj) continue;
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || jj < 0 || ii >= nr || jj >= ni) continue;
                        if (score[ii][jj][b] < score[i][j][b]) {
                            local_min = false;
                            break;
                        }
                    }
                if (local_min) {
                    const cplx nu(re0 + (re1 - re0) * i / (nr - 1), im0 + (im1 - im0) * j / (ni - 1));
                    seeds.push_back({score[i][j][b], lams[i][j][b], nu});
                }
            }
    // the decoupled (eps = 0) double root of the u factor
    seeds.push_back({0.0, cplx(r - 0.25 * c * c, 0.0), cplx(-0.5 * c, 0.0)});
    std::vector<DispersionRoot> out;
    for (const auto& s : seeds) {
        cplx lam = s.lam, nu = s.nu;
        if (!newton_double_root(p, c, lam, nu)) continue;
        bool dup = false;
        for (const auto& o : out)
            if (std::abs(o.lambda - lam) + std::abs(o.nu - nu) < 1e-7) dup = true;
        if (dup) continue;
        DispersionRoot dr;
        dr.lambda = lam;
        dr.nu = nu;
        dr.c = c;
        const auto d = dispersion_derivatives(p, c, lam, nu);
        dr.residual_d = std::abs(d.d);
        dr.residual_dnu = std::abs(d.d_nu);
        try {
            dr.pinched = is_pinched(p, dr);
        } catch (const Error&) {
            dr.pinched = false;
        }
        out.push_back(dr);
    }
    std::sort(out.begin(), out.end(),
              [](const DispersionRoot& a, const DispersionRoot& b) { return a.lambda.real() > b.lambda.real(); });
    return out;
}

namespace {

// Rightmost pinched double root, or nullopt-like flag.
bool rightmost_pinched(const Params& p, double c, DispersionRoot& best) {
    for (const auto& r : double_roots(p, c))
        if (r.pinched) {
            best = r;
            return true;
        }
    return false;
}

}  // namespace

SpreadingSpeed linear_spreading_speed(const Params& p, double c_lo, double c_hi) {
    auto growth = [&](double c, DispersionRoot& r) {
        if (!rightmost_pinched(p, c, r)) return -1e300;
        return r.lambda.real();
    };
    DispersionRoot r_lo, r_hi;
    double a = c_lo, fa = growth(a, r_lo);
    if (!(fa > 0.0))
        throw Error(ErrorKind::no_spreading_speed, "rest state not pointwise unstable at c_lo");
    double b = a, fb = fa;
    const double step = 0.05;
    while (fb > 0.0) {
        a = b;
        fa = fb;
        b += step;
        if (b > c_hi) throw Error(ErrorKind::no_spreading_speed, "no sign change of Re lambda* in (0, 5)");
        fb = growth(b, r_hi);
    }
    DispersionRoot rm;
    for (int it = 0; it < 60 && b - a > 1e-11; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = growth(m, rm);
        if (fm > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
            r_hi = rm;
        }
    }
    SpreadingSpeed s;
    s.c_lin = 0.5 * (a + b);
    DispersionRoot fin;
    if (!rightmost_pinched(p, s.c_lin, fin)) fin = r_hi;
    s.root = fin;
    s.eta_lin = -fin.nu.real();
    return s;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXcd assemble_bloch(const Params& p, const WaveTrain& wt, cplx nu, bool constant) {
    const int m = wt.m;
    const Eigen::MatrixXd d1 = fourier_d1(m) / wt.L;
    const Eigen::MatrixXd d2 = fourier_d2(m) / (wt.L * wt.L);
    const double c = wt.c;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    M.topLeftCorner(m, m) = (d2 + c * d1).cast<cplx>() + (2.0 * nu) * d1.cast<cplx>();
    M.bottomRightCorner(m, m) = (c * d1).cast<cplx>();
    for (int i = 0; i < m; ++i) {
        const double fp = cubic_prime(p, constant ? 0.0 : wt.profile_u[i]);
        M(i, i) += nu * nu + c * nu + fp;
        M(i, m + i) = -1.0;
        M(m + i, i) = p.eps;
        M(m + i, m + i) += c * nu - p.eps * p.gamma;
    }
    return M;
}

std::vector<cplx> sorted_eigs(const Eigen::MatrixXcd& M, bool& ok) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    ok = es.info() == Eigen::Success;
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    return ev;
}

}  // namespace

Eigen::MatrixXcd bloch_matrix(const Params& p, const WaveTrain& wt, cplx nu) {
    return assemble_bloch(p, wt, nu, false);
}

Eigen::MatrixXcd bloch_matrix_constant(const Params& p, const WaveTrain& wt, cplx nu) {
    return assemble_bloch(p, wt, nu, true);
}

BlochSpectrum bloch_sweep(const Params& p, const WaveTrain& wt, int n_k, int threads) {
    if (n_k < 2) throw Error(ErrorKind::invalid_argument, "bloch_sweep needs n_k >= 2");
    BlochSpectrum bs;
    bs.k_grid.resize(n_k);
    for (int j = 0; j < n_k; ++j) bs.k_grid[j] = -0.5 * wt.k_wt + j * wt.k_wt / n_k;
    bs.eigenvalues.assign(n_k, {});
    std::vector<char> ok(n_k, 0);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int j = next++; j < n_k; j = next++) {
            bool good = false;
            bs.eigenvalues[j] = sorted_eigs(bloch_matrix(p, wt, cplx(0.0, bs.k_grid[j])), good);
            ok[j] = good;
        }
    };
    int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::clamp(nt, 1, n_k);
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    bs.theta_fit = 1e300;
    bs.max_real_nonzero_k = -1e300;
    const double kzero_tol = 1e-12 * wt.k_wt;
    for (int j = 0; j < n_k; ++j) {
        if (!ok[j]) {
            bs.failed_k.push_back(bs.k_grid[j]);
            continue;
        }
        const auto& ev = bs.eigenvalues[j];
        const double k = bs.k_grid[j];
        if (std::abs(k) <= kzero_tol) {
            int iz = 0;
            for (int i = 1; i < static_cast<int>(ev.size()); ++i)
                if (std::abs(ev[i]) < std::abs(ev[iz])) iz = i;
            bs.zero_eigenvalue_abs = std::abs(ev[iz]);
            double rest = -1e300;
            for (int i = 0; i < static_cast<int>(ev.size()); ++i)
                if (i != iz) rest = std::max(rest, ev[i].real());
            bs.simplicity_gap = -rest;
            if (rest >= 0.0) bs.violations = true;
            continue;
        }
        const double top = ev.front().real();
        bs.max_real_nonzero_k = std::max(bs.max_real_nonzero_k, top);
        bs.theta_fit = std::min(bs.theta_fit, -top / (k * k));
        if (top >= 0.0) bs.violations = true;
    }
    if (bs.theta_fit <= 0.0) bs.violations = true;

    // Critical branch from the two wavenumbers next to k = 0.
    for (int j = 1; j + 1 < n_k; ++j) {
        if (std::abs(bs.k_grid[j]) > kzero_tol || !ok[j - 1] || !ok[j + 1]) continue;
        auto nearest = [&](int i) {
            const auto& ev = bs.eigenvalues[i];
            return *std::min_element(ev.begin(), ev.end(),
                                     [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
        };
        const cplx lp = nearest(j + 1), lm = nearest(j - 1);
        const double dk = bs.k_grid[j + 1];
        bs.c_g = -(lp.imag() - lm.imag()) / (2.0 * dk);
        bs.D_eff = -(lp.real() + lm.real()) / (2.0 * dk * dk);
    }
    return bs;
}

CriticalCurve critical_curve(const Params& p, const WaveTrain& wt, double delta, int samples) {
    CriticalCurve cc;
    auto nearest = [&](cplx nu, cplx guess) {
        const Eigen::MatrixXcd M = bloch_matrix(p, wt, nu);
        const int n = static_cast<int>(M.rows());
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M - guess * Eigen::MatrixXcd::Identity(n, n));
        std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)> op =
            [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = lu.solve(x); };
        const auto res = detail::arnoldi<cplx>(op, n, 40, 4);
        std::vector<cplx> lam;
        for (const auto& th : res.theta) lam.push_back(guess + 1.0 / th);
        std::sort(lam.begin(), lam.end(),
                  [&](cplx a, cplx b) { return std::abs(a - guess) < std::abs(b - guess); });
        if (lam.size() > 1 && std::abs(lam[1] - lam[0]) < 1e-6)
            throw Error(ErrorKind::branch_ambiguity, "two eigenvalues within 1e-6 of the tracked branch");
        return lam.front();
    };
    cc.lambda0 = nearest(0.0, cplx(1e-9, 0.0));
    cc.nu.push_back(0.0);
    cc.lambda.push_back(cc.lambda0);
    for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
        cplx prev = cc.lambda0, prev2 = cc.lambda0;
        for (int j = 1; j <= samples; ++j) {
            const cplx nu = dir * (delta * j);
            const cplx guess = j == 1 ? prev : 2.0 * prev - prev2;
            const cplx lam = nearest(nu, guess + cplx(1e-9, 1e-9));
            cc.nu.push_back(nu);
            cc.lambda.push_back(lam);
            prev2 = prev;
            prev = lam;
        }
    }
    const int np = static_cast<int>(cc.nu.size());
    Eigen::MatrixXcd V(np, 5);
    Eigen::VectorXcd y(np);
    for (int i = 0; i < np; ++i) {
        cplx pw = 1.0;
        for (int q = 0; q < 5; ++q) {
            V(i, q) = pw;
            pw *= cc.nu[i];
        }
        y(i) = cc.lambda[i];
    }
    const Eigen::VectorXcd coef = V.colPivHouseholderQr().solve(y);
    cc.c_g = -coef(1).real();
    cc.D_eff = coef(2).real();
    return cc;
}

GroupVelocity group_velocity_adjoint(const Params& p, const WaveTrain& wt) {
    const int m = wt.m;
    const Eigen::MatrixXd M = bloch_matrix(p, wt, 0.0).real();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M.transpose(), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int n = 2 * m;
    GroupVelocity g;
    g.kernel_gap = sv(n - 2) / sv(0);
    if (sv(n - 1) / sv(0) > 1e-8 || g.kernel_gap < 1e-10)
        throw Error(ErrorKind::multiplicity, "adjoint kernel is not one-dimensional");
    Eigen::VectorXd ad = svd.matrixV().col(n - 1);

    const Eigen::MatrixXd d1 = fourier_d1(m) / wt.L;
    const Eigen::MatrixXd d2 = fourier_d2(m) / (wt.L * wt.L);
    const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(wt.profile_u.data(), m);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(wt.profile_w.data(), m);
    const Eigen::VectorXd du = d1 * u, dw = d1 * w, ddu = d2 * u;
    const double h = wt.h();
    const double pairing = h * (du.dot(ad.head(m)) + dw.dot(ad.tail(m)));
    ad /= pairing;
    g.normalization_check = h * (du.dot(ad.head(m)) + dw.dot(ad.tail(m)));
    g.pairing_term = 2.0 * h * ddu.dot(ad.head(m));
    g.c_g = -(g.pairing_term + wt.c);
    g.u_ad.assign(ad.data(), ad.data() + m);
    g.w_ad.assign(ad.data() + m, ad.data() + 2 * m);
    return g;
}

}  // namespace invasionlab

#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "invasionlab/core.hpp"
#include "invasionlab/front_profile.hpp"
#include "invasionlab/wavetrain.hpp"

namespace invasionlab {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Linear dispersion relation about the rest state

/// det[D nu^2 + c nu + F'(0) - lambda] assembled from the 2x2 entries.
cplx dispersion(const Params& params, double c, cplx lambda, cplx nu);

struct DispersionDerivatives {
    cplx d, d_lambda, d_nu, d_nunu, d_nulambda;
};
DispersionDerivatives dispersion_derivatives(const Params& params, double c, cplx lambda, cplx nu);

/// Roots in nu of d(lambda, .) = 0 (cubic for c != 0).
std::vector<cplx> spatial_roots(const Params& params, double c, cplx lambda);

struct DispersionRoot {
    cplx lambda;
    cplx nu;
    double c = 0.0;
    bool pinched = false;
    double residual_d = 0.0;
    double residual_dnu = 0.0;
};

/// Newton on d = d_nu = 0 from seed, then the pinching test.
DispersionRoot double_root(const Params& params, double c, cplx lambda_seed, cplx nu_seed);

/// Follows the two roots that collide at the double root along lambda* + s,
/// s in (0, 10]; pinched when they end on opposite sides of Re nu = reference.
bool is_pinched(const Params& params, const DispersionRoot& root, double reference = 0.0);

/// All distinct double roots found from a grid scan over nu.
std::vector<DispersionRoot> double_roots(const Params& params, double c);

struct SpreadingSpeed {
    double c_lin = 0.0;
    double eta_lin = 0.0;
    DispersionRoot root;
};

/// Speed at which the rightmost pinched double root crosses Re lambda = 0.
SpreadingSpeed linear_spreading_speed(const Params& params, double c_lo = 0.02, double c_hi = 5.0);

// ---------------------------------------------------------------------------
// Floquet-Bloch spectra of the wave train

/// 2m x 2m collocation matrix of D (d + nu)^2 + c (d + nu) + F'(u_wt).
Eigen::MatrixXcd bloch_matrix(const Params& params, const WaveTrain& wt, cplx nu);
/// Same with F'(u_wt) replaced by F'(0).
Eigen::MatrixXcd bloch_matrix_constant(const Params& params, const WaveTrain& wt, cplx nu);

struct BlochSpectrum {
    std::vector<double> k_grid;
    std::vector<std::vector<cplx>> eigenvalues;  ///< per k, descending real part
    std::vector<double> failed_k;
    double theta_fit = 0.0;
    double zero_eigenvalue_abs = 0.0;  ///< |lambda| of the eigenvalue nearest 0 at k = 0
    double simplicity_gap = 0.0;       ///< -(largest real part of the rest at k = 0)
    double max_real_nonzero_k = 0.0;   ///< max Re lambda over k != 0
    bool violations = false;
    double c_g = 0.0;    ///< symmetric difference on the branch at the first k != 0
    double D_eff = 0.0;  ///< zero when the grid has no k = 0 point
};

/// Eigenvalues of bloch_matrix(ik) on k_j = -k_wt/2 + j k_wt/n_k, j < n_k.
/// Solves run on up to `threads` worker threads (0 = hardware concurrency).
BlochSpectrum bloch_sweep(const Params& params, const WaveTrain& wt, int n_k, int threads = 0);

struct CriticalCurve {
    double c_g = 0.0;
    double D_eff = 0.0;
    cplx lambda0 = 0.0;
    std::vector<cplx> nu;
    std::vector<cplx> lambda;
};

/// Tracks the eigenvalue through 0 at nu = +-j delta, +-i j delta (j = 1..samples)
/// and fits a quartic in nu.
CriticalCurve critical_curve(const Params& params, const WaveTrain& wt, double delta = 0.01,
                             int samples = 3);

struct GroupVelocity {
    double c_g = 0.0;
    /// 2 <u_ad,1, u_wt,1''>; c_g = -(pairing_term + c).
    double pairing_term = 0.0;
    double normalization_check = 0.0;  ///< <u_wt', u_ad> after scaling
    double kernel_gap = 0.0;           ///< second-smallest / largest singular value
    std::vector<double> u_ad, w_ad;
};

GroupVelocity group_velocity_adjoint(const Params& params, const WaveTrain& wt);

// ---------------------------------------------------------------------------
// Weighted point spectrum of the front

struct PointSpectrumOptions {
    double eta = 0.1;
    double eta0 = 0.4;
    double x_min = -300.0;
    double x_max = 150.0;
    double h = 0.05;
    int n_eigs = 12;
    int krylov = 80;
    bool polish = true;  ///< re-solve the profile on the eigenvalue grid first
    double w_dissipation = 1e-3;  ///< stepper's fourth-difference damping on w
};

struct PointSpectrumReport {
    Grid grid;
    double eta = 0.0;
    double eta0 = 0.0;
    cplx eigenvalue_nearest_zero = 0.0;
    std::vector<cplx> eigenvalues;  ///< nearest to 0 first
    double gap = 0.0;
    double eigenfunction_angle = 0.0;
    std::vector<double> eigen_u, eigen_w;      ///< conjugated eigenfunction
    std::vector<double> adjoint_u, adjoint_w;  ///< psi_ad
    double ptr_normalization_check = 0.0;
    FrontProfile profile;  ///< the front on grid (polished or resampled)
    int polish_steps = 0;
};

/// Eigenvalues nearest 0 of omega_{eta,0} omega_0 A_ps (./(omega_{eta,0} omega_0))
/// with Dirichlet ends, the translational eigenfunction and the adjoint psi_ad
/// normalized by <omega_0 u_ps', psi_ad> = 1.
PointSpectrumReport front_point_spectrum(const Params& params, const FrontProfile& fp,
                                         const PointSpectrumOptions& opts = {});

/// Sparse matrix of the doubly conjugated operator on the interior nodes of
/// grid, unknowns ordered (u_1..u_{n-2}, w_1..w_{n-2}).
Eigen::SparseMatrix<double> conjugated_front_operator(const Params& params, const FrontProfile& fp,
                                                      double eta, double eta0,
                                                      double w_dissipation = 0.0);

struct AdjointTails {
    double left_rate = 0.0;   ///< |psi_ad| ~ exp(left_rate xi) as xi -> -inf
    double right_rate = 0.0;  ///< |psi_ad| ~ exp(-right_rate xi) as xi -> +inf
    double left_r2 = 0.0, right_r2 = 0.0;
    double left_prefactor = 0.0;  ///< sup of |psi_ad| exp(-left_rate xi) over the left tail
};

/// Log-linear fits of the chunk-maximum envelope of |psi_u| + |psi_w| on
/// xi <= -core and xi >= core, down to floor times the envelope maximum.
AdjointTails adjoint_tails(const PointSpectrumReport& r, double core = 40.0, double chunk = 2.0,
                           double floor = 1e-30);

/// Trapezoid pairing of (f_u, f_w) with psi_ad.
double ptr(std::span<const double> f_u, std::span<const double> f_w, const PointSpectrumReport& r);

/// omega_0 u_ps' (both components) on the report grid.
std::pair<std::vector<double>, std::vector<double>> weighted_derivative(const PointSpectrumReport& r);

/// Eigenvalues of a real sparse matrix nearest sigma by shift-invert Arnoldi.
std::vector<cplx> shift_invert_eigs(const Eigen::SparseMatrix<double>& A, double sigma, int count,
                                    int krylov);

}  // namespace invasionlab

#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace invasionlab::detail {

/// Ritz pairs of the operator `apply` after `k` Arnoldi steps with two passes
/// of classical Gram-Schmidt. Returns eigenvalues theta of H and the Ritz
/// vectors V y, sorted by decreasing |theta|.
template <class Scalar>
struct ArnoldiResult {
    std::vector<std::complex<double>> theta;
    std::vector<Eigen::VectorXcd> vectors;
    std::vector<double> residuals;
};

template <class Scalar>
ArnoldiResult<Scalar> arnoldi(
    const std::function<void(const Eigen::Matrix<Scalar, -1, 1>&, Eigen::Matrix<Scalar, -1, 1>&)>&
        apply,
    int n, int k, int wanted) {
    using Vec = Eigen::Matrix<Scalar, -1, 1>;
    k = std::min(k, n);
    Eigen::Matrix<Scalar, -1, -1> V(n, k + 1);
    Eigen::Matrix<Scalar, -1, -1> H = Eigen::Matrix<Scalar, -1, -1>::Zero(k + 1, k);
    Vec v0(n);
    for (int i = 0; i < n; ++i) v0(i) = Scalar(1.0 + 0.37 * std::sin(0.91 * i) + 0.1 * std::cos(3.7 * i));
    V.col(0) = v0 / v0.norm();
    int m = k;
    for (int j = 0; j < k; ++j) {
        Vec w(n);
        apply(V.col(j), w);
        for (int pass = 0; pass < 2; ++pass) {
            const Vec c = V.leftCols(j + 1).adjoint() * w;
            w -= V.leftCols(j + 1) * c;
            H.col(j).head(j + 1) += c;
        }
        const double beta = w.norm();
        H(j + 1, j) = beta;
        if (beta < 1e-14) {
            m = j + 1;
            break;
        }
        V.col(j + 1) = w / beta;
    }
    const Eigen::MatrixXcd Hm = H.topLeftCorner(m, m).template cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Hm);
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    ArnoldiResult<Scalar> out;
    const Eigen::MatrixXcd Vc = V.leftCols(m).template cast<std::complex<double>>();
    const double hnext = std::abs(H(m, m - 1));
    for (int r = 0; r < std::min(wanted, m); ++r) {
        const int i = order[r];
        out.theta.push_back(es.eigenvalues()(i));
        const Eigen::VectorXcd y = es.eigenvectors().col(i);
        out.vectors.push_back(Vc * y);
        out.residuals.push_back(hnext * std::abs(y(m - 1)));
    }
    return out;
}

}  // namespace invasionlab::detail

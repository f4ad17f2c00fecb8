#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>

namespace hyprelax {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline Mat sym_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline Mat skew_part(const Mat& m) { return 0.5 * (m - m.transpose()); }

inline double min_sym_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(m));
    return es.eigenvalues().minCoeff();
}

/// Smallest eigenvalue of a Hermitian matrix.
inline double min_herm_eigenvalue(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    return es.eigenvalues().minCoeff();
}

inline double max_herm_eigenvalue(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    return es.eigenvalues().maxCoeff();
}

/// Numerical rank from singular values, threshold tau relative to sigma_max.
inline int svd_rank(const Mat& m, double tau = 1e-10) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cut = tau * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return rank;
}

inline double min_singular_value(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    return sv.size() ? sv(sv.size() - 1) : 0.0;
}

} // namespace hyprelax

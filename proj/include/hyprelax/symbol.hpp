#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/linalg.hpp"
#include "hyprelax/system.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hyprelax {

/// Regime of the spectrum at one frequency.
enum class SpectrumRegime { AllReal, Mixed, ComplexPairPresent };

inline const char* to_string(SpectrumRegime r) {
    switch (r) {
        case SpectrumRegime::AllReal: return "all-real";
        case SpectrumRegime::Mixed: return "mixed";
        case SpectrumRegime::ComplexPairPresent: return "complex-pair-present";
    }
    return "?";
}

struct DispersionEntry {
    double xi_norm = 0.0;
    std::vector<Complex> eigenvalues;  ///< sorted by ascending real part
    SpectrumRegime regime = SpectrumRegime::AllReal;
};

/// Eigenvalues of the frequency-side decay matrix across a |xi| grid.
/// Convention: d/dt Zhat = -B Zhat, so positive real parts are damping rates.
struct DispersionCurve {
    double epsilon = 1.0;
    std::vector<DispersionEntry> entries;
    /// Bracket around the first appearance of a complex pair, if any:
    /// (last all-real grid point, first grid point with a pair).
    std::optional<std::pair<double, double>> transition_bracket;
};

/// B(xi, eps) = i sum_k xi_k A_bar[k] + L / eps.
inline CMat symbol_matrix(const PartiallyDissipativeSystem& sys, const Vec& xi, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("symbol_matrix: epsilon must be positive");
    if (xi.size() != sys.d) throw std::invalid_argument("symbol_matrix: xi has wrong dimension");
    CMat B = sys.L.cast<Complex>() / epsilon;
    for (int k = 0; k < sys.d; ++k)
        B += Complex(0.0, xi(k)) * sys.A_bar[k].cast<Complex>();
    return B;
}

/// Dense complex spectrum, sorted by (real, imaginary) part, with a residual
/// check on every eigenpair.
inline std::vector<Complex> eigen_decay(const CMat& B) {
    if (B.rows() != B.cols()) throw std::invalid_argument("eigen_decay: matrix must be square");
    Eigen::ComplexEigenSolver<CMat> es(B, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) {
        std::ostringstream oss;
        oss << "eigen_decay: eigensolver failed on matrix\n" << B;
        throw NumericError(oss.str());
    }
    const double scale = std::max(B.norm(), 1e-300);
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const CVec v = es.eigenvectors().col(i);
        const double res = (B * v - es.eigenvalues()(i) * v).norm();
        if (res > 1e-8 * scale) {
            std::ostringstream oss;
            oss << "eigen_decay: residual " << res << " exceeds tolerance on matrix\n" << B;
            throw NumericError(oss.str());
        }
    }
    std::vector<Complex> lam(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(lam.begin(), lam.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return lam;
}

inline bool eigenvalue_is_real(Complex lam) {
    return std::abs(lam.imag()) <= 1e-8 * (1.0 + std::abs(lam));
}

/// Sweep the positive frequency axis along a fixed direction (first basis
/// direction by default) and classify the spectrum at each grid point.
inline DispersionCurve sweep(const PartiallyDissipativeSystem& sys, double epsilon,
                             const std::vector<double>& xi_grid, const Vec* direction = nullptr) {
    if (xi_grid.empty()) throw std::invalid_argument("sweep: empty grid");
    Vec dir;
    if (direction) {
        dir = *direction;
    } else {
        dir = Vec::Zero(sys.d);
        dir(0) = 1.0;
    }

    DispersionCurve curve;
    curve.epsilon = epsilon;
    curve.entries.reserve(xi_grid.size());
    double last_real_xi = std::numeric_limits<double>::quiet_NaN();
    for (double xin : xi_grid) {
        DispersionEntry e;
        e.xi_norm = xin;
        e.eigenvalues = eigen_decay(symbol_matrix(sys, (xin * dir).eval(), epsilon));
        int complex_count = 0;
        for (Complex lam : e.eigenvalues)
            if (!eigenvalue_is_real(lam)) ++complex_count;
        e.regime = complex_count == 0 ? SpectrumRegime::AllReal
                   : complex_count == static_cast<int>(e.eigenvalues.size())
                       ? SpectrumRegime::ComplexPairPresent
                       : SpectrumRegime::Mixed;
        if (complex_count == 0) {
            last_real_xi = xin;
        } else if (!curve.transition_bracket) {
            curve.transition_bracket = {last_real_xi, xin};
        }
        curve.entries.push_back(std::move(e));
    }
    return curve;
}

struct AsymptoticReport {
    double worst_slow_ratio = 1.0;  ///< slow eigenvalue / (eps * c_ell * xi^2), farthest from 1
    double worst_fast_ratio = 1.0;  ///< fast eigenvalue / (1/eps), farthest from 1
    int points_used = 0;
};

/// Compare the extreme branches against their small-(eps*xi) limits:
/// the slow branch against eps * c_ell * xi^2 (c_ell = ellipticity constant,
/// the xi^2 diffusion coefficient) and the fast branch against 1/eps.
/// Only grid points with eps * sqrt(c_ell) * xi <= 0.1 qualify.
inline AsymptoticReport asymptotic_check(const DispersionCurve& curve, double epsilon,
                                         double c_ell) {
    AsymptoticReport rep;
    bool have_slow = false, have_fast = false;
    auto keep_worse = [](double& worst, double candidate, bool& have) {
        if (!have || std::abs(candidate - 1.0) > std::abs(worst - 1.0)) worst = candidate;
        have = true;
    };
    for (const auto& e : curve.entries) {
        if (epsilon * std::sqrt(c_ell) * e.xi_norm > 0.1) continue;
        keep_worse(rep.worst_fast_ratio, e.eigenvalues.back().real() * epsilon, have_fast);
        if (e.xi_norm > 0.0) {
            const double slow = e.eigenvalues.front().real();
            keep_worse(rep.worst_slow_ratio, slow / (epsilon * c_ell * e.xi_norm * e.xi_norm), have_slow);
        }
        ++rep.points_used;
    }
    if (!have_slow)
        throw std::invalid_argument("asymptotic_check: no usable low-frequency points in curve");
    return rep;
}

} // namespace hyprelax

#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyprelax {

/// First-order symmetric system with affine coefficient matrices and a
/// zeroth-order damping term acting on the trailing n2 components:
///
///   d/dt Z + sum_k A^k(Z) d/dx_k Z + (L/eps) Z = 0,
///   A^k(Z) = A_bar[k] + sum_m Z_m T[k][m].
///
/// States are stored as perturbations of the reference state, so the
/// reference itself never enters any arithmetic. The relaxation parameter
/// eps is deliberately *not* baked into L; it is supplied at call sites so
/// one system object serves a whole eps-sweep.
struct PartiallyDissipativeSystem {
    int d = 1;   ///< spatial dimension, 1 or 2
    int n1 = 1;  ///< undamped component count
    int n2 = 1;  ///< damped component count
    std::vector<Mat> A_bar;             ///< d matrices, n x n
    std::vector<std::vector<Mat>> T;    ///< T[k][m], k < d, m < n
    Mat L;                              ///< n x n, zero outside trailing block

    int n() const { return n1 + n2; }

    /// Trailing n2 x n2 block of L.
    Mat L2() const { return L.bottomRightCorner(n2, n2); }

    /// Measured damping constant: min eigenvalue of sym(L2).
    double c_dissip() const { return n2 > 0 ? min_sym_eigenvalue(L2()) : 0.0; }

    void check_dimensions() const {
        const int nn = n();
        if (d < 1 || d > 2) throw ConfigError("system: d must be 1 or 2");
        if (n1 < 0 || n2 < 1) throw ConfigError("system: need n1 >= 0, n2 >= 1");
        if (static_cast<int>(A_bar.size()) != d)
            throw ConfigError("system: expected " + std::to_string(d) + " A_bar matrices");
        if (static_cast<int>(T.size()) != d)
            throw ConfigError("system: expected " + std::to_string(d) + " T tensors");
        for (int k = 0; k < d; ++k) {
            if (A_bar[k].rows() != nn || A_bar[k].cols() != nn)
                throw ConfigError("system: A_bar size mismatch");
            if (static_cast<int>(T[k].size()) != nn)
                throw ConfigError("system: T[k] must have n slices");
            for (int m = 0; m < nn; ++m)
                if (T[k][m].rows() != nn || T[k][m].cols() != nn)
                    throw ConfigError("system: T slice size mismatch");
        }
        if (L.rows() != nn || L.cols() != nn)
            throw ConfigError("system: L size mismatch");
    }
};

/// Per-hypothesis diagnostics. Violations are flagged, never thrown.
struct HypothesisReport {
    bool symmetric = false;            ///< A_bar[k] and all T slices symmetric
    bool l_block_structure = false;    ///< L vanishes outside trailing block
    bool l2_positive = false;          ///< sym(L2) positive definite
    double c_dissip = 0.0;             ///< min eigenvalue of sym(L2)
    bool struct_assum = false;         ///< leading block of A^k independent of Z_1
    double max_asymmetry = 0.0;

    bool all() const {
        return symmetric && l_block_structure && l2_positive && struct_assum;
    }
};

inline HypothesisReport validate(const PartiallyDissipativeSystem& sys) {
    sys.check_dimensions();
    const int n = sys.n();
    HypothesisReport rep;

    double asym = 0.0;
    for (int k = 0; k < sys.d; ++k) {
        asym = std::max(asym, (sys.A_bar[k] - sys.A_bar[k].transpose()).cwiseAbs().maxCoeff());
        for (int m = 0; m < n; ++m)
            asym = std::max(asym, (sys.T[k][m] - sys.T[k][m].transpose()).cwiseAbs().maxCoeff());
    }
    rep.max_asymmetry = asym;
    rep.symmetric = asym == 0.0;

    bool block_ok = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((i < sys.n1 || j < sys.n1) && sys.L(i, j) != 0.0) block_ok = false;
    rep.l_block_structure = block_ok;

    rep.c_dissip = sys.c_dissip();
    rep.l2_positive = rep.c_dissip > 0.0;

    bool sa = true;
    for (int k = 0; k < sys.d; ++k) {
        if (sys.n1 > 0 && sys.A_bar[k].topLeftCorner(sys.n1, sys.n1).cwiseAbs().maxCoeff() != 0.0)
            sa = false;
        for (int m = 0; m < sys.n1; ++m)
            if (sys.n1 > 0 && sys.T[k][m].topLeftCorner(sys.n1, sys.n1).cwiseAbs().maxCoeff() != 0.0)
                sa = false;
    }
    rep.struct_assum = sa;
    return rep;
}

/// Coefficient matrix A^k evaluated at state perturbation Z (0-based k).
inline Mat apply_A(const PartiallyDissipativeSystem& sys, const Vec& Z, int k) {
    if (k < 0 || k >= sys.d) throw std::out_of_range("apply_A: k out of range");
    if (Z.size() != sys.n()) throw std::invalid_argument("apply_A: Z has wrong size");
    Mat A = sys.A_bar[k];
    for (int m = 0; m < sys.n(); ++m) A += Z(m) * sys.T[k][m];
    return A;
}

/// Isentropic gas parameters. The stored sound speed c_bar and the factor
/// gamma_check are the pair that symmetrizes the damped Euler system.
struct EulerParams {
    double gamma = 2.0;
    double A = 0.5;
    double rho_bar = 1.0;
    double epsilon = 1.0;

    double gamma_check() const { return 0.5 * (gamma - 1.0); }

    double c_bar() const {
        return std::sqrt(4.0 * gamma * A) / (gamma - 1.0)
               * std::pow(rho_bar, 0.5 * (gamma - 1.0));
    }

    double pressure(double rho) const { return A * std::pow(rho, gamma); }
    double dpressure(double rho) const { return A * gamma * std::pow(rho, gamma - 1.0); }

    void check() const {
        if (!(gamma > 1.0)) throw ConfigError("euler: gamma must be > 1");
        if (!(A > 0.0)) throw ConfigError("euler: A must be > 0");
        if (!(rho_bar > 0.0)) throw ConfigError("euler: rho_bar must be > 0");
        if (!(epsilon > 0.0)) throw ConfigError("euler: epsilon must be > 0");
    }
};

inline double sound_speed(double rho, const EulerParams& p) {
    if (!(rho > 0.0)) throw std::domain_error("sound_speed: rho must be positive");
    return std::sqrt(4.0 * p.gamma * p.A) / (p.gamma - 1.0)
           * std::pow(rho, 0.5 * (p.gamma - 1.0));
}

inline double rho_from_c(double c, const EulerParams& p) {
    if (!(c > 0.0)) throw std::domain_error("rho_from_c: c must be positive");
    const double base = (p.gamma - 1.0) / std::sqrt(4.0 * p.A * p.gamma) * c;
    return std::pow(base, 2.0 / (p.gamma - 1.0));
}

/// Symmetrized damped Euler system in the variables Z = (c - c_bar, v).
/// n1 = 1 (sound speed), n2 = d (velocity); L stores diag(0, I) and the
/// 1/eps scaling is applied by solver/symbol calls.
inline PartiallyDissipativeSystem euler_system(const EulerParams& p, int d = 1) {
    p.check();
    if (d < 1 || d > 2) throw ConfigError("euler_system: d must be 1 or 2");
    const int n = 1 + d;
    const double gc = p.gamma_check();
    const double a = gc * p.c_bar();

    PartiallyDissipativeSystem sys;
    sys.d = d;
    sys.n1 = 1;
    sys.n2 = d;
    sys.L = Mat::Zero(n, n);
    sys.L.bottomRightCorner(d, d).setIdentity();

    sys.A_bar.assign(d, Mat::Zero(n, n));
    sys.T.assign(d, std::vector<Mat>(n, Mat::Zero(n, n)));
    for (int k = 0; k < d; ++k) {
        // acoustic coupling between c and v_k
        sys.A_bar[k](0, 1 + k) = a;
        sys.A_bar[k](1 + k, 0) = a;
        sys.T[k][0](0, 1 + k) = gc;
        sys.T[k][0](1 + k, 0) = gc;
        // transport of every component by v_k
        sys.T[k][1 + k] = Mat::Identity(n, n);
    }
    return sys;
}

} // namespace hyprelax

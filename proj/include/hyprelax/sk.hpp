#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/linalg.hpp"
#include "hyprelax/system.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hyprelax {

/// Weights of the hypocoercivity correction. eps[q] for q = 1..n-1 weight the
/// cross terms; eps[0] additionally enters the Gram sum behind n_vbar.
struct HypocoercivityParams {
    std::vector<double> eps;  ///< size n, all strictly positive

    static HypocoercivityParams ones(int n) {
        return {std::vector<double>(static_cast<std::size_t>(n), 1.0)};
    }

    static HypocoercivityParams geometric(int n, double eta) {
        HypocoercivityParams p;
        p.eps.resize(static_cast<std::size_t>(n));
        double w = 1.0;
        for (int q = 0; q < n; ++q) {
            p.eps[static_cast<std::size_t>(q)] = w;
            w *= eta;
        }
        return p;
    }

    void check_size(int n) const {
        if (static_cast<int>(eps.size()) != n)
            throw std::invalid_argument("hypocoercivity params: need n weights");
    }

    void check(int n) const {
        check_size(n);
        for (double e : eps)
            if (!(e > 0.0)) throw std::invalid_argument("hypocoercivity params: weights must be positive");
    }
};

struct SkReport {
    bool sk_holds = false;
    double n_vbar = 0.0;
    Vec worst_omega;                 ///< direction achieving the minimum
    std::vector<int> kalman_ranks;   ///< one per sampled omega
    double ellipticity_constant = 0.0;
    bool elliptic = false;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kSkTolerance = 1e-10;

/// Unit directions used to sample the sphere: exactly {+1,-1} for d=1,
/// a uniform angular grid for d=2.
inline std::vector<Vec> omega_samples(int d, int count = 64) {
    std::vector<Vec> out;
    if (d == 1) {
        Vec plus(1), minus(1);
        plus << 1.0;
        minus << -1.0;
        out = {plus, minus};
    } else if (d == 2) {
        if (count < 1) throw std::invalid_argument("omega_samples: count must be >= 1");
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const double theta = 2.0 * M_PI * i / count;
            Vec w(2);
            w << std::cos(theta), std::sin(theta);
            out.push_back(w);
        }
    } else {
        throw std::invalid_argument("omega_samples: d must be 1 or 2");
    }
    return out;
}

/// Directional symbol sum_k omega_k A_bar[k]; symmetric by construction.
inline Mat m_omega(const PartiallyDissipativeSystem& sys, const Vec& omega) {
    if (omega.size() != sys.d) throw std::invalid_argument("m_omega: omega has wrong dimension");
    if (std::abs(omega.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("m_omega: omega must be a unit vector");
    Mat m = Mat::Zero(sys.n(), sys.n());
    for (int k = 0; k < sys.d; ++k) m += omega(k) * sys.A_bar[k];
    return m;
}

/// Rank of the stacked controllability matrix [L; LM; ...; LM^{n-1}].
inline int kalman_rank(const Mat& M, const Mat& L) {
    if (M.rows() != M.cols() || L.rows() != L.cols() || M.rows() != L.rows())
        throw std::invalid_argument("kalman_rank: need square matrices of equal size");
    const int n = static_cast<int>(M.rows());
    Mat stacked(n * n, n);
    Mat block = L;
    for (int q = 0; q < n; ++q) {
        stacked.middleRows(q * n, n) = block;
        block = block * M;
    }
    return svd_rank(stacked, kRankTolerance);
}

/// min over sampled omega of the smallest eigenvalue of the weighted Gram
/// matrix sum_q eps_q (M^q)' L'L M^q. Exact in the state direction, sampled
/// in omega.
inline double n_vbar(const PartiallyDissipativeSystem& sys, const HypocoercivityParams& params,
                     const std::vector<Vec>& omegas, Vec* worst = nullptr) {
    const int n = sys.n();
    params.check(n);
    double best = std::numeric_limits<double>::infinity();
    const Mat LtL = sys.L.transpose() * sys.L;
    for (const Vec& w : omegas) {
        const Mat M = m_omega(sys, w);
        Mat gram = Mat::Zero(n, n);
        Mat Mq = Mat::Identity(n, n);
        for (int q = 0; q < n; ++q) {
            gram += params.eps[static_cast<std::size_t>(q)] * Mq.transpose() * LtL * Mq;
            Mq = Mq * M;
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(gram);
        const double lam = es.eigenvalues().minCoeff();
        if (lam < best) {
            best = lam;
            if (worst) *worst = w;
        }
    }
    return std::max(best, 0.0);
}

/// Strong-ellipticity constant of the second-order operator built from the
/// off-diagonal blocks: min over unit xi of the smallest eigenvalue of
/// sym(sum_{k,l} A12^k L2^{-1} A21^l xi_k xi_l). Requires vanishing leading
/// blocks of A_bar; refuses otherwise.
inline std::pair<bool, double> ellipticity_check(const PartiallyDissipativeSystem& sys,
                                                 int xi_count = 64) {
    const int n1 = sys.n1, n2 = sys.n2;
    for (int k = 0; k < sys.d; ++k)
        if (n1 > 0 && sys.A_bar[k].topLeftCorner(n1, n1).cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("ellipticity_check: leading blocks of A_bar must vanish");
    if (n1 == 0) return {true, std::numeric_limits<double>::infinity()};

    const Mat L2inv = sys.L2().inverse();
    std::vector<Mat> A12(static_cast<std::size_t>(sys.d)), A21(static_cast<std::size_t>(sys.d));
    for (int k = 0; k < sys.d; ++k) {
        A12[static_cast<std::size_t>(k)] = sys.A_bar[k].topRightCorner(n1, n2);
        A21[static_cast<std::size_t>(k)] = sys.A_bar[k].bottomLeftCorner(n2, n1);
    }

    double cmin = std::numeric_limits<double>::infinity();
    for (const Vec& xi : omega_samples(sys.d, xi_count)) {
        Mat symb = Mat::Zero(n1, n1);
        for (int k = 0; k < sys.d; ++k)
            for (int l = 0; l < sys.d; ++l)
                symb += xi(k) * xi(l) * A12[static_cast<std::size_t>(k)] * L2inv * A21[static_cast<std::size_t>(l)];
        cmin = std::min(cmin, min_sym_eigenvalue(symb));
    }
    return {cmin > kSkTolerance, cmin};
}

/// Decide the stability condition by the Kalman rank criterion at each
/// sampled direction; also reports n_vbar at unit weights and the
/// ellipticity diagnostics when they apply.
inline SkReport sk_condition(const PartiallyDissipativeSystem& sys, const std::vector<Vec>& omegas) {
    if (omegas.empty()) throw std::invalid_argument("sk_condition: empty omega sample set");
    SkReport rep;
    rep.kalman_ranks.reserve(omegas.size());
    int min_rank = sys.n();
    for (const Vec& w : omegas) {
        const int r = kalman_rank(m_omega(sys, w), sys.L);
        rep.kalman_ranks.push_back(r);
        min_rank = std::min(min_rank, r);
    }
    rep.sk_holds = (min_rank == sys.n());
    rep.n_vbar = n_vbar(sys, HypocoercivityParams::ones(sys.n()), omegas, &rep.worst_omega);

    bool leading_zero = true;
    for (int k = 0; k < sys.d; ++k)
        if (sys.n1 > 0 && sys.A_bar[k].topLeftCorner(sys.n1, sys.n1).cwiseAbs().maxCoeff() != 0.0)
            leading_zero = false;
    if (leading_zero) {
        auto [ok, c] = ellipticity_check(sys, static_cast<int>(omegas.size()));
        rep.elliptic = ok;
        rep.ellipticity_constant = c;
    }
    return rep;
}

/// Hermitian matrix of the correction form at direction omega:
/// I(Z) = Z^* H Z with H = sum_q eps_q * i * skew((LM^{q-1})'(LM^q)).
/// The scalar product convention (conjugation on the second factor) is the
/// one under which the corrected functional below actually decays; with the
/// opposite convention no decay certificate exists.
inline CMat correction_matrix(const PartiallyDissipativeSystem& sys,
                              const HypocoercivityParams& params, const Vec& omega) {
    const int n = sys.n();
    params.check_size(n);
    const Mat M = m_omega(sys, omega);
    const Mat LtL = sys.L.transpose() * sys.L;
    CMat H = CMat::Zero(n, n);
    Mat Mq_prev = Mat::Identity(n, n);
    for (int q = 1; q < n; ++q) {
        const Mat Cq = Mq_prev.transpose() * LtL * (Mq_prev * M);  // (LM^{q-1})'(LM^q)
        const Mat K = skew_part(Cq);
        H += params.eps[static_cast<std::size_t>(q)] * Complex(0.0, 1.0) * K.cast<Complex>();
        Mq_prev = Mq_prev * M;
    }
    return H;
}

/// Evaluate the corrected functional at one frequency: returns
/// (|Z|^2 + min(rho, 1/rho) * I, I) where I is the imaginary cross term.
inline std::pair<double, double> lyapunov_value(const PartiallyDissipativeSystem& sys,
                                                const HypocoercivityParams& params, double rho,
                                                const Vec& omega, const CVec& Zhat) {
    if (!(rho > 0.0)) throw std::invalid_argument("lyapunov_value: rho must be positive");
    const CMat H = correction_matrix(sys, params, omega);
    const double I_value = (Zhat.adjoint() * H * Zhat)(0).real();
    const double L_value = Zhat.squaredNorm() + std::min(rho, 1.0 / rho) * I_value;
    return {L_value, I_value};
}

struct LyapunovCertificate {
    HypocoercivityParams params;
    double eta = 0.0;    ///< geometric ratio behind the weights
    double kappa = 0.0;  ///< certified decay rate factor
    double worst_rho = 0.0;
    Vec worst_omega;
};

/// Default log-spaced grid of |xi| used by the certificate search.
inline std::vector<double> default_rho_grid(int count = 32, double lo = 1e-3, double hi = 1e3) {
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    return grid;
}

/// Search a geometric weight schedule eps_q = eta^q certifying uniform decay
/// of the corrected quadratic form along every sampled frequency:
/// with B = i rho M + L and P = I + min(rho,1/rho) H, require
/// (1/2) I <= P <= 2 I and B^*P + PB >= 2 kappa min(1,rho^2) I.
/// kappa is then maximized by bisection to three digits.
inline LyapunovCertificate lyapunov_search(const PartiallyDissipativeSystem& sys,
                                           const std::vector<double>& rho_grid,
                                           const std::vector<Vec>& omegas) {
    if (!sk_condition(sys, omegas).sk_holds)
        throw std::invalid_argument("lyapunov_search: stability condition fails, no certificate exists");
    const int n = sys.n();
    const CMat Id = CMat::Identity(n, n);

    struct Frequency {
        CMat B;
        CMat P;
        double weight;  // min(1, rho^2)
        double rho;
        Vec omega;
    };

    for (int half = 1; half <= 20; ++half) {
        const double eta = std::pow(2.0, -half);
        const auto params = HypocoercivityParams::geometric(n, eta);

        std::vector<Frequency> freqs;
        freqs.reserve(rho_grid.size() * omegas.size());
        bool window_ok = true;
        for (const Vec& w : omegas) {
            const CMat H = correction_matrix(sys, params, w);
            const Mat M = m_omega(sys, w);
            for (double rho : rho_grid) {
                Frequency f;
                f.B = Complex(0.0, 1.0) * rho * M.cast<Complex>() + sys.L.cast<Complex>();
                f.P = Id + std::min(rho, 1.0 / rho) * H;
                f.weight = std::min(1.0, rho * rho);
                f.rho = rho;
                f.omega = w;
                const CMat Pherm = 0.5 * (f.P + f.P.adjoint());
                if (min_herm_eigenvalue(Pherm) < 0.5 || max_herm_eigenvalue(Pherm) > 2.0) {
                    window_ok = false;
                    break;
                }
                freqs.push_back(std::move(f));
            }
            if (!window_ok) break;
        }
        if (!window_ok) continue;

        // kappa feasible iff for every frequency
        // lambda_max(-(B*P+PB) + 2 kappa weight I) <= 0
        auto feasible = [&](double kappa, double* worst_margin, const Frequency** worst_f) {
            double margin = -std::numeric_limits<double>::infinity();
            const Frequency* arg = nullptr;
            for (const auto& f : freqs) {
                const CMat Q = -(f.B.adjoint() * f.P + f.P * f.B);
                const double m = max_herm_eigenvalue(Q + 2.0 * kappa * f.weight * Id);
                if (m > margin) {
                    margin = m;
                    arg = &f;
                }
            }
            if (worst_margin) *worst_margin = margin;
            if (worst_f) *worst_f = arg;
            return margin <= 0.0;
        };

        double margin0 = 0.0;
        const Frequency* worst = nullptr;
        if (!feasible(1e-12, &margin0, &worst)) continue;

        double lo = 1e-12, hi = 1.0;
        while (feasible(hi, nullptr, nullptr) && hi < 1e6) hi *= 2.0;
        for (int it = 0; it < 60 && (hi - lo) > 1e-3 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (feasible(mid, nullptr, nullptr))
                lo = mid;
            else
                hi = mid;
        }
        feasible(lo, &margin0, &worst);

        LyapunovCertificate cert;
        cert.params = params;
        cert.eta = eta;
        cert.kappa = lo;
        if (worst) {
            cert.worst_rho = worst->rho;
            cert.worst_omega = worst->omega;
        }
        return cert;
    }
    throw NumericError("lyapunov_search: no certificate found over eta in {2^-1..2^-20}");
}

} // namespace hyprelax

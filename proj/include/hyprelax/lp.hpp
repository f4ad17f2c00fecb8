#pragma once

#include "hyprelax/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hyprelax {

/// Smooth radial cutoff pair behind the dyadic decomposition:
/// chi == 1 on |xi| <= 3/4, chi == 0 on |xi| >= 4/3, smooth and monotone in
/// between; phi(xi) = chi(xi/2) - chi(xi) so that sum_j phi(2^-j rho) = 1
/// for every rho > 0 (the partial sums telescope exactly).
struct CutoffProfile {
    static constexpr double inner = 0.75;        // chi == 1 up to here
    static constexpr double outer = 4.0 / 3.0;   // chi == 0 from here on

    static double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

    static double chi(double rho) {
        if (rho <= inner) return 1.0;
        if (rho >= outer) return 0.0;
        const double t = (outer - rho) / (outer - inner);
        const double f = bump(t);
        return f / (f + bump(1.0 - t));
    }

    static double phi(double rho) { return chi(0.5 * rho) - chi(rho); }

    /// phi is supported in (3/4, 8/3) and equals 1 on [4/3, 3/2].
    static constexpr double phi_support_lo = 0.75;
    static constexpr double phi_support_hi = 8.0 / 3.0;
};

/// Besov norm descriptor: regularity s, integrability p (>= 1 or infinity),
/// block-summation exponent r in {1, 2, infinity}.
struct BesovIndex {
    double s = 0.0;
    double p = 2.0;
    double r = 1.0;

    void check() const {
        if (!(p >= 1.0)) throw std::invalid_argument("besov: p must be >= 1 or infinity");
        if (!(r == 1.0 || r == 2.0 || std::isinf(r)))
            throw std::invalid_argument("besov: r must be 1, 2 or infinity");
    }
};

/// Low/high threshold. The two parts overlap by design: the low norm sums
/// blocks j <= J+1, the high norm sums j >= J.
struct FrequencySplit {
    int J = 0;
};

/// Range of dyadic blocks that intersect the grid's frequency lattice
/// (zero mode excluded). Blocks outside this window vanish identically.
inline std::pair<int, int> block_range(const TorusGrid& grid) {
    const double f_min = 1.0 / grid.L_len;
    const double f_max = grid.nyquist() * std::sqrt(static_cast<double>(grid.d));
    // block j is supported in (3/4 * 2^j, 8/3 * 2^j)
    int j_lo = static_cast<int>(std::floor(std::log2(f_min / CutoffProfile::phi_support_hi))) ;
    while (CutoffProfile::phi_support_hi * std::pow(2.0, j_lo) <= f_min) ++j_lo;
    int j_hi = static_cast<int>(std::ceil(std::log2(f_max / CutoffProfile::phi_support_lo)));
    while (CutoffProfile::phi_support_lo * std::pow(2.0, j_hi) >= f_max) --j_hi;
    return {j_lo, j_hi};
}

inline bool block_resolvable(const TorusGrid& grid, int j) {
    auto [lo, hi] = block_range(grid);
    return j >= lo && j <= hi;
}

/// Dyadic block: multiplier phi(2^-j |k|). Out-of-range j gives the zero
/// field (nothing lives there on this grid).
inline SpectralField dyadic_block(const SpectralField& f, int j) {
    if (!block_resolvable(f.grid(), j)) return SpectralField::zero(f.grid());
    const double scale = std::pow(2.0, -j);
    return f.radial_multiplier([scale](double rho) { return CutoffProfile::phi(scale * rho); });
}

/// Low-frequency cut: multiplier chi(2^-j |k|); keeps the zero mode.
inline SpectralField low_cut(const SpectralField& f, int j) {
    const double scale = std::pow(2.0, -j);
    return f.radial_multiplier([scale](double rho) { return CutoffProfile::chi(scale * rho); });
}

namespace detail {

inline double lr_accumulate(const std::vector<double>& terms, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (double t : terms) m = std::max(m, t);
        return m;
    }
    double s = 0.0;
    for (double t : terms) s += std::pow(t, r);
    return std::pow(s, 1.0 / r);
}

} // namespace detail

/// Per-block L^p norms of one field, computed once and reused by every
/// Besov-norm assembly over the same field.
struct BlockLpTable {
    int j_lo = 0;
    double p = 2.0;
    std::vector<double> lp;  ///< ||block_{j_lo + i}||_{L^p}

    int j_hi() const { return j_lo + static_cast<int>(lp.size()) - 1; }
};

inline BlockLpTable block_lp_table(const SpectralField& f, double p) {
    auto [j_lo, j_hi] = block_range(f.grid());
    BlockLpTable t;
    t.j_lo = j_lo;
    t.p = p;
    t.lp.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
    for (int j = j_lo; j <= j_hi; ++j) t.lp.push_back(dyadic_block(f, j).lp_norm(p));
    return t;
}

/// l^r accumulation of 2^{js} ||block_j||_{L^p} over j in [lo, hi]
/// intersected with the table's range.
inline double besov_from_table(const BlockLpTable& t, double s, double r,
                               int lo = std::numeric_limits<int>::min(),
                               int hi = std::numeric_limits<int>::max()) {
    std::vector<double> terms;
    terms.reserve(t.lp.size());
    for (std::size_t i = 0; i < t.lp.size(); ++i) {
        const int j = t.j_lo + static_cast<int>(i);
        if (j < lo || j > hi) continue;
        terms.push_back(std::pow(2.0, s * j) * t.lp[i]);
    }
    return detail::lr_accumulate(terms, r);
}

/// Homogeneous Besov semi-norm: l^r over resolvable blocks of
/// 2^{js} * ||block_j||_{L^p}. The zero mode never contributes.
inline double besov_norm(const SpectralField& f, const BesovIndex& idx) {
    idx.check();
    return besov_from_table(block_lp_table(f, idx.p), idx.s, idx.r);
}

/// Split semi-norms with the two-block overlap: low sums j <= J+1 in
/// idx_low, high sums j >= J in idx_high.
inline std::pair<double, double> split_norms(const SpectralField& f, const BesovIndex& idx_low,
                                             const BesovIndex& idx_high, int J) {
    idx_low.check();
    idx_high.check();
    const BlockLpTable tl = block_lp_table(f, idx_low.p);
    const BlockLpTable th = idx_high.p == idx_low.p ? tl : block_lp_table(f, idx_high.p);
    return {besov_from_table(tl, idx_low.s, idx_low.r, std::numeric_limits<int>::min(), J + 1),
            besov_from_table(th, idx_high.s, idx_high.r, J)};
}

/// ||grad block_j||_{L^p} / (2^j ||block_j||_{L^p}); the gradient norm is the
/// sum of the component norms. Throws on a vanishing block.
inline double bernstein_check(const SpectralField& f, int j, double p) {
    const SpectralField block = dyadic_block(f, j);
    const double denom = block.lp_norm(p);
    if (denom <= 1e-14 * f.lp_norm(p)) throw std::domain_error("bernstein_check: block is zero");
    double num = 0.0;
    for (int axis = 0; axis < f.grid().d; ++axis) num += block.derivative(axis).lp_norm(p);
    return num / (std::pow(2.0, j) * denom);
}

/// Worst deviation of sum_j phi(2^-j |k|) from 1 over the active lattice
/// frequencies of the grid (zero mode excluded).
inline double partition_of_unity_error(const TorusGrid& grid) {
    auto [j_lo, j_hi] = block_range(grid);
    double worst = 0.0;
    for (std::size_t flat = 1; flat < grid.size(); ++flat) {
        const double rho = grid.freq_norm(flat);
        if (rho == 0.0) continue;
        double s = 0.0;
        for (int j = j_lo; j <= j_hi; ++j) s += CutoffProfile::phi(std::pow(2.0, -j) * rho);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

} // namespace hyprelax

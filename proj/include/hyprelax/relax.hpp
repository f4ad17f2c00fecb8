#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/euler.hpp"
#include "hyprelax/pme.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hyprelax {

/// Frequency threshold separating the epsilon-adapted low and high ranges.
inline int threshold(double epsilon, int k_p) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("threshold: epsilon must be positive");
    return static_cast<int>(std::floor(-std::log2(epsilon))) + k_p;
}

/// How the initial velocity of the rescaled runs is prepared.
enum class VelocityPrep {
    Darcy,           ///< balanced: v = -grad P(N0) / N0
    Zero,            ///< rest
    FixedUnrescaled  ///< fixed unrescaled profile, i.e. v = v_fixed / epsilon
};

inline const char* to_string(VelocityPrep v) {
    switch (v) {
        case VelocityPrep::Darcy: return "darcy";
        case VelocityPrep::Zero: return "zero";
        case VelocityPrep::FixedUnrescaled: return "fixed-unrescaled";
    }
    return "?";
}

struct SweepConfig {
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
    double p = 2.0;
    int k_p = 2;
    EulerParams params{.gamma = 2.0, .A = 0.5, .rho_bar = 1.0, .epsilon = 1.0};
    TorusGrid grid{1, 512};
    double amplitude = 1e-2;
    std::uint64_t seed = 1;
    double T = 1.0;  ///< horizon (rescaled time for the sweep, original time otherwise)
    VelocityPrep velocity = VelocityPrep::Darcy;
    int band_j_lo = 0;
    int band_j_hi = 2;
    double dt = 0.0;     ///< 0 selects the stability-limited default
    int diag_every = 2;
    double density_offset_eps_scale = 0.0;  ///< adds eps * scale * amplitude * phi to the gas density

    void check() const {
        grid.check();
        params.check();
        for (double e : epsilons)
            if (!(e > 0.0)) throw ConfigError("sweep: epsilons must be positive");
        if (!(amplitude > 0.0)) throw ConfigError("sweep: amplitude must be positive");
        if (!(p == 2.0 || p == 4.0)) throw ConfigError("sweep: p must be 2 or 4");
        if (!(T > 0.0)) throw ConfigError("sweep: T must be positive");
    }
};

/// Running assembly of the solution functional from a diagnostics series:
/// sup-in-time terms as running maxima, time integrals by the trapezoid rule.
struct XFunctional {
    double low_linf = 0.0;     ///< sup_t |(c,v)|^{l,J}, B^{d/p}
    double high_linf = 0.0;    ///< sup_t |(c,v)|^{h,J}, B^{d/2+1}
    double int_c_low = 0.0;    ///< int |c|^{l,J}, B^{d/p+2}
    double int_v_low = 0.0;    ///< int |v|^{l,J}, B^{d/p+1}
    double int_high = 0.0;     ///< int |(c,v)|^{h,J}, B^{d/2+1}
    double int_damped = 0.0;   ///< int |W'|, B^{d/p}
    double l2_v_sq = 0.0;      ///< int |v|^2, B^{d/p}

    void absorb(const DiagnosticsRecord& prev, const DiagnosticsRecord& cur) {
        const double h = cur.t - prev.t;
        low_linf = std::max({low_linf, prev.low_state_dp, cur.low_state_dp});
        high_linf = std::max({high_linf, prev.high_state_d21, cur.high_state_d21});
        int_c_low += 0.5 * h * (prev.low_c_dp2 + cur.low_c_dp2);
        int_v_low += 0.5 * h * (prev.low_v_dp1 + cur.low_v_dp1);
        int_high += 0.5 * h * (prev.high_state_d21 + cur.high_state_d21);
        int_damped += 0.5 * h * (prev.damped_mode_dp + cur.damped_mode_dp);
        l2_v_sq += 0.5 * h * (prev.v_dp * prev.v_dp + cur.v_dp * cur.v_dp);
    }

    double total(double eps) const {
        return low_linf + eps * high_linf + eps * int_c_low + int_v_low + int_high + int_damped +
               std::sqrt(l2_v_sq / eps);
    }
};

/// Time series of the functional over a recorded trajectory.
inline std::vector<std::pair<double, double>> x_functional(const std::vector<DiagnosticsRecord>& recs,
                                                           double eps) {
    if (recs.empty()) throw std::invalid_argument("x_functional: empty trajectory");
    std::vector<std::pair<double, double>> series;
    series.reserve(recs.size());
    XFunctional x;
    x.low_linf = recs.front().low_state_dp;
    x.high_linf = recs.front().high_state_d21;
    series.emplace_back(recs.front().t, x.total(eps));
    for (std::size_t i = 1; i < recs.size(); ++i) {
        x.absorb(recs[i - 1], recs[i]);
        series.emplace_back(recs[i].t, x.total(eps));
    }
    return series;
}

struct MatchedData {
    SpectralField pme_density;      ///< N0
    SpectralField c_tilde;          ///< matched sound-speed deviation
    std::vector<SpectralField> v;   ///< prepared velocity
    double initial_density_gap = 0.0;  ///< ||rho0 - N0|| in B^{d/p-1}
};

/// Shared initial data for one epsilon of the sweep: the gas density matches
/// the diffusion density exactly (unless an epsilon-scaled offset is
/// requested), and the velocity follows the configured preparation.
inline MatchedData matched_initial_data(const SweepConfig& cfg, double eps) {
    cfg.check();
    Rng rng(cfg.seed);
    const SpectralField psi = random_band_scalar(cfg.grid, cfg.band_j_lo, cfg.band_j_hi, rng);
    const SpectralField phi_v = random_band_scalar(cfg.grid, cfg.band_j_lo, cfg.band_j_hi, rng);
    const SpectralField phi_off = random_band_scalar(cfg.grid, cfg.band_j_lo, cfg.band_j_hi, rng);

    MatchedData out;
    const double rb = cfg.params.rho_bar;
    out.pme_density = psi.map([&](double x) { return rb + cfg.amplitude * x; });
    if (out.pme_density.grid().N != cfg.grid.N)
        throw ConfigError("matched_initial_data: grid mismatch");

    SpectralField gas_density = out.pme_density;
    if (cfg.density_offset_eps_scale != 0.0)
        gas_density += (eps * cfg.density_offset_eps_scale * cfg.amplitude) * phi_off;

    for (double x : gas_density.values())
        if (!(x > 0.0)) throw ConfigError("matched_initial_data: amplitude too large for positivity");

    const double cb = cfg.params.c_bar();
    out.c_tilde = gas_density.map([&](double x) { return sound_speed(x, cfg.params) - cb; });

    switch (cfg.velocity) {
        case VelocityPrep::Darcy: {
            PmeState n0{out.pme_density, 0.0, cfg.params};
            out.v = darcy_velocity(n0);
            break;
        }
        case VelocityPrep::Zero: {
            for (int m = 0; m < cfg.grid.d; ++m) out.v.push_back(SpectralField::zero(cfg.grid));
            break;
        }
        case VelocityPrep::FixedUnrescaled: {
            out.v.push_back((cfg.amplitude / eps) * phi_v);
            for (int m = 1; m < cfg.grid.d; ++m) out.v.push_back(SpectralField::zero(cfg.grid));
            break;
        }
    }

    const SpectralField gap = gas_density - out.pme_density;
    const double dd = cfg.grid.d;
    out.initial_density_gap = besov_norm(gap, {.s = dd / cfg.p - 1.0, .p = cfg.p, .r = 1.0});
    return out;
}

struct RateRow {
    double eps = 0.0;
    double sup_density_gap = 0.0;   ///< sup_t ||rho - N|| in B^{d/p-1}
    double int_density_gap = 0.0;   ///< int ||rho - N|| in B^{d/p+1}
    double int_darcy_residual = 0.0;///< int ||v + grad P(rho)/rho|| in B^{d/p}
    double x_total = 0.0;           ///< X_{p,eps}(T)
    double data_norm = 0.0;         ///< hybrid norm of the initial data
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< max |log y - fit| over the points
};

/// Ordinary least squares of log(y) against log(eps).
inline FitResult fit_loglog(const std::vector<double>& eps, const std::vector<double>& y) {
    if (eps.size() != y.size() || eps.size() < 3)
        throw std::invalid_argument("fit_loglog: need at least 3 points");
    const auto n = static_cast<double>(eps.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
        const double x = std::log(eps[i]), yy = std::log(y[i]);
        sx += x;
        sy += yy;
        sxx += x * x;
        sxy += x * yy;
    }
    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double pred = fit.slope * std::log(eps[i]) + fit.intercept;
        fit.residual = std::max(fit.residual, std::abs(std::log(y[i]) - pred));
    }
    return fit;
}

struct RateReport {
    std::vector<RateRow> rows;
    FitResult sup_gap_fit;
    FitResult int_gap_fit;
    FitResult darcy_fit;
    bool fitted = false;
    double uniform_ratio = 0.0;  ///< max/min of x_total / data_norm across eps
};

namespace detail {

inline double stable_dt(const SweepConfig& cfg, double eps, bool rescaled) {
    const double a = cfg.params.gamma_check() * cfg.params.c_bar();
    const double k_max = (cfg.grid.N / 3) / cfg.grid.L_len;
    const double speed = cfg.params.gamma_check() * (cfg.amplitude + cfg.params.c_bar()) +
                         (rescaled && cfg.velocity == VelocityPrep::FixedUnrescaled
                              ? cfg.amplitude / eps
                              : cfg.amplitude);
    double dt = 0.4 * cfg.grid.dx() / speed;
    if (rescaled) dt = std::min(dt, 1.8 * eps / (a * k_max));
    dt = std::min(dt, cfg.T / 64.0);
    return dt;
}

inline double state_hybrid_data_norm(const SpectralField& c0, const std::vector<SpectralField>& v0,
                                     double p, int J, double eps) {
    const double dd = c0.grid().d;
    const BesovIndex low{.s = dd / p, .p = p, .r = 1.0};
    const BesovIndex high{.s = dd / 2.0 + 1.0, .p = 2.0, .r = 1.0};
    auto [cl, ch] = split_norms(c0, low, high, J);
    double lo = cl, hi = ch;
    for (const auto& vi : v0) {
        auto [vl, vh] = split_norms(vi, low, high, J);
        lo += vl;
        hi += vh;
    }
    return lo + eps * hi;
}

} // namespace detail

struct EpsilonRunResult {
    RateRow row;
    std::vector<DiagnosticsRecord> euler_records;
    bool aborted = false;
    std::string abort_reason;
};

/// Rescaled gas run against the diffusion limit from the given data: marches
/// both solvers in lockstep on one grid and accumulates the three error
/// columns plus the solution functional.
inline EpsilonRunResult run_epsilon_from(const SweepConfig& cfg, double eps,
                                         const MatchedData& data) {
    const int J = threshold(eps, cfg.k_p);
    const double dd = cfg.grid.d;

    SolverConfig scfg;
    scfg.grid = cfg.grid;
    scfg.dt = cfg.dt > 0.0 ? cfg.dt : detail::stable_dt(cfg, eps, true);
    scfg.T = cfg.T;
    scfg.rescaled = true;
    scfg.besov_p = cfg.p;
    scfg.split_J = J;
    scfg.diag_every = cfg.diag_every;

    EulerState es{data.c_tilde, data.v, 0.0, cfg.params};
    PmeState ps{data.pme_density, 0.0, cfg.params};

    EpsilonRunResult res;
    res.row.eps = eps;
    res.row.data_norm = detail::state_hybrid_data_norm(data.c_tilde, data.v, cfg.p, J, eps);

    const BesovIndex gap_lo{.s = dd / cfg.p - 1.0, .p = cfg.p, .r = 1.0};
    const BesovIndex gap_hi{.s = dd / cfg.p + 1.0, .p = cfg.p, .r = 1.0};
    const BesovIndex darcy_idx{.s = dd / cfg.p, .p = cfg.p, .r = 1.0};
    const double cb = cfg.params.c_bar();

    double prev_t = 0.0, prev_gap_hi = 0.0, prev_darcy = 0.0;
    bool have_prev = false;
    DiagnosticsRecord prev_rec;
    XFunctional x;

    auto measure = [&](bool first) {
        const SpectralField rho =
            es.c_tilde.map([&](double y) { return rho_from_c(y + cb, cfg.params); });
        const SpectralField gap = rho - ps.density;
        const BlockLpTable tg = block_lp_table(gap, cfg.p);
        const double gl = besov_from_table(tg, gap_lo.s, 1.0);
        const double gh = besov_from_table(tg, gap_hi.s, 1.0);
        double darcy = 0.0;
        for (const auto& wi : damped_mode(es, eps, /*rescaled=*/true))
            darcy += besov_norm(wi, darcy_idx);
        const DiagnosticsRecord rec = diagnose(es, scfg, eps);

        res.row.sup_density_gap = std::max(res.row.sup_density_gap, gl);
        if (have_prev) {
            const double h = es.t - prev_t;
            res.row.int_density_gap += 0.5 * h * (prev_gap_hi + gh);
            res.row.int_darcy_residual += 0.5 * h * (prev_darcy + darcy);
            x.absorb(prev_rec, rec);
        } else if (first) {
            x.low_linf = rec.low_state_dp;
            x.high_linf = rec.high_state_d21;
        }
        prev_t = es.t;
        prev_gap_hi = gh;
        prev_darcy = darcy;
        prev_rec = rec;
        have_prev = true;
        res.euler_records.push_back(rec);
    };

    measure(true);
    const long steps = std::lround(std::ceil(cfg.T / scfg.dt - 1e-12));
    for (long i = 0; i < steps; ++i) {
        try {
            es = step(es, scfg, eps);
            ps = step_pme(ps, scfg.dt);
        } catch (const NumericError& err) {
            res.aborted = true;
            res.abort_reason = std::string(err.what()) + " (eps = " + std::to_string(eps) + ")";
            break;
        }
        if ((i + 1) % cfg.diag_every == 0 || i + 1 == steps) {
            if (!es.c_tilde.finite() || es.min_sound_speed() <= 0.0) {
                res.aborted = true;
                res.abort_reason = "run_epsilon: state invalid (eps = " + std::to_string(eps) + ")";
                break;
            }
            measure(false);
        }
    }
    res.row.x_total = x.total(eps);
    return res;
}

inline EpsilonRunResult run_epsilon(const SweepConfig& cfg, double eps) {
    return run_epsilon_from(cfg, eps, matched_initial_data(cfg, eps));
}

/// Full sweep: all epsilons, then the log-log fits of the three error
/// columns and the uniformity ratio of the functional.
inline RateReport run_sweep(const SweepConfig& cfg) {
    cfg.check();
    RateReport report;
    std::vector<double> eps_list, sup_gap, int_gap, darcy;
    for (double eps : cfg.epsilons) {
        EpsilonRunResult r = run_epsilon(cfg, eps);
        if (r.aborted) throw NumericError("run_sweep: " + r.abort_reason);
        report.rows.push_back(r.row);
        eps_list.push_back(eps);
        sup_gap.push_back(r.row.sup_density_gap);
        int_gap.push_back(r.row.int_density_gap);
        darcy.push_back(r.row.int_darcy_residual);
    }
    if (eps_list.size() >= 3) {
        report.sup_gap_fit = fit_loglog(eps_list, sup_gap);
        report.int_gap_fit = fit_loglog(eps_list, int_gap);
        report.darcy_fit = fit_loglog(eps_list, darcy);
        report.fitted = true;
    }
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& row : report.rows) {
        const double ratio = row.x_total / row.data_norm;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
    }
    report.uniform_ratio = report.rows.empty() ? 0.0 : rmax / rmin;
    return report;
}

struct UniformBoundRow {
    double eps = 0.0;
    double x_total = 0.0;
    double data_norm = 0.0;
    double ratio = 0.0;
};

struct UniformBoundReport {
    std::vector<UniformBoundRow> rows;
    double max_over_min = 0.0;
    bool pass = false;  ///< max/min ratio <= 10
};

/// Unrescaled runs of the damped system across the epsilon list; checks that
/// the solution functional is controlled by the data norm uniformly in
/// epsilon (ratio spread at most 10).
inline UniformBoundReport uniform_bound_check(const SweepConfig& cfg) {
    cfg.check();
    UniformBoundReport report;
    for (double eps : cfg.epsilons) {
        const MatchedData data = matched_initial_data(cfg, eps);
        const int J = threshold(eps, cfg.k_p);
        SolverConfig scfg;
        scfg.grid = cfg.grid;
        scfg.dt = cfg.dt > 0.0 ? cfg.dt : detail::stable_dt(cfg, eps, false);
        scfg.T = cfg.T;
        scfg.rescaled = false;
        scfg.besov_p = cfg.p;
        scfg.split_J = J;
        scfg.diag_every = cfg.diag_every;

        // unrescaled velocity: v = eps * vtilde keeps the preparation meaning
        std::vector<SpectralField> v0;
        for (const auto& vi : data.v) v0.push_back(eps * vi);
        EulerState s0{data.c_tilde, v0, 0.0, cfg.params};

        const auto traj = simulate(s0, scfg, eps);
        if (traj.aborted)
            throw NumericError("uniform_bound_check: " + traj.abort_reason +
                               " (eps = " + std::to_string(eps) + ")");
        const auto series = x_functional(traj.records, eps);

        UniformBoundRow row;
        row.eps = eps;
        row.x_total = series.back().second;
        row.data_norm = detail::state_hybrid_data_norm(s0.c_tilde, s0.v, cfg.p, J, eps);
        row.ratio = row.x_total / row.data_norm;
        report.rows.push_back(row);
    }
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& row : report.rows) {
        rmin = std::min(rmin, row.ratio);
        rmax = std::max(rmax, row.ratio);
    }
    report.max_over_min = report.rows.empty() ? 0.0 : rmax / rmin;
    report.pass = report.max_over_min <= 10.0;
    return report;
}

} // namespace hyprelax

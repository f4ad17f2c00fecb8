#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/grid.hpp"
#include "hyprelax/lp.hpp"
#include "hyprelax/rng.hpp"
#include "hyprelax/symbol.hpp"
#include "hyprelax/system.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyprelax {

/// Sound-speed formulation state: c_tilde is the deviation of the sound
/// speed from its reference value, v the velocity components. Positivity of
/// c_tilde + c_bar (equivalently of the density) is an invariant monitored
/// by the solver.
struct EulerState {
    SpectralField c_tilde;
    std::vector<SpectralField> v;
    double t = 0.0;
    EulerParams params;

    const TorusGrid& grid() const { return c_tilde.grid(); }
    int d() const { return static_cast<int>(v.size()); }

    double min_sound_speed() const {
        double m = std::numeric_limits<double>::infinity();
        for (double x : c_tilde.values()) m = std::min(m, x + params.c_bar());
        return m;
    }
};

enum class Scheme { IfRk4, LinearExact };

struct SolverConfig {
    TorusGrid grid;
    double dt = 1e-3;
    double T = 1.0;
    bool dealias = true;
    Scheme scheme = Scheme::IfRk4;
    bool rescaled = false;   ///< solve the diffusively rescaled form
    int diag_every = 1;      ///< steps between diagnostic records
    double besov_p = 2.0;    ///< integrability index of the diagnostics
    int split_J = 0;         ///< low/high threshold used in the diagnostics
    double cfl_safety = 0.5;
};

/// One diagnostics row. The Besov columns are exactly the ingredients of the
/// solution functional assembled by the experiment layer; every norm of a
/// multi-component quantity is the sum of the component norms.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;    ///< integral of the density
    double energy = 0.0;  ///< 0.5 * integral of c_tilde^2 + |v|^2
    double low_state_dp = 0.0;    ///< |(c,v)|^{l,J} in B^{d/p}_{p,1}
    double high_state_d21 = 0.0;  ///< |(c,v)|^{h,J} in B^{d/2+1}_{2,1}
    double low_c_dp2 = 0.0;       ///< |c|^{l,J} in B^{d/p+2}_{p,1}
    double low_v_dp1 = 0.0;       ///< |v|^{l,J} in B^{d/p+1}_{p,1}
    double damped_mode_dp = 0.0;  ///< |W'| in B^{d/p}_{p,1}
    double v_dp = 0.0;            ///< |v| in B^{d/p}_{p,1}

    bool finite() const {
        for (double x : {mass, energy, low_state_dp, high_state_d21, low_c_dp2, low_v_dp1,
                         damped_mode_dp, v_dp})
            if (!std::isfinite(x)) return false;
        return true;
    }
};

struct Trajectory {
    std::vector<DiagnosticsRecord> records;
    EulerState final_state;
    bool aborted = false;
    std::string abort_reason;
};

namespace detail {

inline SpectralField maybe_dealias(const SpectralField& f, bool on) {
    return on ? f.dealias() : f;
}

} // namespace detail

/// Time derivative of the state. Unrescaled:
///   dc = -(v . grad c) - gc (c + c_bar) div v
///   dv = -(v . grad) v - gc (c + c_bar) grad c - v / eps
/// Rescaled form: the same transport in c, and
///   dv = -(v . grad) v - (gc (c + c_bar) grad c + v) / eps^2.
/// Products are formed in physical space and dealiased; derivatives are
/// spectral. `include_damping = false` leaves out the -v/eps (resp. -v/eps^2)
/// term, which the integrating-factor stepper applies exactly.
inline std::pair<SpectralField, std::vector<SpectralField>> rhs(const EulerState& s, double eps,
                                                                bool rescaled,
                                                                bool include_damping = true,
                                                                bool dealias = true) {
    const double gc = s.params.gamma_check();
    const double cb = s.params.c_bar();
    const int d = s.d();
    const double stiff = rescaled ? eps * eps : eps;

    const SpectralField cfull = s.c_tilde.map([cb](double x) { return x + cb; });
    std::vector<SpectralField> grad_c;
    grad_c.reserve(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) grad_c.push_back(s.c_tilde.derivative(k));

    // dc = -(sum_k v_k dc/dx_k) - gc (c + cb) sum_k dv_k/dx_k
    SpectralField dc = SpectralField::zero(s.grid());
    for (int k = 0; k < d; ++k) {
        dc -= pointwise(s.v[static_cast<std::size_t>(k)], grad_c[static_cast<std::size_t>(k)]);
        dc -= gc * pointwise(cfull, s.v[static_cast<std::size_t>(k)].derivative(k));
    }
    dc = detail::maybe_dealias(dc, dealias);

    std::vector<SpectralField> dv;
    dv.reserve(static_cast<std::size_t>(d));
    for (int m = 0; m < d; ++m) {
        SpectralField acc = SpectralField::zero(s.grid());
        for (int k = 0; k < d; ++k)
            acc -= pointwise(s.v[static_cast<std::size_t>(k)],
                             s.v[static_cast<std::size_t>(m)].derivative(k));
        const SpectralField pressure = pointwise(cfull, grad_c[static_cast<std::size_t>(m)]);
        if (rescaled) {
            acc -= (gc / stiff) * pressure;
            if (include_damping) acc -= (1.0 / stiff) * s.v[static_cast<std::size_t>(m)];
        } else {
            acc -= gc * pressure;
            if (include_damping) acc -= (1.0 / stiff) * s.v[static_cast<std::size_t>(m)];
        }
        dv.push_back(detail::maybe_dealias(acc, dealias));
        if (!dv.back().finite()) {
            std::ostringstream oss;
            oss << "rhs: non-finite values at t = " << s.t;
            throw NumericError(oss.str());
        }
    }
    return {std::move(dc), std::move(dv)};
}

/// Damped combination v/eps + gc (c + c_bar) grad c (per component).
/// For rescaled states the scaling convention makes it v + gc (c+cb) grad c.
inline std::vector<SpectralField> damped_mode(const EulerState& s, double eps,
                                              bool rescaled = false) {
    const double gc = s.params.gamma_check();
    const double cb = s.params.c_bar();
    const SpectralField cfull = s.c_tilde.map([cb](double x) { return x + cb; });
    std::vector<SpectralField> w;
    w.reserve(static_cast<std::size_t>(s.d()));
    for (int m = 0; m < s.d(); ++m) {
        SpectralField p = pointwise(cfull, s.c_tilde.derivative(m)).dealias();
        const double vw = rescaled ? 1.0 : 1.0 / eps;
        w.push_back(gc * p + vw * s.v[static_cast<std::size_t>(m)]);
    }
    return w;
}

/// Largest advective time step the configuration allows.
inline double cfl_limit(const EulerState& s, const SolverConfig& cfg) {
    const double gc = s.params.gamma_check();
    const double cb = s.params.c_bar();
    double vmax = 0.0;
    for (const auto& vi : s.v) vmax += vi.max_abs();
    const double speed = gc * (s.c_tilde.max_abs() + cb) + vmax;
    return cfg.cfl_safety * s.grid().dx() / std::max(speed, 1e-300);
}

/// One Lawson / integrating-factor RK4 step: the damping factor on v is
/// applied exactly (e^{-dt/eps}, resp. e^{-dt/eps^2} for rescaled runs), the
/// remaining terms go through classical RK4 stages. Stiffness of the damping
/// therefore never restricts dt; the advective CFL guard still applies.
inline EulerState step(const EulerState& s, const SolverConfig& cfg, double eps) {
    if (cfg.dt > cfl_limit(s, cfg)) {
        std::ostringstream oss;
        oss << "step: CFL violation at t = " << s.t << "; dt = " << cfg.dt
            << " exceeds limit " << cfl_limit(s, cfg);
        throw NumericError(oss.str());
    }
    const double stiff = cfg.rescaled ? eps * eps : eps;
    const double E1 = std::exp(-cfg.dt / stiff);
    const double Eh = std::exp(-0.5 * cfg.dt / stiff);
    const int d = s.d();
    const double dt = cfg.dt;

    auto f = [&](const SpectralField& c, const std::vector<SpectralField>& v) {
        EulerState tmp{c, v, s.t, s.params};
        return rhs(tmp, eps, cfg.rescaled, /*include_damping=*/false, cfg.dealias);
    };

    auto vcomb = [d](const std::vector<SpectralField>& a, double fa,
                     const std::vector<SpectralField>& b, double fb) {
        std::vector<SpectralField> out;
        out.reserve(static_cast<std::size_t>(d));
        for (int m = 0; m < d; ++m)
            out.push_back(fa * a[static_cast<std::size_t>(m)] + fb * b[static_cast<std::size_t>(m)]);
        return out;
    };

    auto [k1c, k1v] = f(s.c_tilde, s.v);
    auto [k2c, k2v] = f(s.c_tilde + 0.5 * dt * k1c, vcomb(s.v, Eh, k1v, 0.5 * dt * Eh));
    auto [k3c, k3v] = f(s.c_tilde + 0.5 * dt * k2c, vcomb(s.v, Eh, k2v, 0.5 * dt));
    auto [k4c, k4v] = f(s.c_tilde + dt * k3c, vcomb(s.v, E1, k3v, dt * Eh));

    EulerState out;
    out.params = s.params;
    out.t = s.t + dt;
    out.c_tilde = s.c_tilde + (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    out.v.reserve(static_cast<std::size_t>(d));
    for (int m = 0; m < d; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        out.v.push_back(E1 * s.v[mi] +
                        (dt / 6.0) * (E1 * k1v[mi] + 2.0 * Eh * k2v[mi] + 2.0 * Eh * k3v[mi] +
                                      k4v[mi]));
    }
    if (cfg.dealias) {
        out.c_tilde = out.c_tilde.dealias();
        for (auto& vi : out.v) vi = vi.dealias();
    }
    return out;
}

/// Exact propagator of the linearized dynamics, one matrix exponential per
/// Fourier mode, cached for a fixed dt.
class LinearPropagator {
public:
    LinearPropagator(const EulerParams& params, const TorusGrid& grid, double dt, double eps,
                     bool rescaled) {
        const int d = grid.d;
        const int n = 1 + d;
        const double a = params.gamma_check() * params.c_bar();
        // v-rows of the symbol: (i a k c + v) / eps^2 when rescaled,
        // i a k c + v / eps otherwise
        const double row = rescaled ? 1.0 / (eps * eps) : 1.0;
        const double damp = rescaled ? 1.0 / (eps * eps) : 1.0 / eps;
        props_.resize(grid.size());
        for (std::size_t flat = 0; flat < grid.size(); ++flat) {
            CMat B = CMat::Zero(n, n);
            double k1 = 0.0, k2 = 0.0;
            if (d == 1) {
                k1 = grid.freq(static_cast<int>(flat));
            } else {
                k1 = grid.freq(static_cast<int>(flat / static_cast<std::size_t>(grid.N)));
                k2 = grid.freq(static_cast<int>(flat % static_cast<std::size_t>(grid.N)));
            }
            B(0, 1) = Complex(0.0, a * k1);
            B(1, 0) = Complex(0.0, a * k1 * row);
            B(1, 1) = Complex(damp, 0.0);
            if (d == 2) {
                B(0, 2) = Complex(0.0, a * k2);
                B(2, 0) = Complex(0.0, a * k2 * row);
                B(2, 2) = Complex(damp, 0.0);
            }
            props_[flat] = (-dt * B).exp();
        }
    }

    EulerState apply(const EulerState& s) const {
        const int d = s.d();
        const int n = 1 + d;
        std::vector<std::vector<Complex>> in;
        in.push_back(s.c_tilde.coeffs());
        for (const auto& vi : s.v) in.push_back(vi.coeffs());
        std::vector<std::vector<Complex>> out(static_cast<std::size_t>(n),
                                              std::vector<Complex>(s.grid().size()));
        CVec u(n);
        for (std::size_t flat = 0; flat < s.grid().size(); ++flat) {
            for (int c = 0; c < n; ++c) u(c) = in[static_cast<std::size_t>(c)][flat];
            const CVec w = props_[flat] * u;
            for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(c)][flat] = w(c);
        }
        EulerState res;
        res.params = s.params;
        res.c_tilde = SpectralField::from_coeffs(s.grid(), std::move(out[0]));
        for (int m = 0; m < d; ++m)
            res.v.push_back(
                SpectralField::from_coeffs(s.grid(), std::move(out[static_cast<std::size_t>(m + 1)])));
        return res;
    }

private:
    std::vector<CMat> props_;
};

/// One exact linearized step (semigroup property makes composition exact).
inline EulerState linear_exact_step(const EulerState& s, double dt, double eps,
                                    bool rescaled = false) {
    LinearPropagator prop(s.params, s.grid(), dt, eps, rescaled);
    EulerState out = prop.apply(s);
    out.t = s.t + dt;
    return out;
}

/// Fill one diagnostics row from the current state.
inline DiagnosticsRecord diagnose(const EulerState& s, const SolverConfig& cfg, double eps) {
    DiagnosticsRecord rec;
    rec.t = s.t;
    const double cb = s.params.c_bar();
    const SpectralField rho = s.c_tilde.map(
        [&](double x) { return rho_from_c(x + cb, s.params); });
    const double vol = std::pow(2.0 * M_PI * s.grid().L_len, s.grid().d);
    rec.mass = rho.mean() * vol;

    double e = 0.0;
    {
        const auto& cv = s.c_tilde.values();
        for (double x : cv) e += x * x;
        for (const auto& vi : s.v)
            for (double x : vi.values()) e += x * x;
        rec.energy = 0.5 * e * s.grid().cell_volume();
    }

    const double dd = s.grid().d;
    const double p = cfg.besov_p;
    const int J = cfg.split_J;
    const BesovIndex low_dp{.s = dd / p, .p = p, .r = 1.0};
    const BesovIndex high_d21{.s = dd / 2.0 + 1.0, .p = 2.0, .r = 1.0};
    const BesovIndex low_dp2{.s = dd / p + 2.0, .p = p, .r = 1.0};
    const BesovIndex low_dp1{.s = dd / p + 1.0, .p = p, .r = 1.0};
    const BesovIndex full_dp{.s = dd / p, .p = p, .r = 1.0};

    auto add_splits = [&](const SpectralField& f, double& low_acc, double& high_acc,
                          double& low2_acc, double* low1_acc, double* full_acc) {
        const BlockLpTable tp = block_lp_table(f, p);
        const BlockLpTable t2 = p == 2.0 ? tp : block_lp_table(f, 2.0);
        low_acc += besov_from_table(tp, low_dp.s, 1.0, std::numeric_limits<int>::min(), J + 1);
        high_acc += besov_from_table(t2, high_d21.s, 1.0, J);
        low2_acc += besov_from_table(tp, low_dp2.s, 1.0, std::numeric_limits<int>::min(), J + 1);
        if (low1_acc)
            *low1_acc += besov_from_table(tp, low_dp1.s, 1.0, std::numeric_limits<int>::min(), J + 1);
        if (full_acc) *full_acc += besov_from_table(tp, full_dp.s, 1.0);
    };

    double unused = 0.0;
    add_splits(s.c_tilde, rec.low_state_dp, rec.high_state_d21, rec.low_c_dp2, nullptr, nullptr);
    for (const auto& vi : s.v)
        add_splits(vi, rec.low_state_dp, rec.high_state_d21, unused, &rec.low_v_dp1, &rec.v_dp);

    for (const auto& wi : damped_mode(s, eps, cfg.rescaled))
        rec.damped_mode_dp += besov_norm(wi, full_dp);
    return rec;
}

/// March the configured scheme to the horizon, recording diagnostics at the
/// configured cadence. CFL or NaN aborts return the partial trajectory with
/// the abort flag set.
inline Trajectory simulate(const EulerState& initial, const SolverConfig& cfg, double eps) {
    if (initial.min_sound_speed() <= 0.0)
        throw std::invalid_argument("simulate: initial data violates positivity");

    Trajectory traj;
    EulerState s = initial;
    if (cfg.dealias) {
        s.c_tilde = s.c_tilde.dealias();
        for (auto& vi : s.v) vi = vi.dealias();
    }
    const long steps = std::lround(std::ceil(cfg.T / cfg.dt - 1e-12));
    std::optional<LinearPropagator> prop;
    if (cfg.scheme == Scheme::LinearExact)
        prop.emplace(s.params, s.grid(), cfg.dt, eps, cfg.rescaled);

    traj.records.push_back(diagnose(s, cfg, eps));
    for (long i = 0; i < steps; ++i) {
        try {
            if (prop) {
                const double t_next = s.t + cfg.dt;
                s = prop->apply(s);
                s.t = t_next;
            } else {
                s = step(s, cfg, eps);
            }
        } catch (const NumericError& err) {
            traj.aborted = true;
            traj.abort_reason = err.what();
            break;
        }
        const bool record = (i + 1) % cfg.diag_every == 0 || i + 1 == steps;
        if (record) {
            if (!s.c_tilde.finite()) {
                traj.aborted = true;
                traj.abort_reason = "simulate: non-finite state";
                break;
            }
            if (s.min_sound_speed() <= 0.0) {
                traj.aborted = true;
                traj.abort_reason = "simulate: positivity lost";
                break;
            }
            traj.records.push_back(diagnose(s, cfg, eps));
        }
    }
    traj.final_state = std::move(s);
    return traj;
}

enum class InitKind { Mode, RandomBand, CustomFile };

struct InitOptions {
    InitKind kind = InitKind::RandomBand;
    double amplitude = 1e-2;
    std::uint64_t seed = 1;
    int mode_k = 1;      ///< wavenumber for the single-mode kind
    int band_j_lo = 1;   ///< lowest dyadic block of the random band
    int band_j_hi = 3;   ///< highest dyadic block
    bool with_velocity = false;  ///< also draw random band-limited velocity
};

/// Mean-zero band-limited scalar with unit max amplitude, drawn from seed.
inline SpectralField random_band_scalar(const TorusGrid& grid, int j_lo, int j_hi, Rng& rng) {
    auto [g_lo, g_hi] = block_range(grid);
    if (j_lo < g_lo || j_hi > g_hi)
        throw ConfigError("init_data: requested band is not resolvable on this grid");
    std::vector<Complex> c(grid.size(), 0.0);
    const double f_lo = CutoffProfile::phi_support_lo * std::pow(2.0, j_lo);
    const double f_hi = CutoffProfile::phi_support_hi * std::pow(2.0, j_hi);
    auto draw = [&](std::size_t idx, std::size_t conj_idx) {
        const Complex a(rng.normal(), rng.normal());
        c[idx] = a;
        c[conj_idx] = std::conj(a);
    };
    if (grid.d == 1) {
        for (int i = 1; i < grid.N / 2; ++i) {
            const double f = std::abs(grid.freq(i));
            if (f > f_lo && f < f_hi)
                draw(static_cast<std::size_t>(i), static_cast<std::size_t>(grid.N - i));
        }
    } else {
        for (int i = 0; i < grid.N; ++i)
            for (int j = 0; j < grid.N; ++j) {
                const int si = grid.signed_index(i), sj = grid.signed_index(j);
                if (si < 0 || (si == 0 && sj <= 0)) continue;  // one of each conjugate pair
                if (std::abs(si) == grid.N / 2 || std::abs(sj) == grid.N / 2) continue;
                const double f = std::hypot(grid.freq(i), grid.freq(j));
                if (f <= f_lo || f >= f_hi) continue;
                const std::size_t idx = static_cast<std::size_t>(i) * grid.N + j;
                const int ci = (grid.N - i) % grid.N, cj = (grid.N - j) % grid.N;
                draw(idx, static_cast<std::size_t>(ci) * grid.N + cj);
            }
    }
    auto f = SpectralField::from_coeffs(grid, std::move(c));
    const double m = f.max_abs();
    if (m == 0.0) throw ConfigError("init_data: empty band");
    return (1.0 / m) * f;
}

/// Reproducible band-limited initial data; the hybrid data norm scales
/// linearly with the amplitude.
inline std::pair<SpectralField, std::vector<SpectralField>> init_data(const InitOptions& opt,
                                                                      const TorusGrid& grid) {
    if (!(opt.amplitude > 0.0)) throw ConfigError("init_data: amplitude must be positive");
    if (opt.kind == InitKind::Mode) {
        if (grid.d != 1) throw ConfigError("init_data: mode kind is 1-d");
        const double k = static_cast<double>(opt.mode_k);
        auto c0 = SpectralField::sample(grid, [&](double x) { return opt.amplitude * std::cos(k * x); });
        return {std::move(c0), {SpectralField::zero(grid)}};
    }
    if (opt.kind != InitKind::RandomBand)
        throw ConfigError("init_data: custom-file data is handled by the CLI layer");
    Rng rng(opt.seed);
    SpectralField c0 = opt.amplitude * random_band_scalar(grid, opt.band_j_lo, opt.band_j_hi, rng);
    std::vector<SpectralField> v0;
    for (int m = 0; m < grid.d; ++m) {
        if (opt.with_velocity)
            v0.push_back(opt.amplitude * random_band_scalar(grid, opt.band_j_lo, opt.band_j_hi, rng));
        else
            v0.push_back(SpectralField::zero(grid));
    }
    return {std::move(c0), std::move(v0)};
}

} // namespace hyprelax

#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/euler.hpp"
#include "hyprelax/grid.hpp"
#include "hyprelax/lp.hpp"
#include "hyprelax/system.hpp"

#include <cmath>
#include <vector>

namespace hyprelax {

/// Density state of the limit diffusion equation d/dt N = lap P(N).
struct PmeState {
    SpectralField density;
    double t = 0.0;
    EulerParams params;  ///< reuses gamma, A, rho_bar

    const TorusGrid& grid() const { return density.grid(); }

    double min_density() const {
        double m = std::numeric_limits<double>::infinity();
        for (double x : density.values()) m = std::min(m, x);
        return m;
    }
};

/// Secant slope of the pressure around the reference density with the
/// derivative removed: H1(rho) = (P(rho) - P(rhob)) / (rho - rhob) - P'(rhob),
/// switching to a second-order series near rhob to avoid cancellation.
inline double h1(double rho, const EulerParams& p) {
    if (!(rho > 0.0)) throw std::domain_error("h1: rho must be positive");
    const double rb = p.rho_bar;
    const double h = rho - rb;
    if (std::abs(h) > 1e-6 * rb) {
        return (p.pressure(rho) - p.pressure(rb)) / h - p.dpressure(rb);
    }
    const double g = p.gamma;
    const double p2 = p.A * g * (g - 1.0) * std::pow(rb, g - 2.0);
    const double p3 = p.A * g * (g - 1.0) * (g - 2.0) * std::pow(rb, g - 3.0);
    return 0.5 * p2 * h + (1.0 / 6.0) * p3 * h * h;
}

/// One step of the stiffly accurate split: the linearized heat part
/// P'(rhob) lap is integrated exactly per mode, the remainder
/// lap(H1(N)(N - rhob)) by Heun stages under the same integrating factor.
/// Both terms are exact Laplacians, so the zero mode (total mass) is
/// untouched to the last bit.
inline PmeState step_pme(const PmeState& s, double dt, bool dealias = true) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_pme: dt must be positive");
    if (s.min_density() <= 0.0)
        throw NumericError("step_pme: positivity violated");
    const double diffusivity = s.params.dpressure(s.params.rho_bar);

    auto heat = [&](const SpectralField& f, double tau) {
        return f.radial_multiplier(
            [&](double rho) { return std::exp(-diffusivity * rho * rho * tau); });
    };
    auto nonlinear = [&](const SpectralField& f) {
        const double rb = s.params.rho_bar;
        SpectralField w = f.map([&](double x) { return h1(x, s.params) * (x - rb); });
        if (dealias) w = w.dealias();
        return w.radial_multiplier([](double rho) { return -rho * rho; });  // laplacian
    };

    const SpectralField k1 = nonlinear(s.density);
    const SpectralField u1 = heat(s.density + dt * k1, dt);
    const SpectralField k2 = nonlinear(u1);

    PmeState out;
    out.params = s.params;
    out.t = s.t + dt;
    out.density = heat(s.density, dt) + 0.5 * dt * (heat(k1, dt) + k2);
    if (dealias) out.density = out.density.dealias();
    return out;
}

struct PmeDiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double l2_distance = 0.0;   ///< ||N - rhob||_{L^2}
    double besov_dp = 0.0;      ///< ||N - rhob|| in B^{d/p}_{p,1}
    double besov_dp2 = 0.0;     ///< ||N - rhob|| in B^{d/p+2}_{p,1}
};

struct PmeTrajectory {
    std::vector<PmeDiagnosticsRecord> records;
    PmeState final_state;
    bool aborted = false;
    std::string abort_reason;
};

inline PmeDiagnosticsRecord diagnose_pme(const PmeState& s, double p) {
    PmeDiagnosticsRecord rec;
    rec.t = s.t;
    const double vol = std::pow(2.0 * M_PI * s.grid().L_len, s.grid().d);
    rec.mass = s.density.mean() * vol;
    const double rb = s.params.rho_bar;
    const SpectralField dev = s.density.map([rb](double x) { return x - rb; });
    rec.l2_distance = dev.lp_norm(2.0);
    const double dd = s.grid().d;
    const BlockLpTable t = block_lp_table(dev, p);
    rec.besov_dp = besov_from_table(t, dd / p, 1.0);
    rec.besov_dp2 = besov_from_table(t, dd / p + 2.0, 1.0);
    return rec;
}

inline PmeTrajectory simulate_pme(const PmeState& initial, const SolverConfig& cfg) {
    if (initial.min_density() <= 0.0)
        throw std::invalid_argument("simulate_pme: initial density must be positive");
    PmeTrajectory traj;
    PmeState s = initial;
    if (cfg.dealias) s.density = s.density.dealias();
    const long steps = std::lround(std::ceil(cfg.T / cfg.dt - 1e-12));
    traj.records.push_back(diagnose_pme(s, cfg.besov_p));
    for (long i = 0; i < steps; ++i) {
        try {
            s = step_pme(s, cfg.dt, cfg.dealias);
        } catch (const NumericError& err) {
            traj.aborted = true;
            traj.abort_reason = err.what();
            break;
        }
        if ((i + 1) % cfg.diag_every == 0 || i + 1 == steps) {
            if (!s.density.finite()) {
                traj.aborted = true;
                traj.abort_reason = "simulate_pme: non-finite state";
                break;
            }
            traj.records.push_back(diagnose_pme(s, cfg.besov_p));
        }
    }
    traj.final_state = std::move(s);
    return traj;
}

/// Limit velocity -grad P(N) / N (spectral gradient, physical division).
inline std::vector<SpectralField> darcy_velocity(const PmeState& s) {
    if (s.min_density() <= 0.0) throw NumericError("darcy_velocity: positivity violated");
    const SpectralField P = s.density.map([&](double x) { return s.params.pressure(x); }).dealias();
    const SpectralField inv = s.density.map([](double x) { return 1.0 / x; });
    std::vector<SpectralField> v;
    for (int m = 0; m < s.grid().d; ++m)
        v.push_back((-1.0) * pointwise(P.derivative(m), inv).dealias());
    return v;
}

} // namespace hyprelax

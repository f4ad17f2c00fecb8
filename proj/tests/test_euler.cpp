#include "hyprelax/euler.hpp"
#include "hyprelax/symbol.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hyprelax;

namespace {

EulerParams params_a1() {
    // gamma_check * c_bar = 1
    return EulerParams{.gamma = 3.0, .A = 1.0 / 3.0, .rho_bar = 1.0, .epsilon = 1.0};
}

EulerState make_state(const TorusGrid& grid, const EulerParams& p,
                      const std::function<double(double)>& c0,
                      const std::function<double(double)>& v0) {
    EulerState s;
    s.params = p;
    s.c_tilde = SpectralField::sample(grid, c0);
    s.v = {SpectralField::sample(grid, v0)};
    return s;
}

double linf_distance(const SpectralField& a, const SpectralField& b) {
    return (a - b).max_abs();
}

double state_l2_distance(const EulerState& a, const EulerState& b) {
    double acc = std::pow((a.c_tilde - b.c_tilde).lp_norm(2.0), 2);
    for (std::size_t m = 0; m < a.v.size(); ++m)
        acc += std::pow((a.v[m] - b.v[m]).lp_norm(2.0), 2);
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("equilibrium is a fixed point", "[euler]") {
    TorusGrid grid(1, 32);
    auto s = make_state(grid, params_a1(), [](double) { return 0.0; }, [](double) { return 0.0; });
    SolverConfig cfg{.grid = grid, .dt = 1e-2, .T = 1.0};
    EulerState cur = s;
    for (int i = 0; i < 1000; ++i) cur = step(cur, cfg, 0.5);
    CHECK(cur.c_tilde.max_abs() == 0.0);
    CHECK(cur.v[0].max_abs() == 0.0);

    auto [dc, dv] = rhs(s, 0.5, false);
    CHECK(dc.max_abs() == 0.0);
    CHECK(dv[0].max_abs() == 0.0);
}

TEST_CASE("rhs linearization around equilibrium", "[euler]") {
    TorusGrid grid(1, 64);
    const auto p = params_a1();

    SECTION("leading order matches the acoustic coupling") {
        const double delta = 1e-7;
        auto s = make_state(grid, p, [&](double x) { return delta * std::cos(x); },
                            [](double) { return 0.0; });
        auto [dc, dv] = rhs(s, 1.0, false);
        CHECK(dc.max_abs() <= 10 * delta * delta);
        auto expected = SpectralField::sample(grid, [&](double x) { return delta * std::sin(x); });
        CHECK(linf_distance(dv[0], expected) <= 10 * delta * delta);
    }
    SECTION("quadratic remainder under amplitude refinement") {
        std::vector<double> errs;
        for (double delta : {1e-2, 1e-3, 1e-4, 1e-5}) {
            auto s = make_state(grid, p, [&](double x) { return delta * std::cos(x); },
                                [&](double x) { return delta * std::sin(2.0 * x); });
            auto [dc, dv] = rhs(s, 0.7, false);
            // exact linear action: dc = -a dv/dx, dv_lin = -a dc/dx - v/eps
            auto dc_lin = (-1.0) * s.v[0].derivative(0);
            auto dv_lin = (-1.0) * s.c_tilde.derivative(0) - (1.0 / 0.7) * s.v[0];
            errs.push_back(std::max(linf_distance(dc, dc_lin), linf_distance(dv[0], dv_lin)));
        }
        for (std::size_t i = 1; i < errs.size(); ++i) {
            const double order = std::log10(errs[i - 1] / errs[i]);
            CHECK(order == Catch::Approx(2.0).margin(0.2));
        }
    }
}

TEST_CASE("exact damping factor", "[euler]") {
    TorusGrid grid(1, 32);
    const double eps = 0.05, dt = 0.02;
    auto s = make_state(grid, params_a1(), [](double) { return 0.0; },
                        [](double) { return 0.7; });  // constant velocity, zero gradients
    SolverConfig cfg{.grid = grid, .dt = dt, .T = dt};
    auto out = step(s, cfg, eps);
    const double expected = 0.7 * std::exp(-dt / eps);
    for (double x : out.v[0].values()) CHECK(x == Catch::Approx(expected).margin(1e-12));
    CHECK(out.c_tilde.max_abs() <= 1e-15);

    SECTION("rescaled variant damps with the squared parameter") {
        cfg.rescaled = true;
        auto out2 = step(s, cfg, eps);
        const double expected2 = 0.7 * std::exp(-dt / (eps * eps));
        for (double x : out2.v[0].values()) CHECK(x == Catch::Approx(expected2).margin(1e-12));
    }
}

TEST_CASE("time stepper is fourth order", "[euler]") {
    TorusGrid grid(1, 32);
    const auto p = params_a1();
    auto s0 = make_state(grid, p, [](double x) { return 0.05 * std::cos(x); },
                         [](double x) { return 0.03 * std::sin(x); });
    const double eps = 0.4, T = 0.4;

    auto run = [&](double dt) {
        SolverConfig cfg{.grid = grid, .dt = dt, .T = T};
        EulerState s = s0;
        const long n = std::lround(T / dt);
        for (long i = 0; i < n; ++i) s = step(s, cfg, eps);
        return s;
    };

    const EulerState ref = run(T / 2048);
    std::vector<double> dts, errs;
    for (long n : {16, 32, 64}) {
        dts.push_back(T / n);
        errs.push_back(state_l2_distance(run(T / n), ref));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log(errs[i - 1] / errs[i]) / std::log(dts[i - 1] / dts[i]);
        CHECK(order == Catch::Approx(4.0).margin(0.3));
    }
}

TEST_CASE("linear exact stepper", "[euler]") {
    TorusGrid grid(1, 64);
    const auto p = params_a1();
    auto s0 = make_state(grid, p, [](double x) { return 0.3 * std::cos(5.0 * x); },
                         [](double) { return 0.0; });
    const double eps = 0.2;

    SECTION("single mode against the dense spectrum") {
        const double dt = 0.13;
        auto out = linear_exact_step(s0, dt, eps);
        // project mode 5 and compare with the exponential of the 2x2 symbol
        const auto sys = euler_system(p, 1);
        Vec xi(1);
        xi << 5.0;
        const CMat B = symbol_matrix(sys, xi, eps);
        const CMat E = (-dt * B).exp();
        const Complex c5 = s0.c_tilde.coeffs()[5];
        CHECK(std::abs(out.c_tilde.coeffs()[5] - E(0, 0) * c5) < 1e-10);
        CHECK(std::abs(out.v[0].coeffs()[5] - E(1, 0) * c5) < 1e-10);
    }
    SECTION("zero step is the identity") {
        auto out = linear_exact_step(s0, 0.0, eps);
        CHECK(linf_distance(out.c_tilde, s0.c_tilde) < 1e-13);
    }
    SECTION("semigroup composition") {
        const double dt = 0.4;
        auto one = linear_exact_step(s0, dt, eps);
        auto two = linear_exact_step(linear_exact_step(s0, dt / 2, eps), dt / 2, eps);
        CHECK(linf_distance(one.c_tilde, two.c_tilde) < 1e-12);
        CHECK(linf_distance(one.v[0], two.v[0]) < 1e-12);
    }
}

TEST_CASE("nonlinear solver tracks the linear propagator at tiny amplitude", "[euler]") {
    TorusGrid grid(1, 64);
    const auto p = params_a1();
    const double delta = 1e-6, eps = 0.3, T = 1.0, dt = 2e-3;
    auto s0 = make_state(grid, p, [&](double x) { return delta * std::cos(3.0 * x); },
                         [](double) { return 0.0; });
    SolverConfig cfg{.grid = grid, .dt = dt, .T = T};
    EulerState nl = s0, lin = s0;
    LinearPropagator prop(p, grid, dt, eps, false);
    const long n = std::lround(T / dt);
    for (long i = 0; i < n; ++i) {
        nl = step(nl, cfg, eps);
        lin = prop.apply(lin);
    }
    CHECK(state_l2_distance(nl, lin) <= 1e-6 * delta);
}

TEST_CASE("damped mode", "[euler]") {
    TorusGrid grid(1, 64);
    const auto p = params_a1();

    SECTION("zero at equilibrium") {
        auto s = make_state(grid, p, [](double) { return 0.0; }, [](double) { return 0.0; });
        CHECK(damped_mode(s, 0.3)[0].max_abs() == 0.0);
    }
    SECTION("vanishes on the balanced manifold") {
        const double eps = 0.2;
        auto s = make_state(grid, p, [](double x) { return 0.1 * std::cos(x); },
                            [](double) { return 0.0; });
        const double cb = p.c_bar();
        // v = -eps * gc * (c + cb) * dc/dx cancels the gradient term
        auto cfield = s.c_tilde.map([cb](double y) { return y + cb; });
        s.v[0] = (-eps * p.gamma_check()) * pointwise(cfield, s.c_tilde.derivative(0));
        CHECK(damped_mode(s, eps)[0].max_abs() <= 1e-12);
    }
}

TEST_CASE("discrete energy dissipation at linear level", "[euler]") {
    TorusGrid grid(1, 128);
    const auto p = params_a1();
    const double delta = 1e-6, eps = 0.25, dt = 1e-4;
    auto s = make_state(grid, p, [&](double x) { return delta * std::cos(2.0 * x); },
                        [&](double x) { return delta * 0.5 * std::sin(4.0 * x); });
    SolverConfig cfg{.grid = grid, .dt = dt, .T = dt, .diag_every = 1};
    for (int i = 0; i < 200; ++i) {
        const double e0 = diagnose(s, cfg, eps).energy;
        const double v2_0 = std::pow(s.v[0].lp_norm(2.0), 2);
        s = step(s, cfg, eps);
        const double e1 = diagnose(s, cfg, eps).energy;
        const double v2_1 = std::pow(s.v[0].lp_norm(2.0), 2);
        const double lhs = (e1 - e0) / dt;
        const double expected = -0.5 * (v2_0 + v2_1) / eps;  // trapezoid in time
        CHECK(std::abs(lhs - expected) <= 1e-6 * std::abs(expected));
    }
}

TEST_CASE("mass drift stays small and refines", "[euler]") {
    const auto p = params_a1();
    auto run = [&](int N, double dt) {
        TorusGrid grid(1, N);
        auto s = make_state(grid, p, [](double x) { return 1e-2 * std::cos(x); },
                            [](double) { return 0.0; });
        SolverConfig cfg{.grid = grid, .dt = dt, .T = 1.0, .diag_every = 1000000};
        const auto traj = simulate(s, cfg, 0.5);
        REQUIRE_FALSE(traj.aborted);
        const double m0 = traj.records.front().mass;
        const double m1 = traj.records.back().mass;
        return std::abs(m1 - m0) / std::abs(m0);
    };
    const double coarse = run(64, 2e-3);
    const double fine = run(128, 1e-3);
    CHECK(coarse <= 1e-6);
    CHECK(fine <= coarse);
}

TEST_CASE("simulate guards", "[euler]") {
    TorusGrid grid(1, 32);
    const auto p = params_a1();

    SECTION("positivity of the initial data") {
        auto s = make_state(grid, p, [&](double) { return -2.0 * p.c_bar(); },
                            [](double) { return 0.0; });
        SolverConfig cfg{.grid = grid, .dt = 1e-3, .T = 0.1};
        CHECK_THROWS_AS(simulate(s, cfg, 1.0), std::invalid_argument);
    }
    SECTION("CFL abort carries the partial trajectory") {
        auto s = make_state(grid, p, [](double x) { return 0.01 * std::cos(x); },
                            [](double) { return 0.0; });
        SolverConfig cfg{.grid = grid, .dt = 10.0, .T = 20.0};
        const auto traj = simulate(s, cfg, 1.0);
        CHECK(traj.aborted);
        CHECK_FALSE(traj.records.empty());
        CHECK(traj.abort_reason.find("CFL") != std::string::npos);
    }
}

TEST_CASE("reproducible band-limited data", "[euler]") {
    TorusGrid grid(1, 128);
    InitOptions opt{.kind = InitKind::RandomBand, .amplitude = 1e-2, .seed = 42,
                    .band_j_lo = 1, .band_j_hi = 3, .with_velocity = true};
    auto [c1, v1] = init_data(opt, grid);
    auto [c2, v2] = init_data(opt, grid);
    CHECK(linf_distance(c1, c2) == 0.0);
    CHECK(linf_distance(v1[0], v2[0]) == 0.0);
    CHECK(c1.max_abs() == Catch::Approx(1e-2));
    CHECK(std::abs(c1.mean()) < 1e-16);

    SECTION("hybrid norm scales linearly with amplitude") {
        auto opt2 = opt;
        opt2.amplitude = 2e-2;
        auto [c3, v3] = init_data(opt2, grid);
        const BesovIndex idx{.s = 1.0, .p = 2.0, .r = 1.0};
        CHECK(besov_norm(c3, idx) == Catch::Approx(2.0 * besov_norm(c1, idx)).epsilon(1e-12));
    }
    SECTION("mode kind") {
        InitOptions m{.kind = InitKind::Mode, .amplitude = 0.5, .mode_k = 3};
        auto [c, v] = init_data(m, grid);
        auto expected = SpectralField::sample(grid, [](double x) { return 0.5 * std::cos(3.0 * x); });
        CHECK(linf_distance(c, expected) < 1e-14);
        CHECK(v[0].max_abs() == 0.0);
    }
    SECTION("unresolvable band rejected") {
        auto bad = opt;
        bad.band_j_hi = 12;
        CHECK_THROWS_AS(init_data(bad, grid), ConfigError);
    }
}

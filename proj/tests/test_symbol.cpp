#include "hyprelax/sk.hpp"
#include "hyprelax/symbol.hpp"
#include "hyprelax/system.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hyprelax;

namespace {

PartiallyDissipativeSystem euler1d() {
    return euler_system(EulerParams{.gamma = 3.0, .A = 1.0 / 3.0, .rho_bar = 1.0, .epsilon = 1.0}, 1);
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return g;
}

/// Roots of lambda^2 - lambda/eps + a^2 xi^2 = 0, the two branches of the
/// 1-d acoustic pair.
std::pair<Complex, Complex> closed_form_pair(double a, double xi, double eps) {
    const Complex disc = std::sqrt(Complex(1.0 - 4.0 * eps * eps * a * a * xi * xi, 0.0));
    return {(1.0 - disc) / (2.0 * eps), (1.0 + disc) / (2.0 * eps)};
}

} // namespace

TEST_CASE("symbol assembly", "[symbol]") {
    const auto sys = euler1d();
    Vec xi(1);
    xi << 1.0;
    const CMat B = symbol_matrix(sys, xi, 1.0);
    CHECK(B(0, 0) == Complex(0.0, 0.0));
    CHECK(B(0, 1) == Complex(0.0, 1.0));
    CHECK(B(1, 0) == Complex(0.0, 1.0));
    CHECK(B(1, 1) == Complex(1.0, 0.0));

    Vec zero = Vec::Zero(1);
    CHECK(symbol_matrix(sys, zero, 0.5).isApprox((sys.L / 0.5).cast<Complex>()));

    CHECK(symbol_matrix(sys, (-xi).eval(), 2.0).isApprox(symbol_matrix(sys, xi, 2.0).conjugate()));
}

TEST_CASE("spectrum of the acoustic pair", "[symbol]") {
    const auto sys = euler1d();
    Vec xi(1);

    SECTION("complex pair at unit frequency") {
        xi << 1.0;
        const auto lam = eigen_decay(symbol_matrix(sys, xi, 1.0));
        REQUIRE(lam.size() == 2);
        const double half_sqrt3 = 0.5 * std::sqrt(3.0);
        CHECK(lam[0].real() == Catch::Approx(0.5));
        CHECK(lam[1].real() == Catch::Approx(0.5));
        CHECK(std::abs(lam[0].imag()) == Catch::Approx(half_sqrt3));
        CHECK(lam[0].imag() == Catch::Approx(-lam[1].imag()));
    }
    SECTION("triangular limit at zero frequency") {
        xi << 0.0;
        const auto lam = eigen_decay(symbol_matrix(sys, xi, 1.0));
        CHECK(lam[0].real() == Catch::Approx(0.0).margin(1e-12));
        CHECK(lam[1].real() == Catch::Approx(1.0));
    }
    SECTION("double eigenvalue at the discriminant root") {
        const double eps = 0.4;
        xi << 1.0 / (2.0 * eps);
        const auto lam = eigen_decay(symbol_matrix(sys, xi, eps));
        CHECK(lam[0].real() == Catch::Approx(1.0 / (2.0 * eps)).epsilon(1e-6));
        CHECK(lam[1].real() == Catch::Approx(1.0 / (2.0 * eps)).epsilon(1e-6));
    }
    SECTION("closed form across a sweep") {
        // compare as sets: equal real parts make the sorted order sensitive
        // to roundoff inside the complex regime
        const double eps = 0.3;
        for (double x : linspace(0.0, 6.0, 61)) {
            xi << x;
            const auto lam = eigen_decay(symbol_matrix(sys, xi, eps));
            const auto [slow, fast] = closed_form_pair(1.0, x, eps);
            const double tol = 1e-10 * (1.0 + std::abs(fast));
            const double d1 = std::min(std::abs(lam[0] - slow), std::abs(lam[0] - fast));
            const double d2 = std::min(std::abs(lam[1] - slow), std::abs(lam[1] - fast));
            const double cross = std::max(std::min(std::abs(lam[0] - slow), std::abs(lam[1] - slow)),
                                          std::min(std::abs(lam[0] - fast), std::abs(lam[1] - fast)));
            CHECK(d1 < tol);
            CHECK(d2 < tol);
            CHECK(cross < tol);
        }
    }
}

TEST_CASE("dispersion sweep classification", "[symbol]") {
    const auto sys = euler1d();

    SECTION("transition bracket around 1/(2 eps)") {
        const double eps = 0.25;
        const auto grid = linspace(0.0, 4.0, 161);  // spacing 0.025
        const auto curve = sweep(sys, eps, grid);
        REQUIRE(curve.transition_bracket.has_value());
        auto [lo, hi] = *curve.transition_bracket;
        CHECK(lo <= 2.0 + 1e-12);
        CHECK(hi >= 2.0 - 0.025 - 1e-12);
        CHECK(hi - lo == Catch::Approx(0.025));
    }
    SECTION("common real part beyond the transition") {
        const double eps = 0.25;
        const auto curve = sweep(sys, eps, linspace(2.5, 8.0, 23));
        for (const auto& e : curve.entries) {
            REQUIRE(e.regime == SpectrumRegime::ComplexPairPresent);
            CHECK(std::abs(e.eigenvalues[0].real() - 1.0 / (2.0 * eps)) < 1e-8);
            CHECK(std::abs(e.eigenvalues[1].real() - 1.0 / (2.0 * eps)) < 1e-8);
        }
    }
    SECTION("zero-only grid stays all-real") {
        const auto curve = sweep(sys, 1.0, {0.0});
        CHECK(curve.entries[0].regime == SpectrumRegime::AllReal);
        CHECK_FALSE(curve.transition_bracket.has_value());
    }
    SECTION("empty grid rejected") {
        CHECK_THROWS_AS(sweep(sys, 1.0, {}), std::invalid_argument);
    }
}

TEST_CASE("spectral invariants across a sweep", "[symbol]") {
    const auto sys = euler1d();
    const double eps = 0.1;
    const auto grid = linspace(0.0, 20.0, 101);
    const auto curve = sweep(sys, eps, grid);

    for (const auto& e : curve.entries) {
        Complex trace_sum = 0.0;
        for (Complex lam : e.eigenvalues) {
            CHECK(lam.real() >= -1e-10);  // dissipativity
            trace_sum += lam;
        }
        const double expected_trace = sys.L.trace() / eps;
        CHECK(std::abs(trace_sum - expected_trace) <= 1e-10 * std::abs(expected_trace));
        if (e.xi_norm > 0.0) {
            const double min_re =
                std::min(e.eigenvalues[0].real(), e.eigenvalues[1].real());
            CHECK(min_re > 0.0);
        }
    }

    SECTION("conjugate symmetry in the sign of xi") {
        Vec xi(1);
        for (double x : {0.5, 3.0, 11.0}) {
            xi << x;
            const auto lp = eigen_decay(symbol_matrix(sys, xi, eps));
            xi << -x;
            const auto lm = eigen_decay(symbol_matrix(sys, xi, eps));
            REQUIRE(lp.size() == lm.size());
            for (std::size_t i = 0; i < lp.size(); ++i) {
                CHECK(lp[i].real() == Catch::Approx(lm[i].real()).margin(1e-12));
                CHECK(std::abs(lp[i].imag()) == Catch::Approx(std::abs(lm[i].imag())).margin(1e-12));
            }
        }
    }
}

TEST_CASE("asymptotic branch ratios", "[symbol]") {
    const auto sys = euler1d();

    SECTION("slow branch against the diffusion coefficient") {
        const double eps = 0.1;
        const auto curve = sweep(sys, eps, linspace(0.0, 1.0, 101));
        const auto rep = asymptotic_check(curve, eps, 1.0);
        CHECK(rep.points_used > 5);
        CHECK(rep.worst_slow_ratio == Catch::Approx(1.0).margin(0.05));
        CHECK(rep.worst_fast_ratio == Catch::Approx(1.0).margin(0.05));
    }
    SECTION("single checked point") {
        const double eps = 0.1;
        const auto curve = sweep(sys, eps, {0.1});
        const auto rep = asymptotic_check(curve, eps, 1.0);
        // slow root of the quadratic at eps*xi = 0.01
        CHECK(rep.worst_slow_ratio == Catch::Approx(1.0001).epsilon(1e-4));
    }
    SECTION("no usable points") {
        const double eps = 0.5;
        const auto curve = sweep(sys, eps, {5.0, 10.0});
        CHECK_THROWS_AS(asymptotic_check(curve, eps, 1.0), std::invalid_argument);
    }
}

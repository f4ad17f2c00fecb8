#include "hyprelax/rng.hpp"
#include "hyprelax/sk.hpp"
#include "hyprelax/symbol.hpp"
#include "hyprelax/system.hpp"
#include "support/oracles.hpp"
#include "support/random_systems.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hyprelax;
using namespace hyprelax::testsupport;

namespace {

PartiallyDissipativeSystem euler1d(double gamma = 3.0, double A = 1.0 / 3.0) {
    return euler_system(EulerParams{.gamma = gamma, .A = A, .rho_bar = 1.0, .epsilon = 1.0}, 1);
}

} // namespace

TEST_CASE("directional symbol", "[sk]") {
    const auto sys = euler1d();
    Vec plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    Mat expected(2, 2);
    expected << 0.0, 1.0, 1.0, 0.0;
    CHECK(m_omega(sys, plus).isApprox(expected));
    CHECK(m_omega(sys, minus).isApprox((-expected).eval()));

    const auto sys2 = euler_system(EulerParams{}, 2);
    Vec e1(2);
    e1 << 1.0, 0.0;
    CHECK(m_omega(sys2, e1).isApprox(sys2.A_bar[0]));

    Vec bad(1);
    bad << 0.5;
    CHECK_THROWS_AS(m_omega(sys, bad), std::invalid_argument);
}

TEST_CASE("kalman rank of small pairs", "[sk]") {
    Mat L = Mat::Zero(2, 2);
    L(1, 1) = 1.0;

    SECTION("coupled pair has full rank") {
        Mat M(2, 2);
        M << 0.0, 0.7, 0.7, 0.0;
        CHECK(kalman_rank(M, L) == 2);
    }
    SECTION("zero symbol repeats L") {
        CHECK(kalman_rank(Mat::Zero(2, 2), L) == 1);
    }
    SECTION("invertible L wins immediately") {
        Rng rng(3);
        for (int t = 0; t < 20; ++t) {
            Mat M(3, 3);
            for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = rng.normal();
            CHECK(kalman_rank(M, Mat::Identity(3, 3)) == 3);
        }
    }
    SECTION("rank is invariant under joint orthogonal conjugation") {
        Rng rng(17);
        for (int t = 0; t < 30; ++t) {
            Mat M(3, 3), L3 = Mat::Zero(3, 3);
            for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = rng.normal();
            M = ((M + M.transpose()) / 2).eval();
            L3(2, 2) = rng.uniform(0.5, 2.0);
            Mat G(3, 3);
            for (int i = 0; i < 9; ++i) G(i / 3, i % 3) = rng.normal();
            const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
            CHECK(kalman_rank((Q.transpose() * M * Q).eval(), (Q.transpose() * L3 * Q).eval()) ==
                  kalman_rank(M, L3));
        }
    }
}

TEST_CASE("stability condition on the euler system", "[sk]") {
    const auto sys = euler1d();
    const auto rep = sk_condition(sys, omega_samples(1));
    CHECK(rep.sk_holds);
    CHECK(rep.kalman_ranks == std::vector<int>{2, 2});
    CHECK(rep.n_vbar == Catch::Approx(1.0));
    CHECK(rep.elliptic);
    CHECK(rep.ellipticity_constant == Catch::Approx(1.0));
}

TEST_CASE("stability fails without coupling", "[sk]") {
    auto sys = euler1d();
    sys.A_bar[0].setZero();
    const auto rep = sk_condition(sys, omega_samples(1));
    CHECK_FALSE(rep.sk_holds);
    CHECK(rep.n_vbar <= kSkTolerance);
}

TEST_CASE("gram minimum", "[sk]") {
    SECTION("unit weights on the euler system") {
        CHECK(n_vbar(euler1d(), HypocoercivityParams::ones(2), omega_samples(1)) ==
              Catch::Approx(1.0));
    }
    SECTION("half coupling gives a quarter") {
        // gamma_check * c_bar = 1/2 here
        const auto sys = euler_system(
            EulerParams{.gamma = 2.0, .A = 0.125, .rho_bar = 1.0, .epsilon = 1.0}, 1);
        REQUIRE(sys.A_bar[0](0, 1) == Catch::Approx(0.5));
        CHECK(n_vbar(sys, HypocoercivityParams::ones(2), omega_samples(1)) ==
              Catch::Approx(0.25));
    }
    SECTION("no damping, no gram") {
        auto sys = euler1d();
        sys.L.setZero();
        CHECK(n_vbar(sys, HypocoercivityParams::ones(2), omega_samples(1)) == 0.0);
    }
    SECTION("weights scale linearly") {
        Rng rng(5);
        const auto omegas = omega_samples(1);
        for (int t = 0; t < 20; ++t) {
            auto sys = random_structured_system(rng);
            if (sys.d != 1) continue;
            auto params = HypocoercivityParams::ones(sys.n());
            const double alpha = rng.uniform(0.1, 5.0);
            auto scaled = params;
            for (double& e : scaled.eps) e *= alpha;
            CHECK(n_vbar(sys, scaled, omegas) ==
                  Catch::Approx(alpha * n_vbar(sys, params, omegas)).margin(1e-12));
        }
    }
}

TEST_CASE("ellipticity diagnostics", "[sk]") {
    SECTION("euler symbol constant is the squared coupling") {
        const auto sys = euler1d();  // coupling 1
        auto [ok, c] = ellipticity_check(sys);
        CHECK(ok);
        CHECK(c == Catch::Approx(1.0));
    }
    SECTION("zero off-diagonal blocks are not elliptic") {
        auto sys = euler1d();
        sys.A_bar[0].setZero();
        auto [ok, c] = ellipticity_check(sys);
        CHECK_FALSE(ok);
        CHECK(c == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("nonzero leading block is refused") {
        auto sys = euler1d();
        sys.A_bar[0](0, 0) = 1.0;
        CHECK_THROWS_AS(ellipticity_check(sys), std::invalid_argument);
    }
}

TEST_CASE("stability agrees with the eigenpair oracle", "[sk]") {
    Rng rng(91);
    int holds = 0, fails = 0;
    for (int t = 0; t < 100; ++t) {
        const auto sys = random_structured_system(rng);
        const auto omegas = omega_samples(sys.d);
        const bool fast = sk_condition(sys, omegas).sk_holds;
        const bool slow = sk_eigenpair_oracle(sys, omegas);
        REQUIRE(fast == slow);
        (fast ? holds : fails) += 1;
    }
    CHECK(holds > 10);
    CHECK(fails > 10);
}

TEST_CASE("stability agrees with ellipticity", "[sk]") {
    Rng rng(92);
    for (int t = 0; t < 100; ++t) {
        const auto sys = random_structured_system(rng);
        const auto omegas = omega_samples(sys.d);
        const auto rep = sk_condition(sys, omegas);
        const auto [elliptic, c] = ellipticity_check(sys, static_cast<int>(omegas.size()));
        REQUIRE(rep.sk_holds == elliptic);
        REQUIRE(rep.sk_holds == (rep.n_vbar > kSkTolerance));
    }
}

TEST_CASE("corrected functional at one frequency", "[sk]") {
    const auto sys = euler1d();
    Vec omega(1);
    omega << 1.0;
    HypocoercivityParams params{{1.0, 1.0}};

    SECTION("real states have no cross term") {
        CVec z(2);
        z << Complex(0.3, 0.0), Complex(-1.7, 0.0);
        auto [Lv, Iv] = lyapunov_value(sys, params, 2.0, omega, z);
        CHECK(Iv == Catch::Approx(0.0).margin(1e-15));
        CHECK(Lv == Catch::Approx(z.squaredNorm()));
    }
    SECTION("hand-evaluated complex state") {
        // LZ = (0, i)/sqrt(2), LMZ = (0, 1)/sqrt(2); the cross term is
        // Im((i/sqrt 2) conj(1/sqrt 2)) = 1/2 under the decaying convention.
        CVec z(2);
        z << Complex(1.0, 0.0) / std::sqrt(2.0), Complex(0.0, 1.0) / std::sqrt(2.0);
        auto [Lv, Iv] = lyapunov_value(sys, params, 1.0, omega, z);
        CHECK(Iv == Catch::Approx(0.5));
        CHECK(Lv == Catch::Approx(1.5));
    }
    SECTION("zero weights reduce to the plain norm") {
        HypocoercivityParams zero{{0.0, 0.0}};
        CVec z(2);
        z << Complex(0.2, 0.4), Complex(-0.3, 0.9);
        auto [Lv, Iv] = lyapunov_value(sys, zero, 1.7, omega, z);
        CHECK(Iv == 0.0);
        CHECK(Lv == z.squaredNorm());
    }
    SECTION("rho must be positive") {
        CVec z = CVec::Ones(2);
        CHECK_THROWS_AS(lyapunov_value(sys, params, 0.0, omega, z), std::invalid_argument);
    }
}

TEST_CASE("certificate search on the euler system", "[sk]") {
    const auto sys = euler1d();
    const auto cert = lyapunov_search(sys, default_rho_grid(), omega_samples(1));
    CHECK(cert.kappa > 0.0);
    CHECK(cert.eta > 0.0);
    REQUIRE(cert.params.eps.size() == 2);
    CHECK(cert.params.eps[0] == 1.0);
    CHECK(cert.params.eps[1] == cert.eta);

    SECTION("certified decay along the exact propagator") {
        Rng rng(7);
        Vec omega(1);
        omega << 1.0;
        for (double rho : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
            const CMat B = symbol_matrix(sys, (rho * omega).eval(), 1.0);
            for (int trial = 0; trial < 5; ++trial) {
                CVec z0(2);
                z0 << Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal());
                z0.normalize();
                const double weight = std::min(1.0, rho * rho);
                double prev = lyapunov_value(sys, cert.params, rho, omega, z0).first;
                const double L0 = prev;
                const double horizon = 10.0 / cert.kappa;
                for (int i = 1; i <= 100; ++i) {
                    const double t = horizon * i / 100.0;
                    const CVec z = decay_propagator(B, t) * z0;
                    const double Lt = lyapunov_value(sys, cert.params, rho, omega, z).first;
                    REQUIRE(Lt <= prev + 1e-8);
                    REQUIRE(Lt <= L0 * std::exp(-cert.kappa * weight * t) + 1e-8);
                    prev = Lt;
                }
            }
        }
    }
}

TEST_CASE("certificate search refuses unstable systems", "[sk]") {
    auto sys = euler1d();
    sys.A_bar[0].setZero();
    CHECK_THROWS_AS(lyapunov_search(sys, default_rho_grid(8), omega_samples(1)),
                    std::invalid_argument);
}

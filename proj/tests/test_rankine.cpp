#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qbohm/bessel.hpp"
#include "qbohm/rankine.hpp"

using namespace qbohm;
namespace num = std::numbers;

namespace {

rankine::RankineParams params(int N, double eps) {
    rankine::RankineParams p;
    p.N = N;
    p.eps = eps;
    p.xi0 = 1.0;
    p.mass = 1.0;
    return p;
}

// independent origin-series oracle: G = 1 + a tau^2 + b tau^4
double series_oracle(int N, double eps, double tau) {
    const double n2 = static_cast<double>(N) * N;
    const double a = (2.0 * n2 - eps) / 4.0;
    const double b = (std::pow(eps - 2.0 * n2, 2) / 4.0 - n2) / 16.0;
    return 1.0 + a * tau * tau + b * tau * tau * tau * tau;
}

} // namespace

TEST_CASE("parameter derivations") {
    const auto p = params(1, 3.0);
    CHECK(p.B0() == -2.0);                 // N' = N fixes B0 = -2N/(e xi0^2)
    CHECK(p.omega() == 1.0);               // N/(m xi0^2)
    CHECK(p.energy() == 1.5);              // eps/(2 m xi0^2)
    CHECK_THROWS(params(1, -0.5).validate());
    CHECK_THROWS(params(1, 0.0).validate());
}

TEST_CASE("radial solve reproduces the origin expansion") {
    SECTION("eps = 3: negative curvature, G(0.1) = 0.99750") {
        const auto sol = rankine::solve_radial(params(1, 3.0), 8.0, 1e-3);
        const std::size_t i = 100;  // tau = 0.1
        CHECK(sol.tau[i] == Catch::Approx(0.1));
        CHECK(std::abs(sol.G[i] - 0.99750) < 5e-5);
        CHECK(std::abs(sol.G[i] - series_oracle(1, 3.0, 0.1)) < 1e-7);
        CHECK(sol.curvature_origin() < 0.0);
    }
    SECTION("eps = 1: positive curvature (tunneling into the barrier), G(0.1) = 1.00250") {
        const auto sol = rankine::solve_radial(params(1, 1.0), 8.0, 1e-3);
        const std::size_t i = 100;
        CHECK(std::abs(sol.G[i] - 1.00250) < 5e-5);
        CHECK(std::abs(sol.G[i] - series_oracle(1, 1.0, 0.1)) < 1e-7);
        CHECK(sol.curvature_origin() > 0.0);
    }
    SECTION("curvature sign flips exactly at eps = 2 N^2") {
        CHECK(rankine::solve_radial(params(1, 2.0 - 1e-9), 8.0, 1e-3).curvature_origin() > 0.0);
        CHECK(rankine::solve_radial(params(1, 2.0 + 1e-9), 8.0, 1e-3).curvature_origin() < 0.0);
        CHECK(rankine::solve_radial(params(1, 2.0), 8.0, 1e-3).curvature_origin() == 0.0);
    }
}

TEST_CASE("outer domain matches the Bessel family") {
    for (double eps : {3.0, 1.0}) {
        auto sol = rankine::solve_radial(params(1, eps), 8.0, 1e-3);
        const auto fit = rankine::match_bessel(sol);
        CAPTURE(eps);
        CHECK(fit.residual < 1e-6);
    }
}

TEST_CASE("synthetic pure J_1 input fits with C2 = 0") {
    auto sol = rankine::solve_radial(params(1, 3.0), 8.0, 1e-3);
    // overwrite the profile with exact J_1(sqrt(eps) tau)
    for (std::size_t i = 0; i < sol.tau.size(); ++i)
        sol.G[i] = bessel::jn(1, std::sqrt(3.0) * sol.tau[i]);
    const auto fit = rankine::match_bessel(sol);
    CHECK(std::abs(fit.C1 - 1.0) < 1e-8);
    CHECK(std::abs(fit.C2) < 1e-8);
}

TEST_CASE("coreless limit: the profile is the plain Bessel vortex") {
    // with B0 = 0 the physical solution is J_N, which vanishes on the axis
    const auto g = rankine::ideal_bessel_profile(1, 3.0, {0.0, 0.5, 1.0, 2.0});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == Catch::Approx(bessel::j1(std::sqrt(3.0) * 0.5)));
}

TEST_CASE("solver input validation") {
    CHECK_THROWS(rankine::solve_radial(params(1, 3.0), 8.0, 2e-3));   // d_tau too big
    CHECK_THROWS(rankine::solve_radial(params(1, 3.0), 3.0, 1e-3));   // tau_max < 5
    CHECK_THROWS(rankine::solve_radial(params(1, 3.0), 8.0, 3e-4));   // does not divide 1
    CHECK_THROWS(rankine::solve_radial(params(1, -1.0), 8.0, 1e-3));  // eps <= 0
}

TEST_CASE("RK4 convergence of the radial solver") {
    const auto coarse = rankine::solve_radial(params(1, 3.0), 8.0, 1e-3);
    const auto fine = rankine::solve_radial(params(1, 3.0), 8.0, 5e-4);
    const auto finer = rankine::solve_radial(params(1, 3.0), 8.0, 2.5e-4);
    const double e1 = std::abs(coarse.G.back() - finer.G.back());
    const double e2 = std::abs(fine.G.back() - finer.G.back());
    // ratio ~ (16 e) / e with a 4th-order scheme (Richardson-style estimate)
    CHECK(e1 / e2 > 8.0);
}

TEST_CASE("fig. 1 morphology") {
    SECTION("eps = 3: oscillatory decaying outer tail") {
        auto sol = rankine::solve_radial(params(1, 3.0), 8.0, 1e-3);
        int sign_changes = 0;
        std::vector<double> extrema;
        for (std::size_t i = 1; i + 1 < sol.tau.size(); ++i) {
            if (sol.tau[i] < 1.0) continue;
            if (sol.G[i] * sol.G[i + 1] < 0.0) ++sign_changes;
            if ((sol.G[i] - sol.G[i - 1]) * (sol.G[i + 1] - sol.G[i]) < 0.0)
                extrema.push_back(std::abs(sol.G[i]));
        }
        CHECK(sign_changes >= 3);
        REQUIRE(extrema.size() >= 3);
        for (std::size_t k = 1; k < extrema.size(); ++k)
            CHECK(extrema[k] < extrema[k - 1]);  // decaying envelope
    }
    SECTION("eps = 1: barrier penetration then oscillation") {
        auto sol = rankine::solve_radial(params(1, 1.0), 8.0, 1e-3);
        // grows inside the core (tunneling), oscillates outside
        CHECK(sol.G[500] > 1.0);   // tau = 0.5
        CHECK(sol.G[1000] > 1.0);  // tau = 1
        int sign_changes = 0;
        for (std::size_t i = 1; i + 1 < sol.tau.size(); ++i)
            if (sol.tau[i] >= 1.0 && sol.G[i] * sol.G[i + 1] < 0.0) ++sign_changes;
        CHECK(sign_changes >= 2);
    }
}

TEST_CASE("velocity profile") {
    const auto p = params(1, 3.0);
    SECTION("continuity at the core radius") {
        const double inner = p.omega() * p.xi0;
        const double outer = p.N / (p.mass * p.xi0);
        CHECK(std::abs(inner - outer) <= 1e-12);
        CHECK(std::abs(rankine::velocity_phi(p, p.xi0) - 1.0) <= 1e-12);
    }
    SECTION("point-vortex tail") {
        CHECK(rankine::velocity_phi(p, 100.0) == Catch::Approx(0.01));
        CHECK(rankine::velocity_phi(p, 1000.0) < 1.1e-3);
    }
    SECTION("vorticity: 2 omega inside, 0 outside") {
        CHECK(rankine::vorticity(p, 0.5) == 2.0 * p.omega());
        CHECK(rankine::vorticity(p, 2.0) == 0.0);
    }
}

TEST_CASE("quantum potential profile") {
    const auto p = params(1, 3.0);
    const double E = p.energy();
    SECTION("continuity at xi0 with value E - 1/2") {
        CHECK(rankine::quantum_potential_at(p, p.xi0) ==
              Catch::Approx(E - 0.5).margin(1e-12));
        CHECK(std::abs(rankine::quantum_potential_at(p, p.xi0 - 1e-12) -
                       rankine::quantum_potential_at(p, p.xi0 + 1e-12)) < 1e-9);
    }
    SECTION("tail limit is E") {
        CHECK(std::abs(rankine::quantum_potential_at(p, 1e6) - E) < 1e-10);
    }
    SECTION("radial Euler balance m v^2 / xi = dV/dxi in both domains") {
        for (double xi : {0.2, 0.5, 0.9, 1.0, 1.3, 2.0, 5.0}) {
            const double v = rankine::velocity_phi(p, xi);
            const double lhs = p.mass * v * v / xi;
            const double rhs = rankine::quantum_potential_derivative(p, xi);
            CHECK(std::abs(lhs - rhs) < 1e-8);
        }
    }
    SECTION("pointwise energy conservation E = (mv)^2/2m + eV_eff + V_Psi") {
        for (double xi : {0.1, 0.4, 0.8, 1.0, 1.5, 3.0, 7.0}) {
            const double v = rankine::velocity_phi(p, xi);
            const double total = p.mass * v * v / 2.0 +
                                 rankine::effective_potential_at(p, xi) +
                                 rankine::quantum_potential_at(p, xi);
            CHECK(std::abs(total - E) < 1e-8);
        }
    }
}

TEST_CASE("trajectory portrait: concentric circles at the analytic periods") {
    const auto p = params(1, 3.0);
    SECTION("inside orbit: period 2 pi / omega") {
        const double expect = 2.0 * num::pi / p.omega();
        const double measured = rankine::measure_orbit_period(p, 0.5, expect / 8192.0);
        CHECK(std::abs(measured - expect) / expect < 1e-4);
    }
    SECTION("outside orbit: period 2 pi m xi^2 / N") {
        const double expect = 2.0 * num::pi * p.mass * 4.0 / p.N;
        const double measured = rankine::measure_orbit_period(p, 2.0, expect / 8192.0);
        CHECK(std::abs(measured - expect) / expect < 1e-4);
    }
    SECTION("at the core radius both period formulas coincide") {
        const double inner = 2.0 * num::pi / p.omega();
        const double outer = 2.0 * num::pi * p.mass * p.xi0 * p.xi0 / p.N;
        CHECK(inner == Catch::Approx(outer).margin(1e-12));
    }
    SECTION("radius drift stays below 1e-6 over a period") {
        const auto ens =
            rankine::trajectory_portrait(p, {0.5, 2.0}, 2.0 * num::pi / 4096.0, 32);
        for (std::size_t i = 0; i < ens.size(); ++i) {
            const double r0 = std::hypot(ens.positions[i][0][0], ens.positions[i][0][1]);
            // check over the first full period of this orbit
            const double period = rankine::orbit_period(p, r0);
            for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
                if (ens.times[ti] > period) break;
                const double r = std::hypot(ens.positions[i][ti][0],
                                            ens.positions[i][ti][1]);
                CHECK(std::abs(r - r0) < 1e-6);
            }
        }
    }
    SECTION("the stagnation point is rejected") {
        CHECK_THROWS(rankine::trajectory_portrait(p, {0.0}, 1e-3));
    }
}

TEST_CASE("W transform and the barrier report") {
    auto sol = rankine::solve_radial(params(1, 3.0), 8.0, 1e-3);
    const auto wt = rankine::w_transform(sol);
    SECTION("barrier height 2 N^2 at the origin; classification") {
        CHECK(wt.barrier_max == 2.0);
        CHECK(wt.above_barrier);  // eps = 3 > 2
        const auto below = rankine::w_transform(
            rankine::solve_radial(params(1, 1.0), 8.0, 1e-3));
        CHECK(!below.above_barrier);
    }
    SECTION("one-sided limits at tau = 1 differ by the centrifugal 1/4") {
        CHECK(wt.u_at_one_inner == 1.0);
        CHECK(wt.u_at_one_outer == 0.75);
    }
    SECTION("W satisfies the barrier equation in the outer domain") {
        // the exact transform carries an extra 1/(4 tau^2) in the core, so
        // the residual window starts past the seam
        CHECK(rankine::w_equation_residual(sol, wt, 1.2, 7.8) < 1e-5);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qbohm/fields.hpp"
#include "qbohm/relaxation.hpp"
#include "qbohm/rng.hpp"
#include "qbohm/trajectories.hpp"

using namespace qbohm;
namespace num = std::numbers;

TEST_CASE("born sampling of a gaussian reproduces its moments") {
    const auto g = GridSpec::make_1d(-10.0, 10.0, 512);
    ComplexField psi = fields::gaussian_packet(g, 0.0, 1.0);
    const std::size_t n = 100000;
    const auto pts = relax::sample_born(psi, n, 7);
    double mean = 0.0;
    for (const auto& q : pts) mean += q[0];
    mean /= n;
    double var = 0.0;
    for (const auto& q : pts) var += (q[0] - mean) * (q[0] - mean);
    var /= n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("born sampling of a uniform density passes the KS test") {
    const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 64);
    ComplexField psi = fields::plane_wave(g, 1.0);  // |psi|^2 uniform
    const std::size_t n = 20000;
    auto pts = relax::sample_born(psi, n, 11);
    std::vector<double> xs;
    for (const auto& q : pts) xs.push_back(q[0]);
    std::sort(xs.begin(), xs.end());
    const double L = 2.0 * num::pi;
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = xs[i] / L;
        d = std::max(d, std::abs((i + 1.0) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    CHECK(d < relax::ks_threshold(n));
}

TEST_CASE("born sampling is bitwise deterministic for a fixed seed") {
    const auto g = GridSpec::make_1d(-10.0, 10.0, 128);
    ComplexField psi = fields::gaussian_packet(g, 1.0, 1.5);
    const auto a = relax::sample_born(psi, 1, 12345);
    const auto b = relax::sample_born(psi, 1, 12345);
    REQUIRE(a.size() == 1);
    CHECK(a[0][0] == b[0][0]);
    const auto c = relax::sample_born(psi, 1, 54321);
    CHECK(a[0][0] != c[0][0]);
}

TEST_CASE("born sampling rejects a hopeless proposal") {
    // a single-node spike on a long grid: acceptance collapses below 1e-4
    const auto g = GridSpec::make_1d(0.0, 1.0, 65536, Boundary::dirichlet);
    ComplexField psi(g);
    psi.values[32768] = cplx(1.0, 0.0);
    CHECK_THROWS_WITH(relax::sample_born(psi, 100, 1),
                      Catch::Matchers::ContainsSubstring("proposal too loose"));
}

TEST_CASE("f ratio") {
    const auto g = GridSpec::make_1d(-8.0, 8.0, 256);
    ComplexField psi = fields::gaussian_packet(g, 0.0, 1.0);
    SECTION("equilibrium gives f = 1") {
        const RealField rho = density(psi);
        const RealField f = relax::f_ratio(rho, psi);
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (!std::isnan(f.values[i]))
                CHECK(std::abs(f.values[i] - 1.0) < 1e-12);
    }
    SECTION("half-support density gives f = 2 on its side, 0 elsewhere") {
        RealField rho = density(psi);
        for (int i = 0; i < g.n[0]; ++i)
            if (g.coord(0, i) >= 0.0) rho.values[i] = 0.0;
        // renormalize: the kept half carries 1/2 of the weight
        for (auto& v : rho.values) v *= 2.0;
        const RealField f = relax::f_ratio(rho, psi);
        for (int i = 0; i < g.n[0]; ++i) {
            if (std::isnan(f.values[i])) continue;
            const double expect = g.coord(0, i) < 0.0 ? 2.0 : 0.0;
            CHECK(std::abs(f.values[i] - expect) < 1e-12);
        }
    }
    SECTION("arbitrary smooth density matches pointwise division") {
        RealField rho = fields::real_from_function(g, [](double x, double) {
            return std::exp(-(x - 0.5) * (x - 0.5) / 3.0);
        });
        const RealField f = relax::f_ratio(rho, psi);
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            if (std::isnan(f.values[i])) continue;
            const double direct = rho.values[i] / std::norm(psi.values[i]);
            CHECK(std::abs(f.values[i] - direct) < 1e-12 * std::abs(direct));
        }
    }
}

TEST_CASE("h function") {
    SECTION("equilibrium: exactly zero") {
        const auto g = GridSpec::make_1d(-8.0, 8.0, 128);
        ComplexField psi = fields::gaussian_packet(g, 0.0, 1.0);
        RealField f(g, 1.0);
        CHECK(relax::h_function(f, psi) == 0.0);
    }
    SECTION("half-support closed form: ln 2") {
        relax::CoarseGrain cg;
        cg.cells_x = 2;
        cg.cells_y = 1;
        cg.d_gamma = {0.5, 0.5};
        cg.f_bar = {2.0, 0.0};
        cg.validate();
        CHECK(std::abs(relax::h_function(cg) - std::log(2.0)) < 1e-12);
    }
    SECTION("nonnegativity on random normalized ratios") {
        Rng rng(3);
        for (int rep = 0; rep < 50; ++rep) {
            relax::CoarseGrain cg;
            cg.cells_x = 16;
            cg.cells_y = 1;
            double wsum = 0.0;
            for (int i = 0; i < 16; ++i) {
                cg.d_gamma.push_back(rng.uniform(0.01, 1.0));
                wsum += cg.d_gamma.back();
            }
            for (auto& w : cg.d_gamma) w /= wsum;
            // random probability masses p_i; f_i = p_i / dGamma_i
            double psum = 0.0;
            std::vector<double> p;
            for (int i = 0; i < 16; ++i) {
                p.push_back(rng.uniform(0.0, 1.0));
                psum += p.back();
            }
            for (int i = 0; i < 16; ++i) cg.f_bar.push_back(p[i] / psum / cg.d_gamma[i]);
            CHECK(relax::h_function(cg) >= 0.0);
        }
    }
    SECTION("coarsening cannot increase H at fixed data") {
        const auto g = GridSpec::make_2d(0.0, 1.0, 64, 0.0, 1.0, 64, Boundary::dirichlet);
        ComplexField psi = fields::from_function(g, [](double x, double y) {
            return cplx(std::sin(num::pi * x) * std::sin(num::pi * y) + 0.2, 0.0);
        });
        normalize(psi);
        RealField rho = fields::real_from_function(g, [](double x, double y) {
            return 1.0 + 0.5 * std::sin(2.0 * num::pi * x) * std::cos(num::pi * y);
        });
        const RealField f = relax::f_ratio(rho, psi);
        double prev = std::numeric_limits<double>::infinity();
        for (int cells : {32, 16, 8, 4}) {
            const auto cg = relax::coarse_grain_field(f, psi, cells, cells);
            const double h = relax::h_function(cg);
            CHECK(h <= prev + 1e-12);
            prev = h;
        }
    }
}

TEST_CASE("f is constant along guided trajectories (rotating-frame oracle)") {
    // stationary single vortex: any rho0 is transported by a pure
    // differential rotation theta(xi, t) = t/(m xi^2), so the transported
    // density is known in closed form and f can be evaluated exactly
    const auto field = traj::vortex2d_field(1, 1.0);
    auto rho0 = [](double x, double y) {
        const double dx = x - 0.8, dy = y - 0.2;
        return std::exp(-(dx * dx + dy * dy));
    };
    auto rho_psi = [](double x, double y) {  // normalized |(x+iy) e^{-xi^2/2}|^2
        const double xi2 = x * x + y * y;
        return xi2 * std::exp(-xi2) / num::pi;
    };
    Rng rng(9);
    std::vector<traj::Vec3> starts;
    while (starts.size() < 100) {
        const double x = rng.uniform(-2.0, 2.0), y = rng.uniform(-2.0, 2.0);
        const double xi = std::hypot(x, y);
        if (xi < 0.3 || xi > 2.2) continue;
        starts.push_back({x, y, 0.0});
    }
    traj::IntegrateOptions opt;
    opt.t1 = 2.0;
    opt.dt = 1e-3;
    opt.record_every = 2000;
    const auto ens = integrate_guided(field, starts, opt);
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const auto& q0 = ens.positions[i].front();
        const auto& qt = ens.positions[i].back();
        const double f0 = rho0(q0[0], q0[1]) / rho_psi(q0[0], q0[1]);
        // rotate qt back by theta to find its preimage under the flow
        const double xi2 = qt[0] * qt[0] + qt[1] * qt[1];
        const double theta = opt.t1 / xi2;
        const double c = std::cos(-theta), s = std::sin(-theta);
        const double px = c * qt[0] - s * qt[1];
        const double py = s * qt[0] + c * qt[1];
        const double ft = rho0(px, py) / rho_psi(qt[0], qt[1]);
        worst = std::max(worst, std::abs(ft - f0));
    }
    CHECK(worst < 1e-5);  // O(dt^2) envelope; RK4 actually does far better
}

TEST_CASE("equivariance: a born ensemble stays born-distributed") {
    relax::RelaxationConfig cfg;
    cfg.modes_x = cfg.modes_y = 2;
    cfg.n_traj = 20000;
    cfg.cells = 8;
    cfg.T = 1.0;
    cfg.dt = 5e-3;
    cfg.grid_n = 64;
    // snapshot every step: the (2,2) mode turns 0.197 rad per dt and the
    // linear-in-time velocity blend needs that resolved
    cfg.snapshot_stride = 1;
    cfg.outputs = 4;
    cfg.seed = 21;
    cfg.equilibrium_start = true;
    const auto rep = relax::run_relaxation(cfg);
    REQUIRE(!rep.times.empty());
    const double noise_floor =
        5.0 * cfg.cells * cfg.cells / static_cast<double>(cfg.n_traj);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        CHECK(rep.ks[i] < relax::ks_threshold(cfg.n_traj));
        CHECK(rep.h_bar[i] < noise_floor);
    }
    CHECK(rep.captured * 100 <= cfg.n_traj);
}

TEST_CASE("relaxation from a non-equilibrium start decays the H function") {
    relax::RelaxationConfig cfg;
    cfg.modes_x = cfg.modes_y = 4;
    cfg.n_traj = 5000;
    cfg.cells = 8;
    cfg.T = 2.0 * fields::box_revival_period();
    cfg.dt = 2.5e-3;
    cfg.grid_n = 128;
    cfg.snapshot_stride = 4;
    cfg.outputs = 4;
    cfg.seed = 5;
    cfg.equilibrium_start = false;  // rho0 = |ground mode|^2
    const auto rep = relax::run_relaxation(cfg);
    REQUIRE(rep.h_bar.size() >= 3);
    CHECK(rep.h_bar.front() > 0.1);                  // starts far from equilibrium
    CHECK(rep.h_bar.back() < rep.h_bar.front());     // decays toward it
}

TEST_CASE("monte-carlo noise floor scales as 1/sqrt(n)") {
    // the equilibrium H-bar estimate is chi-square-like: 9x the ensemble
    // should cut the floor by about 3
    auto floor_at = [](std::size_t n, std::uint64_t seed) {
        relax::RelaxationConfig cfg;
        cfg.modes_x = cfg.modes_y = 2;
        cfg.n_traj = n;
        cfg.cells = 8;
        cfg.T = 0.2;
        cfg.dt = 5e-3;
        cfg.grid_n = 64;
        cfg.snapshot_stride = 4;
        cfg.outputs = 1;
        cfg.seed = seed;
        cfg.equilibrium_start = true;
        return relax::run_relaxation(cfg).h_bar.back();
    };
    const double coarse = floor_at(4000, 31);
    const double fine = floor_at(36000, 32);
    CHECK(fine < coarse);
    CHECK(fine * 1.5 < coarse);  // expect ~9x reduction in the mean, allow noise
}

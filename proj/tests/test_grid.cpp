#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "qbohm/field_io.hpp"
#include "qbohm/fields.hpp"
#include "qbohm/grid.hpp"
#include "qbohm/grid_ops.hpp"
#include "qbohm/rng.hpp"

using namespace qbohm;
namespace num = std::numbers;

TEST_CASE("grid spec validation") {
    CHECK_THROWS(GridSpec::make_1d(0.0, 1.0, 4));        // too few points
    CHECK_THROWS(GridSpec::make_1d(1.0, 1.0, 64));       // empty extent
    CHECK_NOTHROW(GridSpec::make_1d(0.0, 1.0, 64));
}

TEST_CASE("spectral gradient of sin is cos") {
    const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 64);
    RealField f(g);
    for (int i = 0; i < g.n[0]; ++i) f.values[i] = std::sin(g.coord(0, i));
    const RealField df = gradient(f, 0);
    double err = 0.0;
    for (int i = 0; i < g.n[0]; ++i)
        err = std::max(err, std::abs(df.values[i] - std::cos(g.coord(0, i))));
    CHECK(err < 1e-10);
}

TEST_CASE("gradient of a constant field is zero") {
    const auto g = GridSpec::make_1d(-3.0, 5.0, 128);
    RealField f(g, 4.2);
    const RealField df = gradient(f, 0);
    for (double v : df.values) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("dirichlet 4th-order gradient is exact for x^2") {
    const auto g = GridSpec::make_1d(-1.0, 1.0, 65, Boundary::dirichlet);
    RealField f(g);
    for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.coord(0, i);
        f.values[i] = x * x;
    }
    const RealField df = gradient(f, 0);
    for (int i = 0; i < g.n[0]; ++i)
        CHECK(std::abs(df.values[i] - 2.0 * g.coord(0, i)) < 1e-12);
}

TEST_CASE("laplacian examples") {
    SECTION("sin -> -sin on periodic grid") {
        const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 64);
        RealField f(g);
        for (int i = 0; i < g.n[0]; ++i) f.values[i] = std::sin(g.coord(0, i));
        const RealField lf = laplacian(f);
        for (int i = 0; i < g.n[0]; ++i)
            CHECK(std::abs(lf.values[i] + std::sin(g.coord(0, i))) < 1e-10);
    }
    SECTION("constant -> zero") {
        const auto g = GridSpec::make_1d(0.0, 1.0, 32);
        RealField f(g, -7.5);
        for (double v : laplacian(f).values) CHECK(std::abs(v) < 1e-10);
    }
    SECTION("gaussian analytic second derivative") {
        const auto g = GridSpec::make_1d(-12.0, 12.0, 256);
        RealField f(g);
        for (int i = 0; i < g.n[0]; ++i) {
            const double x = g.coord(0, i);
            f.values[i] = std::exp(-x * x / 4.0);
        }
        const RealField lf = laplacian(f);
        double err = 0.0;
        for (int i = 0; i < g.n[0]; ++i) {
            const double x = g.coord(0, i);
            const double expect = (x * x / 4.0 - 0.5) * std::exp(-x * x / 4.0);
            err = std::max(err, std::abs(lf.values[i] - expect));
        }
        CHECK(err < 1e-6);
    }
}

TEST_CASE("spectral gradient of a pure Fourier mode is ik times it") {
    const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 64);
    ComplexField f(g);
    const double k = 5.0;
    for (int i = 0; i < g.n[0]; ++i)
        f.values[i] = std::polar(1.0, k * g.coord(0, i));
    const ComplexField df = gradient(f, 0);
    double err = 0.0;
    for (int i = 0; i < g.n[0]; ++i)
        err = std::max(err, std::abs(df.values[i] - cplx(0.0, k) * f.values[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("gradient of gradient equals laplacian on smooth periodic data") {
    const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 128);
    Rng rng(11);
    RealField f(g);
    for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.coord(0, i);
        f.values[i] = std::sin(x) + 0.4 * std::cos(3.0 * x) + 0.2 * std::sin(5.0 * x);
    }
    const RealField once = gradient(gradient(f, 0), 0);
    const RealField lap = laplacian(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        err = std::max(err, std::abs(once.values[i] - lap.values[i]));
    CHECK(err < 1e-9);
}

TEST_CASE("interpolation") {
    SECTION("exact at grid nodes, bit for bit") {
        // power-of-two spacing so node coordinates reproduce exactly
        const auto g = GridSpec::make_1d(0.0, 4.0, 64);
        Rng rng(3);
        RealField f(g);
        for (auto& v : f.values) v = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < g.n[0]; ++i) {
            const double got = interpolate(f, g.coord(0, i));
            CHECK(got == f.values[i]);
        }
    }
    SECTION("cubic reproduces linear fields exactly") {
        const auto g = GridSpec::make_1d(0.0, 4.0, 64, Boundary::dirichlet);
        RealField f(g);
        for (int i = 0; i < g.n[0]; ++i) f.values[i] = 3.0 * g.coord(0, i) - 1.0;
        for (int i = 0; i + 1 < g.n[0]; ++i) {
            const double x = g.coord(0, i) + 0.5 * g.step(0);
            CHECK(std::abs(interpolate(f, x) - (3.0 * x - 1.0)) < 1e-12);
        }
    }
    SECTION("sin on a 256-point grid: 1000 random queries under 1e-6") {
        const auto g = GridSpec::make_1d(0.0, 2.0 * num::pi, 256);
        RealField f(g);
        for (int i = 0; i < g.n[0]; ++i) f.values[i] = std::sin(g.coord(0, i));
        Rng rng(17);
        double err = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double x = rng.uniform(0.0, 2.0 * num::pi);
            err = std::max(err, std::abs(interpolate(f, x) - std::sin(x)));
        }
        CHECK(err < 1e-6);
    }
    SECTION("outside a dirichlet domain is an error") {
        const auto g = GridSpec::make_1d(0.0, 1.0, 16, Boundary::dirichlet);
        RealField f(g, 1.0);
        CHECK_THROWS_AS(interpolate(f, 1.5), std::out_of_range);
    }
}

TEST_CASE("gradient errors") {
    const auto g = GridSpec::make_1d(0.0, 1.0, 64);
    RealField f(g);
    CHECK_THROWS(gradient(f, 1));  // axis out of range
    const auto bad = GridSpec::make_1d(0.0, 1.0, 48);  // not a power of two
    RealField fb(bad);
    CHECK_THROWS(gradient(fb, 0));
}

TEST_CASE("field CSV round trip is bit exact") {
    const auto g = GridSpec::make_2d(-1.0, 1.0, 16, 0.0, 2.0, 8);
    ComplexField f(g);
    Rng rng(5);
    for (auto& v : f.values) v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    f.mass = 1.5;
    f.potential_ref = "test-potential";
    const auto dir = std::filesystem::temp_directory_path() / "qbohm_grid_io";
    std::filesystem::create_directories(dir);
    const auto csv = (dir / "f.csv").string();
    const auto side = (dir / "f.json").string();
    io::write_field(f, csv, side);
    const ComplexField back = io::read_complex_field(csv, side);
    REQUIRE(back.values.size() == f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        CHECK(back.values[i].real() == f.values[i].real());
        CHECK(back.values[i].imag() == f.values[i].imag());
    }
    CHECK(back.mass == f.mass);
    CHECK(back.potential_ref == f.potential_ref);
}

TEST_CASE("normalization invariant") {
    const auto g = GridSpec::make_1d(-10.0, 10.0, 128);
    ComplexField f = fields::gaussian_packet(g, 0.0, 1.0);
    CHECK(check_normalized(f));
}

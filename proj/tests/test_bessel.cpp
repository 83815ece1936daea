#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qbohm/bessel.hpp"

using namespace qbohm;

namespace {

// ascending-series oracle, independent code path from the library
double j0_series_oracle(double x) {
    double term = 1.0, sum = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 60; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
    }
    return sum;
}

} // namespace

TEST_CASE("J at the origin") {
    CHECK(bessel::j0(0.0) == 1.0);
    CHECK(bessel::j1(0.0) == 0.0);
    CHECK(bessel::jn(3, 0.0) == 0.0);
    CHECK(bessel::jn(10, 0.0) == 0.0);
}

TEST_CASE("first zero of J0 near 2.404826") {
    // bisection on the series oracle brackets the zero
    double lo = 2.0, hi = 3.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (j0_series_oracle(lo) * j0_series_oracle(mid) <= 0.0) hi = mid;
        else lo = mid;
    }
    const double zero = 0.5 * (lo + hi);
    CHECK(std::abs(zero - 2.404826) < 1e-5);
    CHECK(std::abs(bessel::j0(zero)) < 1e-10);
    CHECK(std::abs(bessel::j0(2.404826)) < 1e-5);
}

TEST_CASE("Wronskian identity J_n Y_n' - J_n' Y_n = 2/(pi x)") {
    // derivative relations: C_n' = C_{n-1} - (n/x) C_n (and J0' = -J1)
    for (double x : {1.0, 5.0, 20.0}) {
        for (int n : {0, 1, 2, 5}) {
            const double jn = bessel::jn(n, x);
            const double yn = bessel::yn(n, x);
            const double jp = n == 0 ? -bessel::j1(x)
                                     : bessel::jn(n - 1, x) - n / x * jn;
            const double yp = n == 0 ? -bessel::y1(x)
                                     : bessel::yn(n - 1, x) - n / x * yn;
            const double w = jn * yp - jp * yn;
            CHECK(std::abs(w - 2.0 / (3.14159265358979323846 * x)) < 1e-9);
        }
    }
}

TEST_CASE("agreement with the standard library across the working range") {
    // Y_n blows up near the origin for large n (|Y_10(0.5)| ~ 1e11), where an
    // absolute 1e-10 is below one ulp; measure error relative to max(1, |y|).
    double worst_j = 0.0, worst_y = 0.0;
    for (int n = 0; n <= 10; ++n) {
        for (double x = 0.1; x <= 50.0; x += 0.37) {
            worst_j = std::max(worst_j,
                               std::abs(bessel::jn(n, x) - std::cyl_bessel_j(n, x)));
            const double ref = std::cyl_neumann(n, x);
            worst_y = std::max(worst_y, std::abs(bessel::yn(n, x) - ref) /
                                            std::max(1.0, std::abs(ref)));
        }
    }
    CHECK(worst_j < 1e-10);
    CHECK(worst_y < 1e-10);
}

TEST_CASE("domain errors") {
    CHECK_THROWS(bessel::y0(0.0));
    CHECK_THROWS(bessel::yn(2, -1.0));
    CHECK_THROWS(bessel::jn(-1, 1.0));
}

TEST_CASE("paired evaluation") {
    const auto [j, y] = bessel::jy(1, 5.0);
    CHECK(std::abs(j - std::cyl_bessel_j(1, 5.0)) < 1e-12);
    CHECK(std::abs(y - std::cyl_neumann(1, 5.0)) < 1e-12);
}

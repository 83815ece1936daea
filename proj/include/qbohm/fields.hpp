#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/rng.hpp"

namespace qbohm::fields {

inline constexpr double pi = 3.14159265358979323846;

inline ComplexField from_function(
    const GridSpec& g, const std::function<cplx(double, double)>& fn,
    double mass = 1.0) {
    ComplexField f(g);
    f.mass = mass;
    if (g.dim == 1) {
        for (int i = 0; i < g.n[0]; ++i) f.values[i] = fn(g.coord(0, i), 0.0);
    } else {
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix)
                f.at(ix, iy) = fn(g.coord(0, ix), g.coord(1, iy));
    }
    return f;
}

inline RealField real_from_function(const GridSpec& g,
                                    const std::function<double(double, double)>& fn) {
    RealField f(g);
    if (g.dim == 1) {
        for (int i = 0; i < g.n[0]; ++i) f.values[i] = fn(g.coord(0, i), 0.0);
    } else {
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix)
                f.at(ix, iy) = fn(g.coord(0, ix), g.coord(1, iy));
    }
    return f;
}

/// Gaussian packet ~ exp(-(x-x0)^2 / (4 sigma^2)) exp(i k x); |psi|^2 has
/// position variance sigma^2.
inline ComplexField gaussian_packet(const GridSpec& g, double x0, double sigma,
                                    double k = 0.0, double mass = 1.0) {
    ComplexField f = from_function(g, [=](double x, double) {
        const double arg = (x - x0) * (x - x0) / (4.0 * sigma * sigma);
        return std::polar(std::exp(-arg), k * x);
    }, mass);
    normalize(f);
    return f;
}

inline ComplexField plane_wave(const GridSpec& g, double kx, double ky = 0.0,
                               double mass = 1.0) {
    return from_function(g, [=](double x, double y) {
        return std::polar(1.0, kx * x + ky * y);
    }, mass);
}

/// psi = (x + i y)^w exp(-(x^2+y^2)/2): a winding-w vortex at the origin.
inline ComplexField vortex(const GridSpec& g, int winding = 1, double mass = 1.0) {
    ComplexField f = from_function(g, [=](double x, double y) {
        cplx z{1.0, 0.0};
        for (int k = 0; k < winding; ++k) z *= cplx(x, y);
        return z * std::exp(-(x * x + y * y) / 2.0);
    }, mass);
    normalize(f);
    return f;
}

/// Harmonic-oscillator ground state exp(-m w x^2 / 2), eigenvalue w/2.
inline ComplexField harmonic_ground_state(const GridSpec& g, double omega = 1.0,
                                          double mass = 1.0) {
    ComplexField f = from_function(g, [=](double x, double) {
        return cplx(std::exp(-mass * omega * x * x / 2.0), 0.0);
    }, mass);
    normalize(f);
    return f;
}

inline RealField harmonic_potential(const GridSpec& g, double omega = 1.0,
                                    double mass = 1.0) {
    return real_from_function(g, [=](double x, double) {
        return 0.5 * mass * omega * omega * x * x;
    });
}

// ---- 2D box eigenmode superpositions -------------------------------------------

/// Superposition of box eigenmodes sin(n pi x) sin(m pi y) on the unit box
/// with equal amplitudes and seeded random phases. Evolving the odd
/// extension on the doubled periodic domain [0,2)^2 reproduces the hard-wall
/// dynamics exactly, wall nodal lines included.
struct BoxSuperposition {
    int modes_x = 4;
    int modes_y = 4;
    double mass = 1.0;
    std::vector<cplx> coeffs;  // row-major (n-1) + modes_x*(m-1)

    double mode_energy(int n, int m) const {
        return (n * n + m * m) * pi * pi / (2.0 * mass);
    }

    cplx value(double x, double y, double t = 0.0) const {
        cplx acc{0.0, 0.0};
        for (int m = 1; m <= modes_y; ++m)
            for (int n = 1; n <= modes_x; ++n) {
                const cplx c = coeffs[(n - 1) + modes_x * (m - 1)];
                const double sp = std::sin(n * pi * x) * std::sin(m * pi * y);
                acc += c * sp * std::polar(1.0, -mode_energy(n, m) * t);
            }
        return acc;
    }
};

inline BoxSuperposition make_box_superposition(int modes_x, int modes_y,
                                               std::uint64_t seed,
                                               double mass = 1.0) {
    if (modes_x * modes_y < 4)
        throw std::invalid_argument("box superposition needs at least 4 modes");
    BoxSuperposition b;
    b.modes_x = modes_x;
    b.modes_y = modes_y;
    b.mass = mass;
    Rng rng(seed);
    const double amp = 1.0 / std::sqrt(static_cast<double>(modes_x) * modes_y);
    for (int m = 1; m <= modes_y; ++m)
        for (int n = 1; n <= modes_x; ++n)
            b.coeffs.push_back(std::polar(amp, 2.0 * pi * rng.uniform()));
    return b;
}

/// Box revival period 4/pi: every mode phase realigns modulo 2 pi.
inline double box_revival_period(double mass = 1.0) { return 4.0 * mass / pi; }

/// The superposition sampled on the doubled periodic domain [0,2)^2,
/// normalized there (the unit box then carries exactly 1/4 of the norm).
inline ComplexField box_on_doubled_grid(const BoxSuperposition& b, int grid_n,
                                        double t = 0.0) {
    const GridSpec g = GridSpec::make_2d(0.0, 2.0, grid_n, 0.0, 2.0, grid_n,
                                         Boundary::periodic);
    ComplexField f = from_function(g, [&](double x, double y) {
        return b.value(x, y, t);
    }, b.mass);
    normalize(f);
    return f;
}

/// The superposition restricted to the unit box on a dirichlet grid,
/// normalized over the box (used for Born sampling of box ensembles).
inline ComplexField box_on_unit_grid(const BoxSuperposition& b, int grid_n,
                                     double t = 0.0) {
    const GridSpec g = GridSpec::make_2d(0.0, 1.0, grid_n, 0.0, 1.0, grid_n,
                                         Boundary::dirichlet);
    ComplexField f = from_function(g, [&](double x, double y) {
        return b.value(x, y, t);
    }, b.mass);
    normalize(f);
    return f;
}

} // namespace qbohm::fields

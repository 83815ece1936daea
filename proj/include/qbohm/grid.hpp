#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbohm/fft.hpp"

namespace qbohm {

using cplx = std::complex<double>;

enum class Boundary { periodic, dirichlet };

/// Uniform grid in 1 or 2 dimensions, natural units (hbar = 1).
/// Periodic axes exclude the right endpoint; dirichlet axes include both.
struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{8, 1};
    Boundary boundary = Boundary::periodic;

    static GridSpec make_1d(double lo, double hi, int n,
                            Boundary b = Boundary::periodic) {
        GridSpec s;
        s.dim = 1;
        s.lo = {lo, 0.0};
        s.hi = {hi, 0.0};
        s.n = {n, 1};
        s.boundary = b;
        s.validate();
        return s;
    }

    static GridSpec make_2d(double lox, double hix, int nx, double loy,
                            double hiy, int ny, Boundary b = Boundary::periodic) {
        GridSpec s;
        s.dim = 2;
        s.lo = {lox, loy};
        s.hi = {hix, hiy};
        s.n = {nx, ny};
        s.boundary = b;
        s.validate();
        return s;
    }

    void validate() const {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("GridSpec: dim must be 1 or 2");
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 8)
                throw std::invalid_argument("GridSpec: need at least 8 points per axis");
            if (!(hi[a] > lo[a]))
                throw std::invalid_argument("GridSpec: extent_max must exceed extent_min");
        }
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n[a]);
        return s;
    }

    double length(int axis) const { return hi[axis] - lo[axis]; }

    /// Node spacing. Periodic axes have n cells; dirichlet axes n-1.
    double step(int axis) const {
        return boundary == Boundary::periodic
                   ? length(axis) / n[axis]
                   : length(axis) / (n[axis] - 1);
    }

    double coord(int axis, int i) const { return lo[axis] + i * step(axis); }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= step(a);
        return v;
    }

    std::size_t index(int ix, int iy = 0) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(iy);
    }

    bool spectral_ok() const {
        for (int a = 0; a < dim; ++a)
            if (!fft::is_power_of_two(static_cast<std::size_t>(n[a]))) return false;
        return boundary == Boundary::periodic;
    }

    bool same_grid(const GridSpec& o) const {
        if (dim != o.dim || boundary != o.boundary) return false;
        for (int a = 0; a < dim; ++a)
            if (lo[a] != o.lo[a] || hi[a] != o.hi[a] || n[a] != o.n[a]) return false;
        return true;
    }
};

struct RealField {
    GridSpec spec;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(const GridSpec& s, double fill = 0.0)
        : spec(s), values(s.size(), fill) {}

    double& at(int ix, int iy = 0) { return values[spec.index(ix, iy)]; }
    double at(int ix, int iy = 0) const { return values[spec.index(ix, iy)]; }
};

/// Discretized wave function. Mass is the particle mass m attached to the
/// field (degenerate per axis); potential_ref optionally names the external
/// potential this field was evolved with.
struct ComplexField {
    GridSpec spec;
    std::vector<cplx> values;
    double mass = 1.0;
    std::optional<std::string> potential_ref;
    bool normalized = false;

    ComplexField() = default;
    explicit ComplexField(const GridSpec& s, cplx fill = cplx{0.0, 0.0})
        : spec(s), values(s.size(), fill) {}

    cplx& at(int ix, int iy = 0) { return values[spec.index(ix, iy)]; }
    cplx at(int ix, int iy = 0) const { return values[spec.index(ix, iy)]; }
};

inline double norm_squared(const ComplexField& f) {
    double s = 0.0;
    for (const auto& v : f.values) s += std::norm(v);
    return s * f.spec.cell_volume();
}

inline void normalize(ComplexField& f) {
    const double n2 = norm_squared(f);
    if (n2 <= 0.0) throw std::invalid_argument("normalize: field has zero norm");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& v : f.values) v *= inv;
    f.normalized = true;
}

/// Checks the "normalized" invariant: sum |psi|^2 * cellvolume = 1 to 1e-9.
inline bool check_normalized(const ComplexField& f, double tol = 1e-9) {
    return std::abs(norm_squared(f) - 1.0) <= tol;
}

inline RealField density(const ComplexField& f) {
    RealField rho(f.spec);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        rho.values[i] = std::norm(f.values[i]);
    return rho;
}

inline double max_abs(const RealField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(const ComplexField& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace qbohm

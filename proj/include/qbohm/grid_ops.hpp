#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qbohm/fft.hpp"
#include "qbohm/grid.hpp"

namespace qbohm {

namespace detail {

template <class T>
inline void gather_line(const GridSpec& g, const std::vector<T>& v, int axis,
                        int line, std::vector<cplx>& out) {
    const int n = g.n[axis];
    out.resize(n);
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) out[i] = cplx(v[i]);
    } else if (axis == 0) {
        const std::size_t base = static_cast<std::size_t>(line) * g.n[0];
        for (int i = 0; i < n; ++i) out[i] = cplx(v[base + i]);
    } else {
        for (int i = 0; i < n; ++i) out[i] = cplx(v[g.index(line, i)]);
    }
}

inline void scatter_line(const GridSpec& g, std::vector<double>& v, int axis,
                         int line, const std::vector<cplx>& in) {
    const int n = g.n[axis];
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) v[i] = in[i].real();
    } else if (axis == 0) {
        const std::size_t base = static_cast<std::size_t>(line) * g.n[0];
        for (int i = 0; i < n; ++i) v[base + i] = in[i].real();
    } else {
        for (int i = 0; i < n; ++i) v[g.index(line, i)] = in[i].real();
    }
}

inline void scatter_line(const GridSpec& g, std::vector<cplx>& v, int axis,
                         int line, const std::vector<cplx>& in) {
    const int n = g.n[axis];
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) v[i] = in[i];
    } else if (axis == 0) {
        const std::size_t base = static_cast<std::size_t>(line) * g.n[0];
        for (int i = 0; i < n; ++i) v[base + i] = in[i];
    } else {
        for (int i = 0; i < n; ++i) v[g.index(line, i)] = in[i];
    }
}

inline int line_count(const GridSpec& g, int axis) {
    if (g.dim == 1) return 1;
    return axis == 0 ? g.n[1] : g.n[0];
}

// Spectral derivative along one axis: multiplier ik for order 1 (Nyquist
// zeroed), -k^2 for order 2 (Nyquist kept).
template <class FieldT>
inline void spectral_derivative(const FieldT& f, int axis, int order,
                                std::vector<cplx>& out_values) {
    const GridSpec& g = f.spec;
    const int n = g.n[axis];
    const double L = g.length(axis);
    std::vector<cplx> line;
    out_values.resize(g.size());
    std::vector<cplx> mult(n);
    for (int j = 0; j < n; ++j) {
        double k = fft::wavenumber(j, n, L);
        if (order == 1) {
            if (j == n / 2) k = 0.0;
            mult[j] = cplx(0.0, k);
        } else {
            mult[j] = cplx(-k * k, 0.0);
        }
    }
    for (int l = 0; l < line_count(g, axis); ++l) {
        gather_line(g, f.values, axis, l, line);
        fft::forward(line);
        for (int j = 0; j < n; ++j) line[j] *= mult[j];
        fft::inverse(line);
        scatter_line(g, out_values, axis, l, line);
    }
}

// 4th-order finite differences with one-sided stencils at dirichlet edges.
template <class T>
inline void fd4_derivative_line(const std::vector<T>& in, std::vector<T>& out,
                                double h, int order) {
    const int n = static_cast<int>(in.size());
    out.resize(n);
    if (order == 1) {
        const double inv = 1.0 / (12.0 * h);
        out[0] = (-25.0 * in[0] + 48.0 * in[1] - 36.0 * in[2] + 16.0 * in[3] -
                  3.0 * in[4]) * inv;
        out[1] = (-3.0 * in[0] - 10.0 * in[1] + 18.0 * in[2] - 6.0 * in[3] +
                  in[4]) * inv;
        for (int i = 2; i < n - 2; ++i)
            out[i] = (in[i - 2] - 8.0 * in[i - 1] + 8.0 * in[i + 1] - in[i + 2]) * inv;
        out[n - 2] = (3.0 * in[n - 1] + 10.0 * in[n - 2] - 18.0 * in[n - 3] +
                      6.0 * in[n - 4] - in[n - 5]) * inv;
        out[n - 1] = (25.0 * in[n - 1] - 48.0 * in[n - 2] + 36.0 * in[n - 3] -
                      16.0 * in[n - 4] + 3.0 * in[n - 5]) * inv;
    } else {
        const double inv = 1.0 / (12.0 * h * h);
        out[0] = (45.0 * in[0] - 154.0 * in[1] + 214.0 * in[2] - 156.0 * in[3] +
                  61.0 * in[4] - 10.0 * in[5]) * inv;
        out[1] = (10.0 * in[0] - 15.0 * in[1] - 4.0 * in[2] + 14.0 * in[3] -
                  6.0 * in[4] + in[5]) * inv;
        for (int i = 2; i < n - 2; ++i)
            out[i] = (-in[i - 2] + 16.0 * in[i - 1] - 30.0 * in[i] +
                      16.0 * in[i + 1] - in[i + 2]) * inv;
        out[n - 2] = (10.0 * in[n - 1] - 15.0 * in[n - 2] - 4.0 * in[n - 3] +
                      14.0 * in[n - 4] - 6.0 * in[n - 5] + in[n - 6]) * inv;
        out[n - 1] = (45.0 * in[n - 1] - 154.0 * in[n - 2] + 214.0 * in[n - 3] -
                      156.0 * in[n - 4] + 61.0 * in[n - 5] - 10.0 * in[n - 6]) * inv;
    }
}

template <class FieldT>
inline void fd4_derivative(const FieldT& f, int axis, int order,
                           std::vector<typename std::decay_t<decltype(f.values)>::value_type>& out_values) {
    using T = typename std::decay_t<decltype(f.values)>::value_type;
    const GridSpec& g = f.spec;
    const int n = g.n[axis];
    const double h = g.step(axis);
    out_values.resize(g.size());
    std::vector<T> line(n), dline(n);
    for (int l = 0; l < line_count(g, axis); ++l) {
        if (g.dim == 1) {
            line = f.values;
        } else if (axis == 0) {
            const std::size_t base = static_cast<std::size_t>(l) * g.n[0];
            for (int i = 0; i < n; ++i) line[i] = f.values[base + i];
        } else {
            for (int i = 0; i < n; ++i) line[i] = f.values[g.index(l, i)];
        }
        fd4_derivative_line(line, dline, h, order);
        if (g.dim == 1) {
            out_values = dline;
        } else if (axis == 0) {
            const std::size_t base = static_cast<std::size_t>(l) * g.n[0];
            for (int i = 0; i < n; ++i) out_values[base + i] = dline[i];
        } else {
            for (int i = 0; i < n; ++i) out_values[g.index(l, i)] = dline[i];
        }
    }
}

template <class FieldT>
inline void check_axis(const FieldT& f, int axis) {
    if (axis < 0 || axis >= f.spec.dim)
        throw std::invalid_argument("derivative: axis out of range");
}

template <class FieldT>
inline void check_spectral(const FieldT& f) {
    for (int a = 0; a < f.spec.dim; ++a)
        if (!fft::is_power_of_two(static_cast<std::size_t>(f.spec.n[a])))
            throw std::invalid_argument(
                "derivative: spectral path requires power-of-two points per axis");
}

} // namespace detail

/// d(field)/d(axis). Spectral on periodic grids, 4th-order central
/// differences (one-sided at the edges) on dirichlet grids.
inline ComplexField gradient(const ComplexField& f, int axis) {
    detail::check_axis(f, axis);
    ComplexField out(f.spec);
    out.mass = f.mass;
    if (f.spec.boundary == Boundary::periodic) {
        detail::check_spectral(f);
        detail::spectral_derivative(f, axis, 1, out.values);
    } else {
        detail::fd4_derivative(f, axis, 1, out.values);
    }
    return out;
}

inline RealField gradient(const RealField& f, int axis) {
    detail::check_axis(f, axis);
    RealField out(f.spec);
    if (f.spec.boundary == Boundary::periodic) {
        detail::check_spectral(f);
        std::vector<cplx> tmp;
        detail::spectral_derivative(f, axis, 1, tmp);
        for (std::size_t i = 0; i < tmp.size(); ++i) out.values[i] = tmp[i].real();
    } else {
        detail::fd4_derivative(f, axis, 1, out.values);
    }
    return out;
}

namespace detail {

template <class FieldT>
inline FieldT laplacian_impl(const FieldT& f) {
    FieldT out(f.spec);
    using T = typename std::decay_t<decltype(f.values)>::value_type;
    if (f.spec.boundary == Boundary::periodic) {
        check_spectral(f);
        std::vector<cplx> tmp;
        for (int a = 0; a < f.spec.dim; ++a) {
            spectral_derivative(f, a, 2, tmp);
            for (std::size_t i = 0; i < tmp.size(); ++i) {
                if constexpr (std::is_same_v<T, double>)
                    out.values[i] += tmp[i].real();
                else
                    out.values[i] += tmp[i];
            }
        }
    } else {
        std::vector<T> tmp;
        for (int a = 0; a < f.spec.dim; ++a) {
            fd4_derivative(f, a, 2, tmp);
            for (std::size_t i = 0; i < tmp.size(); ++i) out.values[i] += tmp[i];
        }
    }
    return out;
}

} // namespace detail

/// Sum of second derivatives over all axes.
inline ComplexField laplacian(const ComplexField& f) {
    ComplexField out = detail::laplacian_impl(f);
    out.mass = f.mass;
    return out;
}

inline RealField laplacian(const RealField& f) { return detail::laplacian_impl(f); }

// ---------------------------------------------------------------------------
// Interpolation: 4-point Lagrange per axis (bicubic tensor product in 2D).
// Exact on grid nodes and for polynomials up to cubic per axis.

namespace detail {

struct AxisStencil {
    int base;           // leftmost stencil node
    double w[4];        // value weights
    double dw[4];       // d/dx weights (already divided by h)
};

inline void lagrange_weights(double t, double w[4]) {
    w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
    w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
    w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
}

inline void lagrange_dweights(double t, double dw[4]) {
    dw[0] = -((t - 2.0) * (t - 3.0) + (t - 1.0) * (t - 3.0) + (t - 1.0) * (t - 2.0)) / 6.0;
    dw[1] = ((t - 2.0) * (t - 3.0) + t * (t - 3.0) + t * (t - 2.0)) / 2.0;
    dw[2] = -((t - 1.0) * (t - 3.0) + t * (t - 3.0) + t * (t - 1.0)) / 2.0;
    dw[3] = ((t - 1.0) * (t - 2.0) + t * (t - 1.0) + t * (t - 2.0)) / 6.0;
}

inline AxisStencil axis_stencil(const GridSpec& g, int axis, double x,
                                bool with_derivative) {
    const int n = g.n[axis];
    const double h = g.step(axis);
    AxisStencil st{};
    double t;
    if (g.boundary == Boundary::periodic) {
        double s = (x - g.lo[axis]) / h;
        s -= std::floor(s / n) * n;  // wrap into [0, n)
        if (s >= n) s -= n;
        int i0 = static_cast<int>(std::floor(s));
        if (i0 >= n) i0 = n - 1;
        st.base = i0 - 1;  // wrapped on access
        t = 1.0 + (s - i0);
    } else {
        const double s = (x - g.lo[axis]) / h;
        const double tol = 1e-12 * std::max(1.0, std::abs(s));
        if (s < -tol || s > (n - 1) + tol)
            throw std::out_of_range("interpolate: point outside dirichlet domain");
        const double sc = std::clamp(s, 0.0, static_cast<double>(n - 1));
        int b = static_cast<int>(std::floor(sc)) - 1;
        b = std::clamp(b, 0, n - 4);
        st.base = b;
        t = sc - b;
    }
    lagrange_weights(t, st.w);
    if (with_derivative) {
        lagrange_dweights(t, st.dw);
        for (double& d : st.dw) d /= h;
    }
    return st;
}

inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

template <class T>
inline T apply_stencil_1d(const GridSpec& g, const std::vector<T>& v,
                          const AxisStencil& sx, const double* wx) {
    T acc{};
    if (g.boundary == Boundary::periodic) {
        for (int j = 0; j < 4; ++j)
            acc += wx[j] * v[wrap_index(sx.base + j, g.n[0])];
    } else {
        for (int j = 0; j < 4; ++j) acc += wx[j] * v[sx.base + j];
    }
    return acc;
}

template <class T>
inline T apply_stencil_2d(const GridSpec& g, const std::vector<T>& v,
                          const AxisStencil& sx, const AxisStencil& sy,
                          const double* wx, const double* wy) {
    const int nx = g.n[0];
    const int ny = g.n[1];
    T acc{};
    if (g.boundary == Boundary::periodic) {
        for (int k = 0; k < 4; ++k) {
            const std::size_t row =
                static_cast<std::size_t>(wrap_index(sy.base + k, ny)) * nx;
            T rowacc{};
            for (int j = 0; j < 4; ++j)
                rowacc += wx[j] * v[row + wrap_index(sx.base + j, nx)];
            acc += wy[k] * rowacc;
        }
    } else {
        for (int k = 0; k < 4; ++k) {
            const std::size_t row = static_cast<std::size_t>(sy.base + k) * nx;
            T rowacc{};
            for (int j = 0; j < 4; ++j) rowacc += wx[j] * v[row + sx.base + j];
            acc += wy[k] * rowacc;
        }
    }
    return acc;
}

template <class T>
inline T interpolate_impl(const GridSpec& g, const std::vector<T>& v, double x,
                          double y) {
    if (g.dim == 1) {
        const AxisStencil sx = axis_stencil(g, 0, x, false);
        return apply_stencil_1d(g, v, sx, sx.w);
    }
    const AxisStencil sx = axis_stencil(g, 0, x, false);
    const AxisStencil sy = axis_stencil(g, 1, y, false);
    return apply_stencil_2d(g, v, sx, sy, sx.w, sy.w);
}

} // namespace detail

/// Cubic (1D) / bicubic (2D) interpolation; exact at grid nodes.
inline double interpolate(const RealField& f, double x, double y = 0.0) {
    return detail::interpolate_impl(f.spec, f.values, x, y);
}

inline cplx interpolate(const ComplexField& f, double x, double y = 0.0) {
    return detail::interpolate_impl(f.spec, f.values, x, y);
}

/// Interpolated value together with the gradient of the interpolant.
struct InterpSample {
    cplx value;
    std::array<cplx, 2> grad{};
};

inline InterpSample interpolate_with_gradient(const GridSpec& g,
                                              const std::vector<cplx>& v,
                                              double x, double y = 0.0) {
    InterpSample out;
    if (g.dim == 1) {
        const auto sx = detail::axis_stencil(g, 0, x, true);
        out.value = detail::apply_stencil_1d(g, v, sx, sx.w);
        out.grad[0] = detail::apply_stencil_1d(g, v, sx, sx.dw);
        return out;
    }
    const auto sx = detail::axis_stencil(g, 0, x, true);
    const auto sy = detail::axis_stencil(g, 1, y, true);
    out.value = detail::apply_stencil_2d(g, v, sx, sy, sx.w, sy.w);
    out.grad[0] = detail::apply_stencil_2d(g, v, sx, sy, sx.dw, sy.w);
    out.grad[1] = detail::apply_stencil_2d(g, v, sx, sy, sx.w, sy.dw);
    return out;
}

inline InterpSample interpolate_with_gradient(const ComplexField& f, double x,
                                              double y = 0.0) {
    return interpolate_with_gradient(f.spec, f.values, x, y);
}

} // namespace qbohm

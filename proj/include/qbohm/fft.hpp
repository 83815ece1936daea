#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qbohm::fft {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Twiddle table for a given size and direction, rebuilt on size change.
// sign = -1 forward, +1 inverse.
inline void fill_twiddles(std::vector<cplx>& w, std::size_t n, int sign) {
    w.resize(n / 2);
    const double base = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k)
        w[k] = std::polar(1.0, base * static_cast<double>(k));
}

} // namespace detail

/// In-place iterative radix-2 transform. Forward (sign=-1) is unnormalized;
/// inverse (sign=+1) divides by n, so inverse(forward(x)) == x.
inline void transform(std::span<cplx> data, int sign) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n))
        throw std::invalid_argument("fft: length must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    static thread_local std::vector<cplx> table;
    static thread_local std::size_t table_n = 0;
    static thread_local int table_sign = 0;
    if (table_n != n || table_sign != sign) {
        detail::fill_twiddles(table, n, sign);
        table_n = n;
        table_sign = sign;
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx w = table[k * step];
                const cplx u = data[i + k];
                const cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
            }
        }
    }

    if (sign > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : data) x *= inv;
    }
}

inline void forward(std::span<cplx> data) { transform(data, -1); }
inline void inverse(std::span<cplx> data) { transform(data, +1); }

/// Angular wavenumber for mode index j on a periodic domain of length L,
/// in the standard FFT ordering (negative frequencies in the upper half).
inline double wavenumber(std::size_t j, std::size_t n, double length) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    const auto jj = static_cast<long long>(j);
    const auto nn = static_cast<long long>(n);
    const long long m = (jj < nn / 2) ? jj : jj - nn;
    return two_pi * static_cast<double>(m) / length;
}

} // namespace qbohm::fft

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qbohm::bessel {

// Integer-order Bessel functions of the first (J) and second (Y) kind.
// Ascending series below the crossover, Hankel asymptotic expansions above,
// Miller downward recurrence for J_n at small x, stable upward recurrence
// for Y_n. Absolute error below 1e-10 for x <= 50, n <= 10.

namespace detail {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double series_cut = 12.0;

// J_n by ascending series: sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)
inline double jn_series(int n, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int i = 1; i <= n; ++i) term *= half / i;  // (x/2)^n / n!
    double sum = term;
    const double q = half * half;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

// digamma at positive integers: psi(1) = -gamma, psi(m) = -gamma + H_{m-1}
inline double psi_int(int m) {
    double h = 0.0;
    for (int j = 1; j < m; ++j) h += 1.0 / j;
    return -euler_gamma + h;
}

// Y_n (n = 0 or 1) by the ascending series with the log term.
inline double yn_series(int n, double x) {
    const double half = 0.5 * x;
    const double q = half * half;
    double result = 2.0 / pi * std::log(half) * jn_series(n, x);
    if (n == 1) result -= (1.0 / pi) * (2.0 / x);  // finite sum, single term
    // -(1/pi) sum_k (-1)^k [psi(k+1)+psi(n+k+1)] (x/2)^{2k+n} / (k!(n+k)!)
    double pow_term = 1.0;
    for (int i = 1; i <= n; ++i) pow_term *= half / i;
    double hk = 0.0;            // H_k
    double hnk = 0.0;           // H_{n+k}
    for (int j = 1; j <= n; ++j) hnk += 1.0 / j;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double psi_sum = (-euler_gamma + hk) + (-euler_gamma + hnk);
        const double term = sign * psi_sum * pow_term;
        sum += term;
        sign = -sign;
        pow_term *= q / (static_cast<double>(k + 1) * (k + 1 + n));
        hk += 1.0 / (k + 1);
        hnk += 1.0 / (n + k + 1);
        if (std::abs(pow_term) * (std::abs(psi_sum) + 2.0) <
            1e-18 * (std::abs(sum) + 1e-300) && k > 3)
            break;
    }
    result -= sum / pi;
    return result;
}

// Hankel asymptotic P/Q series for order n in {0, 1}.
inline void hankel_pq(int n, double x, double& p, double& q) {
    const double mu = 4.0 * n * n;
    p = 1.0;
    q = 0.0;
    double a = 1.0;  // running a_j = prod (mu - (2i-1)^2) / (j! (8x)^j)
    double prev = 1e300;
    for (int j = 1; j < 40; ++j) {
        const double odd = 2.0 * j - 1.0;
        a *= (mu - odd * odd) / (8.0 * j * x);
        if (std::abs(a) > prev) break;  // asymptotic series started diverging
        prev = std::abs(a);
        const int m = j % 4;
        if (m == 1) q += a;
        else if (m == 2) p -= a;
        else if (m == 3) q -= a;
        else p += a;
        if (std::abs(a) < 1e-17) break;
    }
}

inline void jy01_asymptotic(int n, double x, double& j, double& y) {
    double p, q;
    hankel_pq(n, x, p, q);
    const double chi = x - (2 * n + 1) * pi / 4.0;
    const double amp = std::sqrt(2.0 / (pi * x));
    j = amp * (p * std::cos(chi) - q * std::sin(chi));
    y = amp * (p * std::sin(chi) + q * std::cos(chi));
}

} // namespace detail

inline double j0(double x) {
    x = std::abs(x);
    if (x <= detail::series_cut) return detail::jn_series(0, x);
    double j, y;
    detail::jy01_asymptotic(0, x, j, y);
    return j;
}

inline double j1(double x) {
    const double sign = x < 0 ? -1.0 : 1.0;
    x = std::abs(x);
    if (x <= detail::series_cut) return sign * detail::jn_series(1, x);
    double j, y;
    detail::jy01_asymptotic(1, x, j, y);
    return sign * j;
}

inline double y0(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel::y0 requires x > 0");
    if (x <= detail::series_cut) return detail::yn_series(0, x);
    double j, y;
    detail::jy01_asymptotic(0, x, j, y);
    return y;
}

inline double y1(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel::y1 requires x > 0");
    if (x <= detail::series_cut) return detail::yn_series(1, x);
    double j, y;
    detail::jy01_asymptotic(1, x, j, y);
    return y;
}

/// J_n for integer n >= 0, x >= 0. Upward recurrence where stable (n < x),
/// Miller downward recurrence otherwise.
inline double jn(int n, double x) {
    if (n < 0) throw std::domain_error("bessel::jn requires n >= 0");
    if (x < 0.0) throw std::domain_error("bessel::jn requires x >= 0");
    if (n == 0) return j0(x);
    if (n == 1) return j1(x);
    if (x == 0.0) return 0.0;

    if (x > static_cast<double>(n)) {
        double jm = j0(x), jc = j1(x);
        for (int k = 1; k < n; ++k) {
            const double jp = 2.0 * k / x * jc - jm;
            jm = jc;
            jc = jp;
        }
        return jc;
    }

    // Miller's algorithm: run the recurrence downward from well above n and
    // normalize with 1 = J0 + 2 J2 + 2 J4 + ...
    const int start = 2 * ((n + static_cast<int>(std::sqrt(160.0 * n))) / 2) + 16;
    double jp = 0.0, jc = 1e-30, target = 0.0, sum = 0.0;
    for (int k = start; k > 0; --k) {
        const double jm = 2.0 * k / x * jc - jp;
        jp = jc;
        jc = jm;
        if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
            jc *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            target *= 1e-250;
        }
        if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * jc;
        if (k - 1 == n) target = jc;
    }
    sum += jc;  // adds J0 estimate
    return target / sum;
}

/// Y_n for integer n >= 0, x > 0 (upward recurrence is stable for Y).
inline double yn(int n, double x) {
    if (n < 0) throw std::domain_error("bessel::yn requires n >= 0");
    if (!(x > 0.0)) throw std::domain_error("bessel::yn requires x > 0");
    if (n == 0) return y0(x);
    if (n == 1) return y1(x);
    double ym = y0(x), yc = y1(x);
    for (int k = 1; k < n; ++k) {
        const double yp = 2.0 * k / x * yc - ym;
        ym = yc;
        yc = yp;
    }
    return yc;
}

/// Paired evaluation (J_n(x), Y_n(x)).
inline std::pair<double, double> jy(int n, double x) {
    return {jn(n, x), yn(n, x)};
}

} // namespace qbohm::bessel

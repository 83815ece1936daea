#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbohm/bessel.hpp"
#include "qbohm/trajectories.hpp"

namespace qbohm::rankine {

/// Quantum Rankine vortex parameters. The charge convention is e = 1 and B0
/// is derived from the phase-continuity constraint N' = -e B0 xi0^2 / 2 = N,
/// so the core and the outer point-vortex flow join continuously at xi0.
struct RankineParams {
    int N = 1;             // winding
    double eps = 3.0;      // normalized energy, eps = 2 m E xi0^2
    double xi0 = 1.0;      // core radius
    double mass = 1.0;
    double charge = 1.0;   // e

    double B0() const { return -2.0 * N / (charge * xi0 * xi0); }
    double omega() const { return -charge * B0() / (2.0 * mass); }  // rigid-core rate
    double energy() const { return eps / (2.0 * mass * xi0 * xi0); }

    void validate() const {
        if (!(eps > 0.0))
            throw std::invalid_argument("RankineParams: eps must be > 0 "
                                        "(no convergent radial solution otherwise)");
        if (!(xi0 > 0.0)) throw std::invalid_argument("RankineParams: xi0 must be > 0");
        if (!(mass > 0.0)) throw std::invalid_argument("RankineParams: mass must be > 0");
        if (N == 0) throw std::invalid_argument("RankineParams: winding N must be nonzero");
    }
};

struct RankineSolution {
    RankineParams params;
    double d_tau = 0.0;
    std::vector<double> tau;   // uniform grid from 0 to tau_max, tau = xi/xi0
    std::vector<double> G;     // radial profile, G(0) = 1
    std::vector<double> dG;    // dG/dtau
    // outer Bessel match (filled by match_bessel)
    double C1 = 0.0;
    double C2 = 0.0;
    double match_residual = -1.0;

    double curvature_origin() const {
        // series coefficient: G = 1 + (2N^2 - eps)/4 tau^2 + ...
        const double n2 = static_cast<double>(params.N) * params.N;
        return (2.0 * n2 - params.eps) / 2.0;  // G''(0)
    }
};

namespace detail {

// bracketed coefficient of eqn 0 = c(tau) G + G'/tau + G''; continuous and
// C^1 across tau = 1
inline double radial_coefficient(const RankineParams& p, double tau) {
    const double n2 = static_cast<double>(p.N) * p.N;
    if (tau <= 1.0) return p.eps + n2 * (tau * tau - 2.0);
    return p.eps - n2 / (tau * tau);
}

} // namespace detail

/// RK4 integration of the radial equation as a first-order system. The 1/tau
/// term forbids starting at tau = 0; the first node is seeded with the
/// regular origin expansion G = 1 + a tau^2 + b tau^4 (a = (2N^2-eps)/4).
/// The Heaviside switch lands exactly on a grid point (d_tau divides 1).
inline RankineSolution solve_radial(const RankineParams& params, double tau_max,
                                    double d_tau) {
    params.validate();
    if (!(d_tau > 0.0) || d_tau > 1e-3 + 1e-15)
        throw std::invalid_argument("solve_radial: require 0 < d_tau <= 1e-3");
    if (tau_max < 5.0) throw std::invalid_argument("solve_radial: require tau_max >= 5");
    const double per_unit = 1.0 / d_tau;
    if (std::abs(per_unit - std::llround(per_unit)) > 1e-9)
        throw std::invalid_argument("solve_radial: d_tau must divide 1 exactly");

    const int m = static_cast<int>(std::llround(tau_max / d_tau));
    RankineSolution sol;
    sol.params = params;
    sol.d_tau = d_tau;
    sol.tau.resize(m + 1);
    sol.G.resize(m + 1);
    sol.dG.resize(m + 1);
    for (int j = 0; j <= m; ++j) sol.tau[j] = j * d_tau;

    const double n2 = static_cast<double>(params.N) * params.N;
    const double a = (2.0 * n2 - params.eps) / 4.0;
    const double b = (std::pow(params.eps - 2.0 * n2, 2) / 4.0 - n2) / 16.0;

    sol.G[0] = 1.0;
    sol.dG[0] = 0.0;
    const double h = d_tau;
    sol.G[1] = 1.0 + a * h * h + b * h * h * h * h;
    sol.dG[1] = 2.0 * a * h + 4.0 * b * h * h * h;

    auto rhs = [&](double tau, double g, double dg, double& out_dg, double& out_ddg) {
        out_dg = dg;
        out_ddg = -detail::radial_coefficient(params, tau) * g - dg / tau;
    };

    double g = sol.G[1], dg = sol.dG[1];
    for (int j = 1; j < m; ++j) {
        const double tau = sol.tau[j];
        double k1g, k1d, k2g, k2d, k3g, k3d, k4g, k4d;
        rhs(tau, g, dg, k1g, k1d);
        rhs(tau + 0.5 * h, g + 0.5 * h * k1g, dg + 0.5 * h * k1d, k2g, k2d);
        rhs(tau + 0.5 * h, g + 0.5 * h * k2g, dg + 0.5 * h * k2d, k3g, k3d);
        rhs(tau + h, g + h * k3g, dg + h * k3d, k4g, k4d);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        dg += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        sol.G[j + 1] = g;
        sol.dG[j + 1] = dg;
    }
    return sol;
}

struct BesselMatch {
    double C1 = 0.0;
    double C2 = 0.0;
    double residual = 0.0;
};

/// Least-squares fit of the solved profile against
/// C1 J_N(sqrt(eps) tau) + C2 Y_N(sqrt(eps) tau) on tau in [fit_lo, tau_max];
/// outside the core the radial equation is exactly Bessel's equation.
inline BesselMatch match_bessel(RankineSolution& sol, double fit_lo = 2.0) {
    const double sq = std::sqrt(sol.params.eps);
    const int n = std::abs(sol.params.N);
    double sjj = 0.0, sjy = 0.0, syy = 0.0, sjg = 0.0, syg = 0.0;
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < sol.tau.size(); ++i) {
        if (sol.tau[i] < fit_lo) continue;
        window.push_back(i);
        const double jv = bessel::jn(n, sq * sol.tau[i]);
        const double yv = bessel::yn(n, sq * sol.tau[i]);
        sjj += jv * jv;
        sjy += jv * yv;
        syy += yv * yv;
        sjg += jv * sol.G[i];
        syg += yv * sol.G[i];
    }
    if (window.size() < 8)
        throw std::invalid_argument("match_bessel: fit window too small; integrate farther");
    const double det = sjj * syy - sjy * sjy;
    if (std::abs(det) < 1e-12 * std::max(1.0, sjj * syy))
        throw std::runtime_error("match_bessel: degenerate fit window");
    BesselMatch fit;
    fit.C1 = (syy * sjg - sjy * syg) / det;
    fit.C2 = (sjj * syg - sjy * sjg) / det;
    for (std::size_t i : window) {
        const double model = fit.C1 * bessel::jn(n, sq * sol.tau[i]) +
                             fit.C2 * bessel::yn(n, sq * sol.tau[i]);
        fit.residual = std::max(fit.residual, std::abs(sol.G[i] - model));
    }
    sol.C1 = fit.C1;
    sol.C2 = fit.C2;
    sol.match_residual = fit.residual;
    return fit;
}

/// Coreless (B0 = 0) reference profile: the pure Bessel vortex J_N(sqrt(eps) tau),
/// which vanishes on the axis for N > 0.
inline std::vector<double> ideal_bessel_profile(int N, double eps,
                                                const std::vector<double>& tau) {
    std::vector<double> g(tau.size());
    const double sq = std::sqrt(eps);
    for (std::size_t i = 0; i < tau.size(); ++i)
        g[i] = bessel::jn(std::abs(N), sq * tau[i]);
    return g;
}

/// Piecewise azimuthal speed: rigid rotation omega*xi inside the core,
/// point-vortex N/(m xi) outside; continuous at xi0.
inline double velocity_phi(const RankineParams& p, double xi) {
    if (xi <= p.xi0) return p.omega() * xi;
    return p.N / (p.mass * xi);
}

/// Vorticity of the piecewise flow: 2*omega inside, 0 outside.
inline double vorticity(const RankineParams& p, double xi) {
    return xi <= p.xi0 ? 2.0 * p.omega() : 0.0;
}

/// Quantum potential with the radial-Euler integration constant C = E:
/// (N^2/2m xi0^4)(xi^2 - 2 xi0^2) inside, -N^2/(2m xi^2) outside, plus E.
inline double quantum_potential_at(const RankineParams& p, double xi) {
    const double n2 = static_cast<double>(p.N) * p.N;
    const double E = p.energy();
    if (xi <= p.xi0)
        return n2 / (2.0 * p.mass * std::pow(p.xi0, 4)) * (xi * xi - 2.0 * p.xi0 * p.xi0) + E;
    return -n2 / (2.0 * p.mass * xi * xi) + E;
}

inline double quantum_potential_derivative(const RankineParams& p, double xi) {
    const double n2 = static_cast<double>(p.N) * p.N;
    if (xi <= p.xi0) return n2 * xi / (p.mass * std::pow(p.xi0, 4));
    return n2 / (p.mass * xi * xi * xi);
}

/// e V_eff = alpha dt beta = f(xi) dg/dt inside the core, zero outside.
inline double effective_potential_at(const RankineParams& p, double xi) {
    if (xi > p.xi0) return 0.0;
    const double f = -p.charge * p.B0() * xi * xi / 2.0 - p.N;
    const double dgdt = -p.omega();
    return f * dgdt;
}

/// Exact closed orbital period at radius xi: 2 pi / omega inside,
/// 2 pi m xi^2 / N outside (they agree at xi0).
inline double orbit_period(const RankineParams& p, double xi) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    if (xi <= p.xi0) return two_pi / p.omega();
    return two_pi * p.mass * xi * xi / p.N;
}

/// Analytic flow field of the vortex for the trajectories module.
inline traj::AnalyticField flow_field(const RankineParams& p) {
    traj::AnalyticField f;
    f.name = "rankine";
    f.dimension = 2;
    f.particle_mass = p.mass;
    f.velocity_fn = [p](const traj::Vec3& q, double) {
        const double xi2 = q[0] * q[0] + q[1] * q[1];
        if (xi2 == 0.0) return traj::Vec3{0.0, 0.0, 0.0};
        const double xi = std::sqrt(xi2);
        const double vphi = velocity_phi(p, xi);
        return traj::Vec3{-vphi * q[1] / xi, vphi * q[0] / xi, 0.0};
    };
    return f;
}

/// Fig. 2-style portrait: concentric circular orbits integrated with the
/// guided law. Starts are radii (placed on the +x axis); the stagnation
/// point xi = 0 is rejected.
inline traj::TrajectoryEnsemble trajectory_portrait(const RankineParams& p,
                                                    const std::vector<double>& start_radii,
                                                    double dt, int record_every = 1) {
    p.validate();
    std::vector<traj::Vec3> starts;
    double t_max = 0.0;
    for (double r : start_radii) {
        if (!(r > 0.0))
            throw std::invalid_argument("trajectory_portrait: start radius must be > 0 "
                                        "(xi = 0 is a stagnation point)");
        starts.push_back({r, 0.0, 0.0});
        t_max = std::max(t_max, orbit_period(p, r));
    }
    traj::IntegrateOptions opt;
    opt.t0 = 0.0;
    opt.t1 = t_max;
    opt.dt = dt;
    opt.record_every = record_every;
    return integrate_guided(flow_field(p), starts, opt);
}

/// Measured revolution period: integrates the orbit and interpolates the
/// time at which the accumulated polar angle reaches 2 pi.
inline double measure_orbit_period(const RankineParams& p, double xi, double dt) {
    const traj::AnalyticField f = flow_field(p);
    const double expected = orbit_period(p, xi);
    traj::Vec3 q{xi, 0.0, 0.0};
    double angle = 0.0;
    double t = 0.0;
    double prev_angle = 0.0;
    const double two_pi = 2.0 * 3.14159265358979323846;
    const int max_steps = static_cast<int>(2.5 * expected / dt) + 10;
    for (int s = 0; s < max_steps; ++s) {
        const auto k1 = f.velocity(q, t);
        traj::Vec3 q2{q[0] + 0.5 * dt * k1[0], q[1] + 0.5 * dt * k1[1], 0.0};
        const auto k2 = f.velocity(q2, t + 0.5 * dt);
        traj::Vec3 q3{q[0] + 0.5 * dt * k2[0], q[1] + 0.5 * dt * k2[1], 0.0};
        const auto k3 = f.velocity(q3, t + 0.5 * dt);
        traj::Vec3 q4{q[0] + dt * k3[0], q[1] + dt * k3[1], 0.0};
        const auto k4 = f.velocity(q4, t + dt);
        traj::Vec3 qn = q;
        for (int a = 0; a < 2; ++a)
            qn[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        prev_angle = angle;
        angle += madelung::wrap_phase(std::atan2(qn[1], qn[0]) - std::atan2(q[1], q[0]));
        q = qn;
        t += dt;
        if (angle >= two_pi) {
            // linear interpolation inside the crossing step
            const double frac = (two_pi - prev_angle) / (angle - prev_angle);
            return t - dt + frac * dt;
        }
    }
    throw std::runtime_error("measure_orbit_period: orbit did not close");
}

// ---- W transform -------------------------------------------------------------

/// Effective 1D barrier of the W equation: N^2 (2 - tau^2) inside,
/// (N^2 - 1/4)/tau^2 outside. The one-sided limits at tau = 1 differ by the
/// centrifugal 1/4; both are reported rather than smoothed.
inline double u_eff(int N, double tau) {
    const double n2 = static_cast<double>(N) * N;
    if (tau <= 1.0) return n2 * (2.0 - tau * tau);
    return (n2 - 0.25) / (tau * tau);
}

struct WTransform {
    std::vector<double> W;       // G sqrt(tau) on the solution grid
    std::vector<double> U;       // u_eff on the same grid (inner branch at tau = 1)
    double barrier_max = 0.0;    // 2 N^2, reached at tau = 0
    bool above_barrier = false;  // eps > 2 N^2
    double u_at_one_inner = 0.0;
    double u_at_one_outer = 0.0;
};

inline WTransform w_transform(const RankineSolution& sol) {
    WTransform wt;
    const int N = std::abs(sol.params.N);
    const double n2 = static_cast<double>(N) * N;
    wt.W.resize(sol.tau.size());
    wt.U.resize(sol.tau.size());
    for (std::size_t i = 0; i < sol.tau.size(); ++i) {
        wt.W[i] = sol.G[i] * std::sqrt(sol.tau[i]);
        wt.U[i] = sol.tau[i] > 0.0 ? u_eff(N, sol.tau[i]) : 2.0 * n2;
    }
    wt.barrier_max = 2.0 * n2;
    wt.above_barrier = sol.params.eps > 2.0 * n2;
    wt.u_at_one_inner = n2;           // N^2 (2 - 1)
    wt.u_at_one_outer = n2 - 0.25;
    return wt;
}

/// Finite-difference residual of 0 = [eps - U_eff] W + W'' over a window of
/// the solved grid. The transform is exact in the outer domain; the inner
/// branch of the barrier omits the 1/(4 tau^2) regularization, so callers
/// should pass a window with lo > 1.
inline double w_equation_residual(const RankineSolution& sol, const WTransform& wt,
                                  double lo, double hi) {
    const double h = sol.d_tau;
    double res = 0.0;
    for (std::size_t i = 1; i + 1 < sol.tau.size(); ++i) {
        if (sol.tau[i] < lo || sol.tau[i] > hi) continue;
        const double wpp = (wt.W[i + 1] - 2.0 * wt.W[i] + wt.W[i - 1]) / (h * h);
        res = std::max(res, std::abs((sol.params.eps - wt.U[i]) * wt.W[i] + wpp));
    }
    return res;
}

} // namespace qbohm::rankine

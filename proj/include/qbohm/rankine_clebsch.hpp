#pragma once

#include <cmath>
#include <vector>

#include "qbohm/clebsch.hpp"
#include "qbohm/fields.hpp"
#include "qbohm/rankine.hpp"

namespace qbohm::rankine {

/// Clebsch pair of the vortex core: alpha = -e B0 xi^2/2 - N, beta = phi +
/// g(t) with dg/dt = -omega (the advection constraint fixes the sign of g).
/// Valid inside the core; the exterior is irrotational with alpha = beta = 0.
inline clebsch::AnalyticPair clebsch_pair(const RankineParams& p) {
    clebsch::AnalyticPair pair;
    const double eB0 = p.charge * p.B0();
    const double omega = p.omega();
    const double N = p.N;
    pair.alpha = [eB0, N](double x, double y, double) {
        return -eB0 * (x * x + y * y) / 2.0 - N;
    };
    pair.grad_alpha = [eB0](double x, double y, double) {
        return clebsch::Vec2{-eB0 * x, -eB0 * y};
    };
    pair.dt_alpha = [](double, double, double) { return 0.0; };
    pair.beta = [omega](double x, double y, double t) {
        return std::atan2(y, x) - omega * t;
    };
    pair.grad_beta = [](double x, double y, double) {
        const double xi2 = x * x + y * y;
        return clebsch::Vec2{-y / xi2, x / xi2};
    };
    pair.dt_beta = [omega](double, double, double) { return -omega; };
    pair.beta_cyclic = true;
    const double xi0 = p.xi0;
    pair.domain = [xi0](double x, double y) { return x * x + y * y < xi0 * xi0; };
    return pair;
}

/// Wave-function phase of the vortex: S = N phi - E t.
inline clebsch::AnalyticScalar phase_scalar(const RankineParams& p) {
    clebsch::AnalyticScalar S;
    const double N = p.N;
    const double E = p.energy();
    S.value = [N, E](double x, double y, double t) {
        return N * std::atan2(y, x) - E * t;
    };
    S.grad = [N](double x, double y, double) {
        const double xi2 = x * x + y * y;
        return clebsch::Vec2{-N * y / xi2, N * x / xi2};
    };
    return S;
}

/// Residuals of the Clebsch consistency suite on the Rankine solution.
struct ClebschSuite {
    double advection_alpha = 0.0;
    double advection_beta = 0.0;
    double vorticity_identity = 0.0;
    double lorentz_force = 0.0;
    double maxwell_faraday = 0.0;   // dt B_eff + curl E_eff
    double maxwell_div_b = 0.0;     // d/dz of B_z (2D reduction)
    double gauge_constraint = 0.0;
    double gauge_velocity_dev = 0.0;
    double transport = 0.0;         // steady generalized-vorticity transport
};

/// Runs every Clebsch check of the quantum Rankine vortex. Grid residuals
/// exclude a stencil-width ring around the core boundary where the piecewise
/// fields have derivative jumps.
inline ClebschSuite clebsch_suite(const RankineParams& p, int grid_n = 256,
                                  double extent_factor = 3.0) {
    p.validate();
    ClebschSuite out;
    const clebsch::AnalyticPair pair = clebsch_pair(p);
    const traj::AnalyticField flow = flow_field(p);
    const double omega = p.omega();
    const double two_pi = 2.0 * fields::pi;

    // material invariance of alpha and beta along core orbits, one period
    {
        std::vector<traj::Vec3> probes;
        for (double frac : {0.25, 0.5, 0.75, 0.9}) {
            const double r = frac * p.xi0;
            probes.push_back({r, 0.0, 0.0});
            probes.push_back({-r / std::sqrt(2.0), r / std::sqrt(2.0), 0.0});
        }
        const double T = two_pi / omega;
        const auto res = clebsch::advection_residual(pair, flow, probes, T / 4096.0, T);
        out.advection_alpha = res.alpha;
        out.advection_beta = res.beta;
    }

    // grid fields of the piecewise flow
    const double ext = extent_factor * p.xi0;
    const GridSpec g = GridSpec::make_2d(-ext, ext, grid_n, -ext, ext, grid_n,
                                         Boundary::dirichlet);
    const double h = g.step(0);
    RealField vx(g), vy(g);
    for (int iy = 0; iy < g.n[1]; ++iy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
            const auto v = flow.velocity({g.coord(0, ix), g.coord(1, iy), 0.0}, 0.0);
            vx.at(ix, iy) = v[0];
            vy.at(ix, iy) = v[1];
        }
    const double ring_margin = 8.0 * h;
    const double xi0 = p.xi0;
    const clebsch::Region off_ring = [xi0, ring_margin](double x, double y) {
        return std::abs(std::sqrt(x * x + y * y) - xi0) > ring_margin;
    };

    // m curl v + eB = grad alpha x grad beta, with the pair's analytic
    // gradients inside the core and zero outside
    {
        const RealField curl = clebsch::curl_z(vx, vy);
        double worst = 0.0;
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const double x = g.coord(0, ix), y = g.coord(1, iy);
                if (!off_ring(x, y)) continue;
                double cross = 0.0;
                if (pair.in_domain(x, y)) {
                    const auto ga = pair.grad_alpha(x, y, 0.0);
                    const auto gb = pair.grad_beta(x, y, 0.0);
                    cross = ga[0] * gb[1] - ga[1] * gb[0];
                }
                const double resid = p.mass * curl.at(ix, iy) - cross;
                worst = std::max(worst, std::abs(resid));
            }
        out.vorticity_identity = worst;
    }

    // effective Lorentz force e(E_eff + v x B_eff) vanishes along the flow
    {
        double worst = 0.0;
        for (int k = 1; k <= 64; ++k) {
            const double xi = 0.97 * p.xi0 * k / 64.0;
            for (double ang : {0.1, 1.7, 3.9}) {
                const double x = xi * std::cos(ang), y = xi * std::sin(ang);
                const auto eff = clebsch::effective_fields_at(pair, x, y, 0.3);
                const auto v = flow.velocity({x, y, 0.0}, 0.3);
                const double fx = eff.eE[0] + v[1] * eff.eB;
                const double fy = eff.eE[1] - v[0] * eff.eB;
                worst = std::max(worst, std::hypot(fx, fy));
            }
        }
        out.lorentz_force = worst;
    }

    // first Maxwell group: dt B_eff = -curl E_eff and div B_eff = 0
    {
        RealField ex(g), ey(g);
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const double x = g.coord(0, ix), y = g.coord(1, iy);
                if (pair.in_domain(x, y)) {
                    const auto eff = clebsch::effective_fields_at(pair, x, y, 0.0);
                    ex.at(ix, iy) = eff.eE[0];
                    ey.at(ix, iy) = eff.eE[1];
                }
            }
        const RealField curl_e = clebsch::curl_z(ex, ey);
        double worst = 0.0;
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const double x = g.coord(0, ix), y = g.coord(1, iy);
                if (!off_ring(x, y)) continue;
                // B_eff is static for the Rankine pair, so dt B_eff = 0
                worst = std::max(worst, std::abs(curl_e.at(ix, iy)));
            }
        out.maxwell_faraday = worst;
        // 2D reduction: B_eff = B_z(x, y) z-hat, so div B = dz B_z = 0 identically
        out.maxwell_div_b = 0.0;
    }

    // gauge invariance of the generalized velocity for a verified triple
    {
        clebsch::GaugeTriple gt;
        gt.f.value = [](double, double b, double) { return std::sin(b); };
        gt.f.d_alpha = [](double, double, double) { return 0.0; };
        gt.f.d_beta = [](double, double b, double) { return std::cos(b); };
        gt.f.d_t = [](double, double, double) { return 0.0; };
        gt.g.value = [](double a, double b, double) { return a - std::cos(b); };
        gt.g.d_alpha = [](double, double, double) { return 1.0; };
        gt.g.d_beta = [](double, double b, double) { return std::sin(b); };
        gt.g.d_t = [](double, double, double) { return 0.0; };
        gt.h.value = [](double, double b, double) { return b; };
        gt.h.d_alpha = [](double, double, double) { return 0.0; };
        gt.h.d_beta = [](double, double, double) { return 1.0; };
        gt.h.d_t = [](double, double, double) { return 0.0; };

        const clebsch::AnalyticScalar S = phase_scalar(p);
        const double a_lo = -std::abs(static_cast<double>(p.N)) - 0.1;
        out.gauge_constraint =
            clebsch::gauge_constraint_residual(gt, a_lo, 0.1, 0.0, two_pi, 0.0);
        const auto gauged = clebsch::gauge_transform(S, pair, gt, a_lo, 0.1, 0.0,
                                                     two_pi, 0.0, 1e-8);
        clebsch::ExternalEM em = clebsch::no_em();
        double worst = 0.0;
        for (int k = 1; k <= 48; ++k) {
            const double xi = 0.95 * p.xi0 * k / 48.0;
            for (double ang : {0.4, 2.2, 5.1}) {
                const double x = xi * std::cos(ang), y = xi * std::sin(ang);
                const auto v0 =
                    clebsch::generalized_velocity_at(S, pair, em, p.mass, x, y, 0.2);
                const auto v1 = clebsch::generalized_velocity_at(
                    gauged.S, gauged.pair, em, p.mass, x, y, 0.2);
                worst = std::max(worst, std::hypot(v1[0] - v0[0], v1[1] - v0[1]));
            }
        }
        out.gauge_velocity_dev = worst;
    }

    // steady transport of the generalized vorticity
    {
        clebsch::FlowSnapshot snap;
        snap.t = 0.0;
        snap.vx = vx;
        snap.vy = vy;
        snap.w = clebsch::generalized_vorticity(vx, vy, p.mass);
        out.transport = clebsch::vorticity_transport_residual({snap}, off_ring);
    }
    return out;
}

} // namespace qbohm::rankine

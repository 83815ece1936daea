#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/grid_ops.hpp"
#include "qbohm/madelung.hpp"
#include "qbohm/trajectories.hpp"

namespace qbohm::clebsch {

using Vec2 = std::array<double, 2>;
using ScalarFn = std::function<double(double, double, double)>;   // (x, y, t)
using VectorFn = std::function<Vec2(double, double, double)>;

/// Clebsch pair as closed-form fields with analytic gradients and time
/// derivatives. Grid-backed pairs (2D only) are handled separately.
struct AnalyticPair {
    ScalarFn alpha, beta;
    VectorFn grad_alpha, grad_beta;
    ScalarFn dt_alpha, dt_beta;
    bool beta_cyclic = false;  // beta contains an angle: compare modulo 2 pi
    std::function<bool(double, double)> domain;  // validity region, optional

    bool in_domain(double x, double y) const { return domain ? domain(x, y) : true; }
};

inline AnalyticPair zero_pair() {
    AnalyticPair p;
    p.alpha = p.beta = p.dt_alpha = p.dt_beta =
        [](double, double, double) { return 0.0; };
    p.grad_alpha = p.grad_beta = [](double, double, double) { return Vec2{0.0, 0.0}; };
    return p;
}

struct GridPair {
    RealField alpha, beta;
    RealField dt_alpha, dt_beta;  // empty values => static pair
    bool beta_cyclic = false;
};

/// External electromagnetic potentials (zero by default).
struct ExternalEM {
    VectorFn A;        // vector potential
    ScalarFn V;        // scalar potential
    ScalarFn B_z;      // curl A, z component
    double charge = 1.0;

    Vec2 a_at(double x, double y, double t) const {
        return A ? A(x, y, t) : Vec2{0.0, 0.0};
    }
    double b_at(double x, double y, double t) const {
        return B_z ? B_z(x, y, t) : 0.0;
    }
};

inline ExternalEM no_em() { return {}; }

// ---- effective fields (Eq. Cleb8 analogs) ------------------------------------

struct EffectiveSample {
    Vec2 eA;      // -alpha grad beta
    double eV;    // alpha dt beta
    Vec2 eE;      // dt(alpha) grad beta - dt(beta) grad alpha
    double eB;    // -(dx alpha dy beta - dy alpha dx beta), z component in 2D
};

inline EffectiveSample effective_fields_at(const AnalyticPair& p, double x,
                                           double y, double t) {
    EffectiveSample s;
    const double a = p.alpha(x, y, t);
    const Vec2 ga = p.grad_alpha(x, y, t);
    const Vec2 gb = p.grad_beta(x, y, t);
    const double da = p.dt_alpha(x, y, t);
    const double db = p.dt_beta(x, y, t);
    s.eA = {-a * gb[0], -a * gb[1]};
    s.eV = a * db;
    s.eE = {da * gb[0] - db * ga[0], da * gb[1] - db * ga[1]};
    s.eB = -(ga[0] * gb[1] - ga[1] * gb[0]);
    return s;
}

struct EffectiveFieldsGrid {
    std::array<RealField, 2> eA;
    RealField eV;
    std::array<RealField, 2> eE;
    RealField eB;
};

/// Grid version of the effective fields. Time derivatives default to zero
/// for static pairs.
inline EffectiveFieldsGrid effective_fields(const GridPair& p) {
    const GridSpec& g = p.alpha.spec;
    if (g.dim != 2)
        throw std::invalid_argument("effective_fields: 2D grid pairs only");
    if (!p.beta.spec.same_grid(g))
        throw std::invalid_argument("effective_fields: alpha/beta grids differ");
    EffectiveFieldsGrid out;
    const RealField dax = gradient(p.alpha, 0), day = gradient(p.alpha, 1);
    const RealField dbx = gradient(p.beta, 0), dby = gradient(p.beta, 1);
    const bool has_dt = !p.dt_alpha.values.empty();
    out.eA = {RealField(g), RealField(g)};
    out.eE = {RealField(g), RealField(g)};
    out.eV = RealField(g);
    out.eB = RealField(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = p.alpha.values[i];
        const double da = has_dt ? p.dt_alpha.values[i] : 0.0;
        const double db = has_dt ? p.dt_beta.values[i] : 0.0;
        out.eA[0].values[i] = -a * dbx.values[i];
        out.eA[1].values[i] = -a * dby.values[i];
        out.eV.values[i] = a * db;
        out.eE[0].values[i] = da * dbx.values[i] - db * dax.values[i];
        out.eE[1].values[i] = da * dby.values[i] - db * day.values[i];
        out.eB.values[i] = -(dax.values[i] * dby.values[i] - day.values[i] * dbx.values[i]);
    }
    return out;
}

// ---- generalized guidance (Eq. Cleb3/Cleb9 analogs) ---------------------------

/// m v = grad S + alpha grad beta - e A on a grid. Empty pair/EM terms are
/// skipped entirely, so with alpha = beta = 0 the result is bit-compatible
/// with plain gradient guidance.
inline std::array<RealField, 2> generalized_velocity(
    const RealField& S, const GridPair* pair, const ExternalEM* em, double mass,
    double t = 0.0) {
    const GridSpec& g = S.spec;
    if (g.dim != 2)
        throw std::invalid_argument("generalized_velocity: 2D grids only");
    std::array<RealField, 2> v{gradient(S, 0), gradient(S, 1)};
    if (pair && !pair->alpha.values.empty()) {
        const RealField dbx = gradient(pair->beta, 0);
        const RealField dby = gradient(pair->beta, 1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            v[0].values[i] += pair->alpha.values[i] * dbx.values[i];
            v[1].values[i] += pair->alpha.values[i] * dby.values[i];
        }
    }
    if (em && em->A) {
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const Vec2 a = em->A(g.coord(0, ix), g.coord(1, iy), t);
                const std::size_t i = g.index(ix, iy);
                v[0].values[i] -= em->charge * a[0];
                v[1].values[i] -= em->charge * a[1];
            }
    }
    for (auto& comp : v)
        for (auto& x : comp.values) x /= mass;
    return v;
}

/// Analytic scalar with gradient, for pointwise generalized guidance.
struct AnalyticScalar {
    ScalarFn value;
    VectorFn grad;
};

inline AnalyticScalar zero_scalar() {
    AnalyticScalar s;
    s.value = [](double, double, double) { return 0.0; };
    s.grad = [](double, double, double) { return Vec2{0.0, 0.0}; };
    return s;
}

inline Vec2 generalized_velocity_at(const AnalyticScalar& S, const AnalyticPair& p,
                                    const ExternalEM& em, double mass, double x,
                                    double y, double t) {
    const Vec2 gs = S.grad(x, y, t);
    const Vec2 gb = p.grad_beta(x, y, t);
    const double a = p.alpha(x, y, t);
    const Vec2 ea = em.a_at(x, y, t);
    return {(gs[0] + a * gb[0] - em.charge * ea[0]) / mass,
            (gs[1] + a * gb[1] - em.charge * ea[1]) / mass};
}

/// Wraps generalized analytic guidance as a trajectory velocity field.
inline traj::AnalyticField generalized_flow(const AnalyticScalar& S,
                                            const AnalyticPair& p,
                                            const ExternalEM& em, double mass,
                                            const std::string& name = "clebsch-flow") {
    traj::AnalyticField f;
    f.name = name;
    f.dimension = 2;
    f.particle_mass = mass;
    f.velocity_fn = [S, p, em, mass](const traj::Vec3& q, double t) {
        const Vec2 v = generalized_velocity_at(S, p, em, mass, q[0], q[1], t);
        return traj::Vec3{v[0], v[1], 0.0};
    };
    if (p.domain)
        f.domain_fn = [p](const traj::Vec3& q) { return p.in_domain(q[0], q[1]); };
    return f;
}

// ---- residual diagnostics -----------------------------------------------------

using Region = std::function<bool(double, double)>;  // true = evaluate here

inline RealField curl_z(const RealField& vx, const RealField& vy) {
    RealField out = gradient(vy, 0);
    const RealField dvx_dy = gradient(vx, 1);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] -= dvx_dy.values[i];
    return out;
}

inline RealField divergence(const RealField& vx, const RealField& vy) {
    RealField out = gradient(vx, 0);
    const RealField dvy_dy = gradient(vy, 1);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += dvy_dy.values[i];
    return out;
}

namespace detail {

inline double region_max(const GridSpec& g, const std::vector<double>& vals,
                         const Region& region) {
    double m = 0.0;
    for (int iy = 0; iy < g.n[1]; ++iy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
            if (region && !region(g.coord(0, ix), g.coord(1, iy))) continue;
            m = std::max(m, std::abs(vals[g.index(ix, iy)]));
        }
    return m;
}

} // namespace detail

/// Vorticity identity m curl v + e B = grad alpha x grad beta (z component):
/// returns the max-norm residual over the evaluation region.
inline double vorticity_residual(const RealField& vx, const RealField& vy,
                                 const GridPair& pair, const ExternalEM& em,
                                 double mass, const Region& region = {}) {
    const GridSpec& g = vx.spec;
    const RealField curl = curl_z(vx, vy);
    RealField resid(g);
    const bool has_pair = !pair.alpha.values.empty();
    RealField dax, day, dbx, dby;
    if (has_pair) {
        dax = gradient(pair.alpha, 0);
        day = gradient(pair.alpha, 1);
        dbx = gradient(pair.beta, 0);
        dby = gradient(pair.beta, 1);
    }
    for (int iy = 0; iy < g.n[1]; ++iy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
            const std::size_t i = g.index(ix, iy);
            const double cross =
                has_pair ? dax.values[i] * dby.values[i] - day.values[i] * dbx.values[i]
                         : 0.0;
            const double eb =
                em.B_z ? em.charge * em.B_z(g.coord(0, ix), g.coord(1, iy), 0.0) : 0.0;
            resid.values[i] = mass * curl.values[i] + eb - cross;
        }
    return detail::region_max(g, resid.values, region);
}

struct AdvectionResiduals {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Advects probe trajectories along the flow and reports how much alpha and
/// beta change along them (both should be material invariants). Cyclic beta
/// is compared modulo 2 pi.
inline AdvectionResiduals advection_residual(const AnalyticPair& pair,
                                             const traj::VelocityField& flow,
                                             const std::vector<traj::Vec3>& probes,
                                             double dt, double T) {
    traj::IntegrateOptions opt;
    opt.t0 = 0.0;
    opt.t1 = T;
    opt.dt = dt;
    opt.record_every = std::max(1, static_cast<int>(std::llround(T / dt)));
    const traj::TrajectoryEnsemble ens = integrate_guided(flow, probes, opt);
    AdvectionResiduals out;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& q0 = ens.positions[i].front();
        const auto& q1 = ens.positions[i].back();
        if (!pair.in_domain(q0[0], q0[1]) || !pair.in_domain(q1[0], q1[1]))
            throw std::runtime_error("advection_residual: probe " + std::to_string(i) +
                                     " exits the pair domain");
        const double da =
            pair.alpha(q1[0], q1[1], ens.times.back()) - pair.alpha(q0[0], q0[1], 0.0);
        double db =
            pair.beta(q1[0], q1[1], ens.times.back()) - pair.beta(q0[0], q0[1], 0.0);
        if (pair.beta_cyclic) db = madelung::wrap_phase(db);
        out.alpha = std::max(out.alpha, std::abs(da));
        out.beta = std::max(out.beta, std::abs(db));
    }
    return out;
}

// ---- gauge freedom -------------------------------------------------------------

/// One component of a gauge triple: a function of (alpha, beta, t) with
/// optional analytic partials (finite differences otherwise).
struct GaugeFn {
    std::function<double(double, double, double)> value;
    std::function<double(double, double, double)> d_alpha;
    std::function<double(double, double, double)> d_beta;
    std::function<double(double, double, double)> d_t;

    double da(double a, double b, double t) const {
        if (d_alpha) return d_alpha(a, b, t);
        const double h = 1e-5 * std::max(1.0, std::abs(a));
        return (value(a + h, b, t) - value(a - h, b, t)) / (2.0 * h);
    }
    double db(double a, double b, double t) const {
        if (d_beta) return d_beta(a, b, t);
        const double h = 1e-5 * std::max(1.0, std::abs(b));
        return (value(a, b + h, t) - value(a, b - h, t)) / (2.0 * h);
    }
    double dt(double a, double b, double t) const {
        if (d_t) return d_t(a, b, t);
        const double h = 1e-5 * std::max(1.0, std::abs(t));
        return (value(a, b, t + h) - value(a, b, t - h)) / (2.0 * h);
    }
};

struct GaugeTriple {
    GaugeFn f, g, h;
};

/// Max violation of the two gauge constraints
///   df/dbeta + g dh/dbeta = alpha,   df/dalpha + g dh/dalpha = 0
/// sampled on an n x n lattice of (alpha, beta) values.
inline double gauge_constraint_residual(const GaugeTriple& gt, double a_lo,
                                        double a_hi, double b_lo, double b_hi,
                                        double t, int n = 32) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = a_lo + (a_hi - a_lo) * (i + 0.5) / n;
            const double b = b_lo + (b_hi - b_lo) * (j + 0.5) / n;
            const double gv = gt.g.value(a, b, t);
            const double c1 = gt.f.db(a, b, t) + gv * gt.h.db(a, b, t) - a;
            const double c2 = gt.f.da(a, b, t) + gv * gt.h.da(a, b, t);
            worst = std::max(worst, std::max(std::abs(c1), std::abs(c2)));
        }
    return worst;
}

struct GaugeResult {
    AnalyticScalar S;
    AnalyticPair pair;
    double constraint_residual = 0.0;
};

/// S' = S + f(alpha, beta, t), alpha' = g, beta' = h. The gauge triple is
/// validated on a 32x32 (alpha, beta) lattice before the transform is
/// accepted; violations beyond tol are rejected.
inline GaugeResult gauge_transform(const AnalyticScalar& S, const AnalyticPair& p,
                                   const GaugeTriple& gt, double a_lo, double a_hi,
                                   double b_lo, double b_hi, double t_check = 0.0,
                                   double tol = 1e-8) {
    GaugeResult out;
    out.constraint_residual =
        gauge_constraint_residual(gt, a_lo, a_hi, b_lo, b_hi, t_check);
    if (out.constraint_residual > tol)
        throw std::invalid_argument("gauge_transform: constraint violation " +
                                    std::to_string(out.constraint_residual));

    const AnalyticPair base = p;
    const AnalyticScalar baseS = S;
    const GaugeFn f = gt.f, g = gt.g, h = gt.h;

    out.S.value = [baseS, base, f](double x, double y, double t) {
        return baseS.value(x, y, t) + f.value(base.alpha(x, y, t), base.beta(x, y, t), t);
    };
    out.S.grad = [baseS, base, f](double x, double y, double t) {
        const double a = base.alpha(x, y, t), b = base.beta(x, y, t);
        const Vec2 ga = base.grad_alpha(x, y, t), gb = base.grad_beta(x, y, t);
        const Vec2 gs = baseS.grad(x, y, t);
        const double fa = f.da(a, b, t), fb = f.db(a, b, t);
        return Vec2{gs[0] + fa * ga[0] + fb * gb[0], gs[1] + fa * ga[1] + fb * gb[1]};
    };

    out.pair.beta_cyclic = p.beta_cyclic;
    out.pair.domain = p.domain;
    out.pair.alpha = [base, g](double x, double y, double t) {
        return g.value(base.alpha(x, y, t), base.beta(x, y, t), t);
    };
    out.pair.beta = [base, h](double x, double y, double t) {
        return h.value(base.alpha(x, y, t), base.beta(x, y, t), t);
    };
    out.pair.grad_alpha = [base, g](double x, double y, double t) {
        const double a = base.alpha(x, y, t), b = base.beta(x, y, t);
        const Vec2 ga = base.grad_alpha(x, y, t), gb = base.grad_beta(x, y, t);
        const double gda = g.da(a, b, t), gdb = g.db(a, b, t);
        return Vec2{gda * ga[0] + gdb * gb[0], gda * ga[1] + gdb * gb[1]};
    };
    out.pair.grad_beta = [base, h](double x, double y, double t) {
        const double a = base.alpha(x, y, t), b = base.beta(x, y, t);
        const Vec2 ga = base.grad_alpha(x, y, t), gb = base.grad_beta(x, y, t);
        const double hda = h.da(a, b, t), hdb = h.db(a, b, t);
        return Vec2{hda * ga[0] + hdb * gb[0], hda * ga[1] + hdb * gb[1]};
    };
    out.pair.dt_alpha = [base, g](double x, double y, double t) {
        const double a = base.alpha(x, y, t), b = base.beta(x, y, t);
        return g.da(a, b, t) * base.dt_alpha(x, y, t) +
               g.db(a, b, t) * base.dt_beta(x, y, t) + g.dt(a, b, t);
    };
    out.pair.dt_beta = [base, h](double x, double y, double t) {
        const double a = base.alpha(x, y, t), b = base.beta(x, y, t);
        return h.da(a, b, t) * base.dt_alpha(x, y, t) +
               h.db(a, b, t) * base.dt_beta(x, y, t) + h.dt(a, b, t);
    };
    return out;
}

// ---- vorticity transport --------------------------------------------------------

struct FlowSnapshot {
    double t = 0.0;
    RealField vx, vy;
    RealField w;  // generalized vorticity m Omega_z + e B_z
};

inline RealField generalized_vorticity(const RealField& vx, const RealField& vy,
                                       double mass, const RealField* eB = nullptr) {
    RealField w = curl_z(vx, vy);
    for (auto& v : w.values) v *= mass;
    if (eB)
        for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] += eB->values[i];
    return w;
}

/// Residual of the transport law d_t W = -div(v W) for the generalized
/// vorticity W = m Omega + e B (the 2D reduction of the curl form). A single
/// snapshot is treated as steady (d_t W = 0).
inline double vorticity_transport_residual(const std::vector<FlowSnapshot>& snaps,
                                           const Region& region = {}) {
    if (snaps.empty())
        throw std::invalid_argument("vorticity_transport_residual: no snapshots");
    const GridSpec& g = snaps.front().vx.spec;
    double worst = 0.0;
    auto flux_div = [&](const FlowSnapshot& s) {
        RealField fx(g), fy(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            fx.values[i] = s.vx.values[i] * s.w.values[i];
            fy.values[i] = s.vy.values[i] * s.w.values[i];
        }
        return divergence(fx, fy);
    };
    if (snaps.size() == 1) {
        const RealField d = flux_div(snaps.front());
        return detail::region_max(g, d.values, region);
    }
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        const double dt = snaps[k + 1].t - snaps[k].t;
        const RealField da = flux_div(snaps[k]);
        const RealField db = flux_div(snaps[k + 1]);
        RealField resid(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double wdot = (snaps[k + 1].w.values[i] - snaps[k].w.values[i]) / dt;
            resid.values[i] = wdot + 0.5 * (da.values[i] + db.values[i]);
        }
        worst = std::max(worst, detail::region_max(g, resid.values, region));
    }
    return worst;
}

} // namespace qbohm::clebsch

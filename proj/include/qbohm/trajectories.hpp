#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/grid_ops.hpp"
#include "qbohm/madelung.hpp"
#include "qbohm/parallel.hpp"

namespace qbohm::traj {

using Vec3 = std::array<double, 3>;

enum class Status { ok, node_captured, left_domain };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::ok: return "ok";
        case Status::node_captured: return "node-captured";
        case Status::left_domain: return "left-domain";
    }
    return "?";
}

/// Velocity source for guided integration: either a snapshot sequence with
/// space/time interpolation or a closed-form analytic field.
class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual int dim() const = 0;
    virtual Vec3 velocity(const Vec3& q, double t) const = 0;
    virtual bool node_at(const Vec3& q, double t) const { (void)q; (void)t; return false; }
    virtual bool in_domain(const Vec3& q) const { (void)q; return true; }
    virtual double mass() const = 0;
    virtual std::string describe() const = 0;
};

/// Closed-form velocity and/or force evaluators (name-tagged).
class AnalyticField : public VelocityField {
public:
    std::string name;
    int dimension = 2;
    double particle_mass = 1.0;
    std::function<Vec3(const Vec3&, double)> velocity_fn;
    std::function<Vec3(const Vec3&, double)> force_fn;       // for second-order law
    std::function<bool(const Vec3&)> node_fn;                // singular set, optional
    std::function<bool(const Vec3&)> domain_fn;              // declared domain, optional

    int dim() const override { return dimension; }
    double mass() const override { return particle_mass; }
    Vec3 velocity(const Vec3& q, double t) const override {
        if (!velocity_fn) throw std::logic_error("AnalyticField '" + name + "': no velocity");
        return velocity_fn(q, t);
    }
    Vec3 force(const Vec3& q, double t) const {
        if (!force_fn) throw std::logic_error("AnalyticField '" + name + "': no force");
        return force_fn(q, t);
    }
    bool node_at(const Vec3& q, double) const override {
        return node_fn ? node_fn(q) : false;
    }
    bool in_domain(const Vec3& q) const override {
        return domain_fn ? domain_fn(q) : true;
    }
    std::string describe() const override { return "analytic:" + name; }
};

// ---- stock analytic fields ------------------------------------------------

inline AnalyticField plane_wave_field(Vec3 k, double mass = 1.0, int dim = 1) {
    AnalyticField f;
    f.name = "plane-wave";
    f.dimension = dim;
    f.particle_mass = mass;
    f.velocity_fn = [k, mass](const Vec3&, double) {
        return Vec3{k[0] / mass, k[1] / mass, k[2] / mass};
    };
    f.force_fn = [](const Vec3&, double) { return Vec3{0.0, 0.0, 0.0}; };
    return f;
}

/// Hydrogen ground state R = e^{-r}, V = -1/r (natural units, m = 1).
/// V + V_Psi = -1/2 everywhere, so the guided electron is at rest and the
/// second-order law sees zero net force.
inline AnalyticField hydrogen_ground_state_field() {
    AnalyticField f;
    f.name = "hydrogen-ground-state";
    f.dimension = 3;
    f.particle_mass = 1.0;
    f.velocity_fn = [](const Vec3&, double) { return Vec3{0.0, 0.0, 0.0}; };
    f.force_fn = [](const Vec3& q, double) {
        const double r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        if (r2 == 0.0) return Vec3{0.0, 0.0, 0.0};
        const double r = std::sqrt(r2);
        const double dV = 1.0 / r2;    // d/dr of -1/r
        const double dVQ = -1.0 / r2;  // d/dr of (-1/2 + 1/r)
        const double radial = -(dV + dVQ);  // exactly zero
        return Vec3{radial * q[0] / r, radial * q[1] / r, radial * q[2] / r};
    };
    f.node_fn = [](const Vec3&) { return false; };
    return f;
}

/// Single 2D vortex psi = (x+iy)^w e^{-xi^2/2}: azimuthal speed w/(m xi).
inline AnalyticField vortex2d_field(int winding = 1, double mass = 1.0) {
    AnalyticField f;
    f.name = "vortex2d";
    f.dimension = 2;
    f.particle_mass = mass;
    const double w = winding;
    f.velocity_fn = [w, mass](const Vec3& q, double) {
        const double xi2 = q[0] * q[0] + q[1] * q[1];
        const double c = w / (mass * xi2);
        return Vec3{-c * q[1], c * q[0], 0.0};
    };
    f.node_fn = [](const Vec3& q) {
        return q[0] * q[0] + q[1] * q[1] < 1e-24;
    };
    return f;
}

inline AnalyticField custom_field(std::string name, int dim, double mass,
                                  std::function<Vec3(const Vec3&, double)> v,
                                  std::function<Vec3(const Vec3&, double)> force = {}) {
    AnalyticField f;
    f.name = std::move(name);
    f.dimension = dim;
    f.particle_mass = mass;
    f.velocity_fn = std::move(v);
    f.force_fn = std::move(force);
    return f;
}

// ---- snapshot-backed velocity ----------------------------------------------

/// Velocity field from a sequence of wave-function snapshots: bicubic space
/// interpolation of psi and its gradient per bracketing snapshot, linear
/// time interpolation of the two velocities.
class SnapshotField : public VelocityField {
public:
    SnapshotField(std::vector<ComplexField> snapshots, std::vector<double> times)
        : snaps_(std::move(snapshots)), times_(std::move(times)) {
        if (snaps_.size() != times_.size() || snaps_.empty())
            throw std::invalid_argument("SnapshotField: snapshot/time mismatch");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1]))
                throw std::invalid_argument("SnapshotField: times must increase");
        for (const auto& s : snaps_) {
            RealField R(s.spec);
            for (std::size_t i = 0; i < s.values.size(); ++i)
                R.values[i] = std::abs(s.values[i]);
            capture_thr_.push_back(madelung::node_threshold_scale * max_abs(R));
        }
    }

    int dim() const override { return snaps_.front().spec.dim; }
    double mass() const override { return snaps_.front().mass; }
    std::string describe() const override {
        return "snapshots[" + std::to_string(snaps_.size()) + "]";
    }

    double max_stride() const {
        double s = 0.0;
        for (std::size_t i = 1; i < times_.size(); ++i)
            s = std::max(s, times_[i] - times_[i - 1]);
        return s;
    }

    const GridSpec& grid() const { return snaps_.front().spec; }
    const ComplexField& snapshot(std::size_t i) const { return snaps_[i]; }
    const std::vector<double>& snapshot_times() const { return times_; }

    /// Index of the stored snapshot closest to t.
    std::size_t nearest_snapshot(double t) const {
        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        if (it == times_.end()) return times_.size() - 1;
        std::size_t k = static_cast<std::size_t>(it - times_.begin());
        if (k > 0 && t - times_[k - 1] < times_[k] - t) --k;
        return k;
    }

    Vec3 velocity(const Vec3& q, double t) const override {
        const auto [ia, ib, w] = bracket(t);
        const Vec3 va = slice_velocity(ia, q);
        if (ib == ia) return va;
        const Vec3 vb = slice_velocity(ib, q);
        return Vec3{(1.0 - w) * va[0] + w * vb[0], (1.0 - w) * va[1] + w * vb[1], 0.0};
    }

    bool node_at(const Vec3& q, double t) const override {
        const auto [ia, ib, w] = bracket(t);
        (void)ib; (void)w;
        const auto s = interpolate_with_gradient(snaps_[ia], q[0], q[1]);
        return std::abs(s.value) < capture_thr_[ia];
    }

    bool in_domain(const Vec3& q) const override {
        const GridSpec& g = grid();
        if (g.boundary == Boundary::periodic) return true;
        for (int a = 0; a < g.dim; ++a)
            if (q[a] < g.lo[a] || q[a] > g.hi[a]) return false;
        return true;
    }

private:
    std::tuple<std::size_t, std::size_t, double> bracket(double t) const {
        if (t <= times_.front()) return {0, 0, 0.0};
        if (t >= times_.back()) return {times_.size() - 1, times_.size() - 1, 0.0};
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t ib = static_cast<std::size_t>(it - times_.begin());
        const std::size_t ia = ib - 1;
        const double w = (t - times_[ia]) / (times_[ib] - times_[ia]);
        return {ia, ib, w};
    }

    Vec3 slice_velocity(std::size_t i, const Vec3& q) const {
        const ComplexField& f = snaps_[i];
        const auto s = interpolate_with_gradient(f, q[0], q[1]);
        const double a2 = std::norm(s.value);
        if (a2 == 0.0) return Vec3{0.0, 0.0, 0.0};
        Vec3 v{0.0, 0.0, 0.0};
        for (int ax = 0; ax < f.spec.dim; ++ax)
            v[ax] = std::imag(s.grad[ax] / s.value) / f.mass;
        return v;
    }

    std::vector<ComplexField> snaps_;
    std::vector<double> times_;
    std::vector<double> capture_thr_;
};

// ---- ensembles --------------------------------------------------------------

struct TrajectoryEnsemble {
    std::vector<double> times;
    std::vector<std::vector<Vec3>> positions;  // [trajectory][time index]
    std::vector<Status> status;
    std::vector<double> stop_times;  // NaN while status == ok
    double mass = 1.0;
    int dim = 2;
    std::string integrator;  // "guided-RK4" | "newton-RK4"
    std::string source;

    std::size_t size() const { return positions.size(); }
    std::size_t captured_count() const {
        std::size_t n = 0;
        for (auto s : status)
            if (s == Status::node_captured) ++n;
        return n;
    }
    std::size_t captured_by(double t) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < status.size(); ++i)
            if (status[i] == Status::node_captured && stop_times[i] <= t) ++n;
        return n;
    }
};

struct IntegrateOptions {
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 1e-3;
    int record_every = 1;
    bool enforce_snapshot_stride = true;  // stride <= 5 dt for snapshot fields
};

namespace detail {

inline void wrap_position(const GridSpec& g, Vec3& q) {
    if (g.boundary != Boundary::periodic) return;
    for (int a = 0; a < g.dim; ++a) {
        const double L = g.length(a);
        q[a] -= std::floor((q[a] - g.lo[a]) / L) * L;
    }
}

} // namespace detail

/// Classical RK4 on dq/dt = v(q, t). Trajectories entering the node mask
/// stop with status node-captured; starts on a masked node are rejected.
inline TrajectoryEnsemble integrate_guided(const VelocityField& field,
                                           const std::vector<Vec3>& starts,
                                           const IntegrateOptions& opt) {
    if (!(opt.dt > 0.0)) throw std::invalid_argument("integrate_guided: dt must be > 0");
    const int n_steps = std::max(1, static_cast<int>(std::llround((opt.t1 - opt.t0) / opt.dt)));
    const auto* snap = dynamic_cast<const SnapshotField*>(&field);
    if (snap && opt.enforce_snapshot_stride && snap->max_stride() > 5.0 * opt.dt + 1e-12)
        throw std::invalid_argument(
            "integrate_guided: snapshot stride exceeds 5*dt; record more snapshots");

    for (std::size_t i = 0; i < starts.size(); ++i)
        if (field.node_at(starts[i], opt.t0))
            throw std::invalid_argument("integrate_guided: start " + std::to_string(i) +
                                        " lies on a masked node");

    TrajectoryEnsemble ens;
    ens.mass = field.mass();
    ens.dim = field.dim();
    ens.integrator = "guided-RK4";
    ens.source = field.describe();
    for (int s = 0; s <= n_steps; ++s)
        if (s % opt.record_every == 0 || s == n_steps)
            ens.times.push_back(opt.t0 + s * opt.dt);
    ens.positions.assign(starts.size(), {});
    ens.status.assign(starts.size(), Status::ok);
    ens.stop_times.assign(starts.size(), std::numeric_limits<double>::quiet_NaN());

    const GridSpec* g = snap ? &snap->grid() : nullptr;

    parallel_for(starts.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            Vec3 q = starts[i];
            auto& rec = ens.positions[i];
            rec.reserve(ens.times.size());
            Status st = Status::ok;
            auto record = [&](Vec3 p) {
                if (g) detail::wrap_position(*g, p);
                rec.push_back(p);
            };
            record(q);
            for (int s = 0; s < n_steps; ++s) {
                const double t = opt.t0 + s * opt.dt;
                if (st == Status::ok) {
                    const double h = opt.dt;
                    const Vec3 k1 = field.velocity(q, t);
                    Vec3 q2{q[0] + 0.5 * h * k1[0], q[1] + 0.5 * h * k1[1],
                            q[2] + 0.5 * h * k1[2]};
                    const Vec3 k2 = field.velocity(q2, t + 0.5 * h);
                    Vec3 q3{q[0] + 0.5 * h * k2[0], q[1] + 0.5 * h * k2[1],
                            q[2] + 0.5 * h * k2[2]};
                    const Vec3 k3 = field.velocity(q3, t + 0.5 * h);
                    Vec3 q4{q[0] + h * k3[0], q[1] + h * k3[1], q[2] + h * k3[2]};
                    const Vec3 k4 = field.velocity(q4, t + h);
                    for (int a = 0; a < 3; ++a)
                        q[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
                    if (!field.in_domain(q))
                        st = Status::left_domain;
                    else if (field.node_at(q, t + h))
                        st = Status::node_captured;
                    if (st != Status::ok) ens.stop_times[i] = t + h;
                }
                if ((s + 1) % opt.record_every == 0 || s + 1 == n_steps) record(q);
            }
            ens.status[i] = st;
        }
    });
    return ens;
}

/// Velocity-Verlet integration of the second-order Bohm-Newton law
/// m q'' = -grad(V + V_Psi); no guidance constraint is imposed.
inline TrajectoryEnsemble integrate_second_order(const AnalyticField& field,
                                                 const std::vector<Vec3>& starts,
                                                 const std::vector<Vec3>& velocities,
                                                 const IntegrateOptions& opt) {
    if (starts.size() != velocities.size())
        throw std::invalid_argument("integrate_second_order: starts/velocities mismatch");
    if (!(opt.dt > 0.0)) throw std::invalid_argument("integrate_second_order: dt > 0");
    const int n_steps = std::max(1, static_cast<int>(std::llround((opt.t1 - opt.t0) / opt.dt)));

    TrajectoryEnsemble ens;
    ens.mass = field.mass();
    ens.dim = field.dim();
    ens.integrator = "newton-RK4";
    ens.source = field.describe();
    for (int s = 0; s <= n_steps; ++s)
        if (s % opt.record_every == 0 || s == n_steps)
            ens.times.push_back(opt.t0 + s * opt.dt);
    ens.positions.assign(starts.size(), {});
    ens.status.assign(starts.size(), Status::ok);
    ens.stop_times.assign(starts.size(), std::numeric_limits<double>::quiet_NaN());

    const double m = field.mass();
    parallel_for(starts.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            Vec3 q = starts[i];
            Vec3 v = velocities[i];
            Status st = Status::ok;
            auto& rec = ens.positions[i];
            rec.reserve(ens.times.size());
            rec.push_back(q);
            Vec3 f = field.force(q, opt.t0);
            for (int s = 0; s < n_steps; ++s) {
                if (st == Status::ok) {
                    const double h = opt.dt;
                    Vec3 vh;
                    for (int a = 0; a < 3; ++a) vh[a] = v[a] + 0.5 * h * f[a] / m;
                    for (int a = 0; a < 3; ++a) q[a] += h * vh[a];
                    if (!field.in_domain(q)) {
                        st = Status::left_domain;  // truncated at the boundary
                        ens.stop_times[i] = opt.t0 + (s + 1) * opt.dt;
                    } else {
                        f = field.force(q, opt.t0 + (s + 1) * opt.dt);
                        for (int a = 0; a < 3; ++a) v[a] = vh[a] + 0.5 * h * f[a] / m;
                    }
                }
                if ((s + 1) % opt.record_every == 0 || s + 1 == n_steps) rec.push_back(q);
            }
            ens.status[i] = st;
        }
    });
    return ens;
}

// ---- congruence diagnostics --------------------------------------------------

struct NonCrossingReport {
    bool applicable = true;            // false for non-guided ensembles
    double min_pairwise_distance = 0.0;
    bool order_preserved_1d = true;    // meaningful for dim == 1 only
};

/// Minimum pairwise distance over recorded times; for 1D additionally checks
/// that the initial ordering is preserved at every snapshot. Second-order
/// ensembles report "not guided" (crossings are allowed there).
inline NonCrossingReport non_crossing_check(const TrajectoryEnsemble& ens) {
    NonCrossingReport rep;
    if (ens.integrator != "guided-RK4") {
        rep.applicable = false;
        return rep;
    }
    const std::size_t n = ens.size();
    rep.min_pairwise_distance = std::numeric_limits<double>::infinity();
    if (n < 2) {
        rep.min_pairwise_distance = std::numeric_limits<double>::infinity();
        return rep;
    }
    std::vector<std::size_t> order0(n);
    for (std::size_t i = 0; i < n; ++i) order0[i] = i;
    std::sort(order0.begin(), order0.end(), [&](std::size_t a, std::size_t b) {
        return ens.positions[a][0][0] < ens.positions[b][0][0];
    });
    for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double d2 = 0.0;
                for (int a = 0; a < ens.dim; ++a) {
                    const double d = ens.positions[i][ti][a] - ens.positions[j][ti][a];
                    d2 += d * d;
                }
                rep.min_pairwise_distance =
                    std::min(rep.min_pairwise_distance, std::sqrt(d2));
            }
        if (ens.dim == 1)
            for (std::size_t k = 1; k < n; ++k)
                if (ens.positions[order0[k - 1]][ti][0] >
                    ens.positions[order0[k]][ti][0])
                    rep.order_preserved_1d = false;
    }
    return rep;
}

/// Kelvin circulation transport: advects a closed polygon of starts with the
/// flow and evaluates the loop integral of m v . dl (trapezoid rule) at each
/// recorded time.
struct KelvinSeries {
    std::vector<double> times;
    std::vector<double> circulation;
};

inline KelvinSeries kelvin_transport(const VelocityField& field,
                                     const std::vector<Vec3>& loop,
                                     const IntegrateOptions& opt) {
    if (loop.size() < 3) throw std::invalid_argument("kelvin_transport: loop too short");
    const TrajectoryEnsemble ens = integrate_guided(field, loop, opt);
    for (std::size_t i = 0; i < ens.status.size(); ++i)
        if (ens.status[i] == Status::node_captured)
            throw std::runtime_error("kelvin_transport: loop vertex " + std::to_string(i) +
                                     " captured by a node");
    KelvinSeries out;
    out.times = ens.times;
    const double m = field.mass();
    for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
        double circ = 0.0;
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& a = ens.positions[i][ti];
            const Vec3& b = ens.positions[(i + 1) % n][ti];
            const Vec3 va = field.velocity(a, ens.times[ti]);
            const Vec3 vb = field.velocity(b, ens.times[ti]);
            for (int ax = 0; ax < ens.dim; ++ax)
                circ += 0.5 * m * (va[ax] + vb[ax]) * (b[ax] - a[ax]);
        }
        out.circulation.push_back(circ);
    }
    return out;
}

} // namespace qbohm::traj

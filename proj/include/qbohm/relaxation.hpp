#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbohm/fields.hpp"
#include "qbohm/grid.hpp"
#include "qbohm/grid_ops.hpp"
#include "qbohm/madelung.hpp"
#include "qbohm/rng.hpp"
#include "qbohm/schrodinger.hpp"
#include "qbohm/trajectories.hpp"

namespace qbohm::relax {

/// Asymptotic Kolmogorov-Smirnov critical distance at the 1% level.
inline double ks_threshold(std::size_t n) {
    return 1.63 / std::sqrt(static_cast<double>(n));
}

/// n i.i.d. positions with density |psi|^2 by rejection sampling against the
/// uniform proposal over the domain. Deterministic for a fixed seed
/// (single-threaded, named generator). The acceptance bound is 1.1x the max
/// node density; sampling aborts if the observed acceptance rate collapses.
inline std::vector<traj::Vec3> sample_born(const ComplexField& psi, std::size_t n,
                                           std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_born: n must be >= 1");
    const GridSpec& g = psi.spec;
    double max_rho = 0.0;
    for (const auto& v : psi.values) max_rho = std::max(max_rho, std::norm(v));
    if (max_rho <= 0.0) throw std::invalid_argument("sample_born: field is zero");
    const double bound = 1.1 * max_rho;

    Rng rng(seed);
    std::vector<traj::Vec3> out;
    out.reserve(n);
    std::size_t proposals = 0;
    while (out.size() < n) {
        traj::Vec3 q{0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim; ++a) q[a] = rng.uniform(g.lo[a], g.hi[a]);
        const double u = rng.uniform();
        ++proposals;
        const cplx val = interpolate(psi, q[0], q[1]);
        if (u * bound <= std::norm(val)) out.push_back(q);
        if (proposals > 1000000 &&
            static_cast<double>(out.size()) < 1e-4 * static_cast<double>(proposals))
            throw std::runtime_error("sample_born: proposal too loose");
    }
    return out;
}

/// Pointwise f = rho / R^2 with node-masked cells marked NaN.
inline RealField f_ratio(const RealField& rho, const ComplexField& psi) {
    if (!rho.spec.same_grid(psi.spec))
        throw std::invalid_argument("f_ratio: rho and psi must share a grid");
    RealField R(psi.spec);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        R.values[i] = std::abs(psi.values[i]);
    const auto mask = madelung::node_mask_of(R);
    RealField f(psi.spec);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] = mask[i] ? nan : rho.values[i] / (R.values[i] * R.values[i]);
    return f;
}

/// Coarse-grained cell data: the conserved measure dGamma = int |psi|^2 per
/// cell and the cell-averaged ratio f-bar.
struct CoarseGrain {
    int cells_x = 1;
    int cells_y = 1;
    std::vector<double> f_bar;
    std::vector<double> d_gamma;

    void validate() const {
        double total = 0.0;
        for (double d : d_gamma) {
            if (d < 0.0) throw std::invalid_argument("CoarseGrain: dGamma < 0");
            total += d;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("CoarseGrain: dGamma must sum to 1");
        for (double f : f_bar)
            if (f < 0.0) throw std::invalid_argument("CoarseGrain: f_bar < 0");
    }
};

/// Relative-entropy H-bar = sum dGamma f-bar ln f-bar with 0 ln 0 := 0.
/// Nonnegative; zero exactly at equilibrium f = 1. (Sign convention: this is
/// minus the quantum entropy, so relaxation drives H-bar down to 0.)
inline double h_function(const CoarseGrain& cg) {
    double h = 0.0;
    for (std::size_t i = 0; i < cg.f_bar.size(); ++i) {
        const double f = cg.f_bar[i];
        if (f > 0.0 && cg.d_gamma[i] > 0.0) h += cg.d_gamma[i] * f * std::log(f);
    }
    return h;
}

/// Fine-grained H-bar with cells = grid nodes (dGamma from |psi|^2 directly).
inline double h_function(const RealField& f, const ComplexField& psi) {
    if (!f.spec.same_grid(psi.spec))
        throw std::invalid_argument("h_function: grids differ");
    const double vol = psi.spec.cell_volume();
    double h = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double fv = f.values[i];
        if (std::isnan(fv) || fv <= 0.0) continue;
        h += std::norm(psi.values[i]) * vol * fv * std::log(fv);
    }
    return h;
}

/// Coarse-grain a grid ratio field onto uniform blocks (dGamma-weighted
/// cell averages of f).
inline CoarseGrain coarse_grain_field(const RealField& f, const ComplexField& psi,
                                      int cells_x, int cells_y) {
    const GridSpec& g = psi.spec;
    CoarseGrain cg;
    cg.cells_x = cells_x;
    cg.cells_y = g.dim == 2 ? cells_y : 1;
    cg.f_bar.assign(static_cast<std::size_t>(cg.cells_x) * cg.cells_y, 0.0);
    cg.d_gamma.assign(cg.f_bar.size(), 0.0);
    const double vol = g.cell_volume();
    double total = 0.0;
    for (int iy = 0; iy < (g.dim == 2 ? g.n[1] : 1); ++iy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
            const std::size_t i = g.index(ix, iy);
            const double w = std::norm(psi.values[i]) * vol;
            int cx = static_cast<int>((g.coord(0, ix) - g.lo[0]) / g.length(0) * cells_x);
            cx = std::clamp(cx, 0, cells_x - 1);
            int cy = 0;
            if (g.dim == 2) {
                cy = static_cast<int>((g.coord(1, iy) - g.lo[1]) / g.length(1) * cells_y);
                cy = std::clamp(cy, 0, cg.cells_y - 1);
            }
            const std::size_t c = static_cast<std::size_t>(cx) + cg.cells_x * cy;
            cg.d_gamma[c] += w;
            if (!std::isnan(f.values[i])) cg.f_bar[c] += w * f.values[i];
        }
    for (double d : cg.d_gamma) total += d;
    if (total <= 0.0) throw std::invalid_argument("coarse_grain_field: empty field");
    for (std::size_t c = 0; c < cg.f_bar.size(); ++c) {
        if (cg.d_gamma[c] > 0.0) cg.f_bar[c] /= cg.d_gamma[c];
        cg.d_gamma[c] /= total;
    }
    return cg;
}

/// Plug-in estimator from trajectory counts: f-bar = count / (n dGamma);
/// empty cells contribute 0 ln 0 = 0.
inline CoarseGrain coarse_grain_counts(const std::vector<std::size_t>& counts,
                                       std::size_t n_total,
                                       const std::vector<double>& d_gamma,
                                       int cells_x, int cells_y) {
    if (counts.size() != d_gamma.size())
        throw std::invalid_argument("coarse_grain_counts: size mismatch");
    CoarseGrain cg;
    cg.cells_x = cells_x;
    cg.cells_y = cells_y;
    cg.d_gamma = d_gamma;
    cg.f_bar.resize(counts.size(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c)
        cg.f_bar[c] = d_gamma[c] > 0.0
                          ? static_cast<double>(counts[c]) /
                                (static_cast<double>(n_total) * d_gamma[c])
                          : 0.0;
    return cg;
}

// ---- the relaxation experiment ---------------------------------------------------

struct RelaxationConfig {
    int modes_x = 4;
    int modes_y = 4;
    std::size_t n_traj = 100000;
    int cells = 32;           // coarse cells per axis over the unit box
    double T = 3.82;          // total time, ~3 box revival periods
    double dt = 2.5e-3;
    int grid_n = 128;         // doubled-domain grid points per axis
    int snapshot_stride = 4;  // evolution snapshots every stride*dt (<= 5 dt)
    int outputs = 8;          // report rows
    std::uint64_t seed = 0;
    bool equilibrium_start = false;  // rho0 = |Psi0|^2 instead of the ground mode
    double mass = 1.0;

    void validate() const {
        if (modes_x * modes_y < 4)
            throw std::invalid_argument("relaxation: need >= 4 box modes");
        if (n_traj < 100) throw std::invalid_argument("relaxation: n_traj too small");
        if (cells < 2) throw std::invalid_argument("relaxation: cells must be >= 2");
        if (!(T > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("relaxation: T and dt must be > 0");
        if (snapshot_stride < 1 || snapshot_stride > 5)
            throw std::invalid_argument("relaxation: snapshot stride must be 1..5 dt");
        if (!fft::is_power_of_two(static_cast<std::size_t>(grid_n)))
            throw std::invalid_argument("relaxation: grid_n must be a power of two");
    }
};

struct RelaxationReport {
    std::vector<double> times;
    std::vector<double> h_bar;
    std::vector<double> ks;  // max of the two marginal KS distances
    std::vector<std::size_t> captured_series;  // node-captured by each time
    std::size_t captured = 0;
    std::size_t n_traj = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Fold a doubled-domain position into the unit box using the reflection
// symmetry of the odd extension (|psi(2-x)| = |psi(x)|).
inline void fold_into_box(traj::Vec3& q) {
    for (int a = 0; a < 2; ++a) {
        double x = q[a];
        x = std::fmod(x, 2.0);
        if (x < 0.0) x += 2.0;
        if (x > 1.0) x = 2.0 - x;
        q[a] = x;
    }
}

// dGamma per coarse cell from the box-restricted density of a doubled-grid
// snapshot, renormalized to sum to 1. Nodes landing exactly on a cell
// boundary split their weight between the adjacent cells (trapezoid
// quadrature); a one-sided assignment would shift the density by half a
// node spacing and bias the cell masses.
inline std::vector<double> box_d_gamma(const ComplexField& psi, int cells) {
    const GridSpec& g = psi.spec;
    const int half_x = g.n[0] / 2;
    const int half_y = g.n[1] / 2;
    std::vector<double> dg(static_cast<std::size_t>(cells) * cells, 0.0);

    auto axis_split = [cells](int i, int half, int out_cell[2], double out_w[2]) {
        const long long s = static_cast<long long>(i) * cells;
        if (s % half == 0) {
            const int right = static_cast<int>(s / half);
            int k = 0;
            if (right - 1 >= 0) {
                out_cell[k] = right - 1;
                out_w[k++] = 0.5;
            }
            if (right <= cells - 1) {
                out_cell[k] = right;
                out_w[k++] = 0.5;
            }
            return k;
        }
        out_cell[0] = static_cast<int>(s / half);
        out_w[0] = 1.0;
        return 1;
    };

    double total = 0.0;
    for (int iy = 0; iy <= half_y; ++iy) {
        int cy[2];
        double wy[2];
        const int ny = axis_split(iy, half_y, cy, wy);
        for (int ix = 0; ix <= half_x; ++ix) {
            int cx[2];
            double wx[2];
            const int nx = axis_split(ix, half_x, cx, wx);
            const double w = std::norm(psi.at(ix, iy));
            double sx = 0.0, sy = 0.0;
            for (int b = 0; b < nx; ++b) sx += wx[b];
            for (int a = 0; a < ny; ++a) sy += wy[a];
            total += w * sx * sy;
            for (int a = 0; a < ny; ++a)
                for (int b = 0; b < nx; ++b)
                    dg[static_cast<std::size_t>(cx[b]) + cells * cy[a]] +=
                        w * wx[b] * wy[a];
        }
    }
    for (double& d : dg) d /= total;
    return dg;
}

// Marginal CDF along one axis of the box-restricted density.
inline std::vector<double> box_marginal_cdf(const ComplexField& psi, int axis) {
    const GridSpec& g = psi.spec;
    const int half = g.n[axis] / 2;
    const int other = axis == 0 ? 1 : 0;
    const int half_other = g.n[other] / 2;
    std::vector<double> mass(half + 1, 0.0);
    for (int i = 0; i <= half; ++i)
        for (int j = 0; j <= half_other; ++j) {
            const double w = axis == 0 ? std::norm(psi.at(i, j)) : std::norm(psi.at(j, i));
            mass[i] += w;
        }
    std::vector<double> cdf(half + 2, 0.0);
    double total = 0.0;
    for (int i = 0; i <= half; ++i) total += mass[i];
    double acc = 0.0;
    for (int i = 0; i <= half; ++i) {
        acc += mass[i];
        cdf[i + 1] = acc / total;
    }
    return cdf;  // cdf[k] ~ F(x at node k - half cell), piecewise linear below
}

inline double eval_cdf(const std::vector<double>& cdf, double x, double h) {
    // cdf[k] is the cumulative mass through node k-1; treat node masses as
    // uniform over [x_k - h/2, x_k + h/2)
    const double s = x / h + 0.5;
    if (s <= 0.0) return 0.0;
    const std::size_t k = static_cast<std::size_t>(s);
    if (k + 1 >= cdf.size()) return 1.0;
    const double frac = s - static_cast<double>(k);
    return cdf[k] + frac * (cdf[k + 1] - cdf[k]);
}

inline double ks_distance(std::vector<double> xs, const std::vector<double>& cdf,
                          double h) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = eval_cdf(cdf, xs[i], h);
        d = std::max(d, std::abs((i + 1) / n - f));
        d = std::max(d, std::abs(i / n - f));
    }
    return d;
}

} // namespace detail

/// The quantum-relaxation experiment: a superposition of 2D box eigenmodes
/// with seeded random phases, evolved exactly via the odd extension on the
/// doubled periodic grid; a trajectory ensemble sampled from rho0 is
/// transported by the guided flow and the coarse-grained H-bar plus marginal
/// KS distances to |Psi_t|^2 are recorded.
inline RelaxationReport run_relaxation(const RelaxationConfig& cfg) {
    cfg.validate();
    const fields::BoxSuperposition modes =
        fields::make_box_superposition(cfg.modes_x, cfg.modes_y, cfg.seed, cfg.mass);

    // evolve on the doubled domain; V = 0 makes the split step exact per mode
    ComplexField psi0 = fields::box_on_doubled_grid(modes, cfg.grid_n);
    schrodinger::EvolutionConfig ecfg;
    ecfg.dt = cfg.dt;
    // pad the step count to a snapshot-stride multiple so every recorded
    // ensemble time coincides with an evolution snapshot
    int total_steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
    total_steps = ((total_steps + cfg.snapshot_stride - 1) / cfg.snapshot_stride) *
                  cfg.snapshot_stride;
    const double t_end = total_steps * cfg.dt;
    ecfg.steps = total_steps;
    ecfg.record_every = cfg.snapshot_stride;
    schrodinger::EvolutionResult evo = schrodinger::evolve_quantum(psi0, ecfg);

    // Born sampling of rho0 over the unit box
    ComplexField sample_field =
        cfg.equilibrium_start
            ? fields::box_on_unit_grid(modes, cfg.grid_n / 2 + 1)
            : [&] {
                  fields::BoxSuperposition ground;
                  ground.modes_x = ground.modes_y = 1;
                  ground.mass = cfg.mass;
                  ground.coeffs = {cplx(1.0, 0.0)};
                  return fields::box_on_unit_grid(ground, cfg.grid_n / 2 + 1);
              }();
    const std::vector<traj::Vec3> starts = sample_born(sample_field, cfg.n_traj, cfg.seed + 1);

    traj::SnapshotField flow(std::move(evo.snapshots), std::move(evo.times));
    traj::IntegrateOptions opt;
    opt.t0 = 0.0;
    opt.t1 = t_end;
    opt.dt = cfg.dt;
    int rec = std::max(1, total_steps / cfg.outputs);
    rec = std::max(cfg.snapshot_stride,
                   rec / cfg.snapshot_stride * cfg.snapshot_stride);
    opt.record_every = rec;
    const traj::TrajectoryEnsemble ens = integrate_guided(flow, starts, opt);

    RelaxationReport rep;
    rep.n_traj = cfg.n_traj;
    rep.captured = ens.captured_count();
    if (rep.captured * 100 > cfg.n_traj)
        rep.warnings.push_back("more than 1% of trajectories node-captured");

    const double h = 2.0 / cfg.grid_n;  // doubled-domain spacing
    for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
        const double t = ens.times[ti];
        // recorded ensemble times coincide with evolution snapshots by design
        const ComplexField& psi_t = flow.snapshot(flow.nearest_snapshot(t));

        const std::vector<double> dg = detail::box_d_gamma(psi_t, cfg.cells);
        std::vector<std::size_t> counts(dg.size(), 0);
        std::vector<double> xs, ys;
        xs.reserve(ens.size());
        ys.reserve(ens.size());
        for (std::size_t i = 0; i < ens.size(); ++i) {
            traj::Vec3 q = ens.positions[i][ti];
            detail::fold_into_box(q);
            const int cx = std::min(cfg.cells - 1, static_cast<int>(q[0] * cfg.cells));
            const int cy = std::min(cfg.cells - 1, static_cast<int>(q[1] * cfg.cells));
            ++counts[static_cast<std::size_t>(cx) + cfg.cells * cy];
            xs.push_back(q[0]);
            ys.push_back(q[1]);
        }
        const CoarseGrain cg =
            coarse_grain_counts(counts, ens.size(), dg, cfg.cells, cfg.cells);
        rep.times.push_back(t);
        rep.h_bar.push_back(h_function(cg));
        rep.captured_series.push_back(ens.captured_by(t));
        const double ksx =
            detail::ks_distance(std::move(xs), detail::box_marginal_cdf(psi_t, 0), h);
        const double ksy =
            detail::ks_distance(std::move(ys), detail::box_marginal_cdf(psi_t, 1), h);
        rep.ks.push_back(std::max(ksx, ksy));
    }
    return rep;
}

} // namespace qbohm::relax

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/grid_ops.hpp"
#include "qbohm/madelung.hpp"

namespace qbohm::schrodinger {

enum class Mode { quantum, classical };

struct EvolutionConfig {
    double dt = 1e-3;
    int steps = 1;
    RealField potential;        // empty values => V = 0
    Mode mode = Mode::quantum;
    double classical_a = 1.0;   // dimensionless hbar-scaling of the classical equation
    int record_every = 1;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("EvolutionConfig: dt must be > 0");
        if (steps < 1) throw std::invalid_argument("EvolutionConfig: steps must be >= 1");
        if (record_every < 1)
            throw std::invalid_argument("EvolutionConfig: record_every must be >= 1");
        if (mode == Mode::classical && !(classical_a > 0.0))
            throw std::invalid_argument("EvolutionConfig: classical_a must be > 0");
    }
};

struct EvolutionResult {
    std::vector<ComplexField> snapshots;  // snapshot 0 is the initial state
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<std::string> warnings;
};

namespace detail {

inline void fft_2d(const GridSpec& g, std::vector<cplx>& v, int sign) {
    const int nx = g.n[0];
    if (g.dim == 1) {
        fft::transform(std::span<cplx>(v.data(), v.size()), sign);
        return;
    }
    const int ny = g.n[1];
    for (int iy = 0; iy < ny; ++iy)
        fft::transform(std::span<cplx>(v.data() + static_cast<std::size_t>(iy) * nx,
                                       static_cast<std::size_t>(nx)),
                       sign);
    std::vector<cplx> col(ny);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) col[iy] = v[g.index(ix, iy)];
        fft::transform(std::span<cplx>(col.data(), col.size()), sign);
        for (int iy = 0; iy < ny; ++iy) v[g.index(ix, iy)] = col[iy];
    }
}

struct SplitStepPlan {
    std::vector<cplx> kinetic_phase;   // full-step factor in k space
    std::vector<cplx> potential_half;  // half-step factor in real space
    bool has_potential = false;
};

// Kinetic factor exp(-i a dt k^2 / 2m); potential factor exp(-i V dt / a).
inline SplitStepPlan make_plan(const ComplexField& psi, const RealField& V,
                               double dt, double a) {
    const GridSpec& g = psi.spec;
    SplitStepPlan plan;
    plan.kinetic_phase.resize(g.size());
    const int nx = g.n[0];
    const int ny = g.dim == 2 ? g.n[1] : 1;
    std::vector<double> kx2(nx), ky2(ny, 0.0);
    for (int j = 0; j < nx; ++j) {
        const double k = fft::wavenumber(j, nx, g.length(0));
        kx2[j] = k * k;
    }
    if (g.dim == 2)
        for (int j = 0; j < ny; ++j) {
            const double k = fft::wavenumber(j, ny, g.length(1));
            ky2[j] = k * k;
        }
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            plan.kinetic_phase[g.index(ix, iy)] =
                std::polar(1.0, -a * dt * (kx2[ix] + ky2[iy]) / (2.0 * psi.mass));

    plan.has_potential = !V.values.empty();
    if (plan.has_potential) {
        if (!V.spec.same_grid(g))
            throw std::invalid_argument("evolve: potential grid differs from field grid");
        plan.potential_half.resize(g.size());
        for (std::size_t i = 0; i < plan.potential_half.size(); ++i)
            plan.potential_half[i] = std::polar(1.0, -V.values[i] * dt / (2.0 * a));
    }
    return plan;
}

inline void strang_step(const GridSpec& g, std::vector<cplx>& v,
                        const SplitStepPlan& plan) {
    if (plan.has_potential)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= plan.potential_half[i];
    fft_2d(g, v, -1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= plan.kinetic_phase[i];
    fft_2d(g, v, +1);
    if (plan.has_potential)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= plan.potential_half[i];
}

inline EvolutionResult evolve_impl(const ComplexField& psi0,
                                   const EvolutionConfig& cfg, bool classical) {
    const GridSpec& g = psi0.spec;
    if (g.boundary != Boundary::periodic)
        throw std::invalid_argument(
            "evolve: spectral split-step requires a periodic grid "
            "(use a larger domain with decaying margin instead of dirichlet walls)");
    qbohm::detail::check_spectral(psi0);
    if (cfg.steps < 1) throw std::invalid_argument("evolve: steps must be >= 1");
    if (cfg.dt == 0.0) throw std::invalid_argument("evolve: dt must be nonzero");

    const double a = classical ? cfg.classical_a : 1.0;
    const SplitStepPlan plan = make_plan(psi0, cfg.potential, cfg.dt, a);

    EvolutionResult out;
    ComplexField psi = psi0;
    auto record = [&](int step) {
        out.snapshots.push_back(psi);
        out.times.push_back(step * cfg.dt);
        out.norms.push_back(std::sqrt(norm_squared(psi)));
    };
    record(0);

    std::vector<double> amp;
    bool caustic_warned = false;
    RealField ampf(g);
    for (int step = 1; step <= cfg.steps; ++step) {
        strang_step(g, psi.values, plan);
        if (classical) {
            // operator-split nonlinear term: phase exp(+i dt V_c / a) with
            // V_c = -(a^2/2m) lap|psi| / |psi| recomputed from the current state
            for (std::size_t i = 0; i < psi.values.size(); ++i)
                ampf.values[i] = std::abs(psi.values[i]);
            const double thr = madelung::node_threshold_scale * max_abs(ampf);
            const RealField lap = laplacian(ampf);
            std::size_t collapsed = 0;
            for (std::size_t i = 0; i < psi.values.size(); ++i) {
                if (ampf.values[i] < thr) {
                    ++collapsed;
                    continue;
                }
                const double vc =
                    -a * a / (2.0 * psi.mass) * lap.values[i] / ampf.values[i];
                psi.values[i] *= std::polar(1.0, vc * cfg.dt / a);
            }
            if (!caustic_warned && collapsed * 10 > psi.values.size()) {
                out.warnings.push_back("caustic formation at t=" +
                                       std::to_string(step * cfg.dt));
                caustic_warned = true;
            }
        }
        if (step % cfg.record_every == 0 || step == cfg.steps) record(step);
    }
    return out;
}

} // namespace detail

/// Strang split-step integration of the Schrodinger equation on a periodic
/// grid: half potential phase, full spectral kinetic step, half potential
/// phase. Norm is preserved to roundoff.
inline EvolutionResult evolve_quantum(const ComplexField& psi0,
                                      const EvolutionConfig& cfg) {
    if (cfg.mode != Mode::quantum)
        throw std::invalid_argument("evolve_quantum: cfg.mode must be quantum");
    return detail::evolve_impl(psi0, cfg, false);
}

/// Classical nonlinear counterpart: the quantum split-step followed by a
/// corrective phase removing the quantum potential of the current amplitude,
/// so the classical Hamilton-Jacobi equation holds for the phase.
inline EvolutionResult evolve_classical(const ComplexField& psi0,
                                        const EvolutionConfig& cfg) {
    if (cfg.mode != Mode::classical)
        throw std::invalid_argument("evolve_classical: cfg.mode must be classical");
    return detail::evolve_impl(psi0, cfg, true);
}

/// Max-norm of (-lap/2m + V - E) psi over non-masked nodes; validates
/// stationary inputs such as the Rankine wave function.
inline double stationary_residual(const ComplexField& psi, const RealField& V,
                                  double E) {
    const ComplexField lap = laplacian(psi);
    RealField R(psi.spec);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        R.values[i] = std::abs(psi.values[i]);
    const auto mask = madelung::node_mask_of(R);
    const bool has_v = !V.values.empty();
    double res = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        if (mask[i]) continue;
        const double v = has_v ? V.values[i] : 0.0;
        const cplx r = -lap.values[i] / (2.0 * psi.mass) + (v - E) * psi.values[i];
        res = std::max(res, std::abs(r));
    }
    return res;
}

} // namespace qbohm::schrodinger

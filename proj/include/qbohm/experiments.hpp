#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbohm/checksum.hpp"
#include "qbohm/field_io.hpp"
#include "qbohm/fields.hpp"
#include "qbohm/rankine.hpp"
#include "qbohm/rankine_clebsch.hpp"
#include "qbohm/relaxation.hpp"
#include "qbohm/rng.hpp"
#include "qbohm/schrodinger.hpp"
#include "qbohm/trajectories.hpp"
#include "qbohm/version.hpp"

namespace qbohm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Config or argument problems (exit 2). Numerical problems map to exit 3.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class NumericalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "evolve", "trajectories", "relax", "rankine", "clebsch-check"};
    return names;
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& path) {
    if (!j.is_object()) throw ValidationError("config: " + path + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            throw ValidationError("config: unknown key '" + path + k + "'");
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad value for '" + key + "'");
    }
}

inline std::pair<int, int> parse_grid_pair(const std::string& s,
                                           const std::string& key) {
    const auto x = s.find('x');
    if (x == std::string::npos)
        throw ValidationError("config: '" + key + "' must look like '4x4'");
    try {
        const int a = std::stoi(s.substr(0, x));
        const int b = std::stoi(s.substr(x + 1));
        return {a, b};
    } catch (const std::exception&) {
        throw ValidationError("config: cannot parse '" + key + "'");
    }
}

/// Buffers every output in memory, then writes the files and the manifest in
/// one pass; a failed validation therefore leaves no partial outputs behind.
class RunWriter {
public:
    RunWriter(fs::path dir, std::string experiment, std::uint64_t seed, json config)
        : dir_(std::move(dir)), experiment_(std::move(experiment)), seed_(seed),
          config_(std::move(config)), start_(std::chrono::steady_clock::now()) {}

    void add(const std::string& name, std::string content) {
        outputs_.emplace_back(name, std::move(content));
    }

    json& extra() { return extra_; }

    fs::path manifest_path() const { return dir_ / "manifest.json"; }

    void commit() {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ValidationError("cannot create output directory " + dir_.string());
        if (fs::exists(manifest_path()))
            throw ValidationError("output directory already holds a manifest: " +
                                  manifest_path().string());
        json manifest;
        manifest["tool"] = "qbohm";
        manifest["version"] = version();
        manifest["experiment"] = experiment_;
        manifest["seed"] = seed_;
        manifest["rng"] = Rng::name();
        manifest["config"] = config_;
        manifest["derived"] = extra_;
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
        manifest["wall_time_seconds"] = elapsed;
        json files = json::array();
        for (const auto& [name, content] : outputs_) {
            const fs::path p = dir_ / name;
            std::ofstream out(p, std::ios::binary);
            if (!out) throw ValidationError("cannot write " + p.string());
            out << content;
            out.close();
            files.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
        }
        manifest["outputs"] = files;
        std::ofstream mf(manifest_path());
        if (!mf) throw ValidationError("cannot write " + manifest_path().string());
        mf << manifest.dump(2) << '\n';
    }

private:
    fs::path dir_;
    std::string experiment_;
    std::uint64_t seed_;
    json config_;
    json extra_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    std::chrono::steady_clock::time_point start_;
};

inline std::string ensemble_csv(const traj::TrajectoryEnsemble& ens) {
    std::ostringstream os;
    os << "trajectory_id,t";
    for (int a = 1; a <= ens.dim; ++a) os << ",q_" << a;
    os << ",status\n";
    for (std::size_t i = 0; i < ens.size(); ++i)
        for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
            os << i << ',' << io::fmt(ens.times[ti]);
            for (int a = 0; a < ens.dim; ++a)
                os << ',' << io::fmt(ens.positions[i][ti][a]);
            const bool stopped = ens.status[i] != traj::Status::ok &&
                                 ens.stop_times[i] <= ens.times[ti];
            os << ',' << (stopped ? status_name(ens.status[i]) : "ok") << '\n';
        }
    return os.str();
}

} // namespace detail

// ---- experiment runners -------------------------------------------------------

namespace detail {

inline void run_rankine(const json& sec, std::uint64_t, RunWriter& w) {
    check_keys(sec,
               {"n", "eps", "xi0", "mass", "tau_max", "d_tau", "starts", "traj_dt"},
               "rankine.");
    rankine::RankineParams p;
    p.N = get_or(sec, "n", 1);
    p.eps = get_or(sec, "eps", 3.0);
    p.xi0 = get_or(sec, "xi0", 1.0);
    p.mass = get_or(sec, "mass", 1.0);
    const double tau_max = get_or(sec, "tau_max", 8.0);
    const double d_tau = get_or(sec, "d_tau", 1e-3);
    std::vector<double> starts =
        get_or<std::vector<double>>(sec, "starts", {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5});
    p.validate();

    rankine::RankineSolution sol = rankine::solve_radial(p, tau_max, d_tau);
    const auto fit = rankine::match_bessel(sol);
    const auto wt = rankine::w_transform(sol);

    std::ostringstream prof;
    prof << "tau,G,W,U_eff\n";
    for (std::size_t i = 0; i < sol.tau.size(); ++i)
        prof << io::fmt(sol.tau[i]) << ',' << io::fmt(sol.G[i]) << ','
             << io::fmt(wt.W[i]) << ',' << io::fmt(wt.U[i]) << '\n';
    w.add("rankine_profile.csv", prof.str());

    double max_period = 0.0;
    for (double r : starts) max_period = std::max(max_period, rankine::orbit_period(p, r));
    const double traj_dt = get_or(sec, "traj_dt", max_period / 8192.0);
    const auto ens = rankine::trajectory_portrait(
        p, starts, traj_dt, std::max(1, static_cast<int>(max_period / traj_dt / 512)));
    std::ostringstream tcsv;
    tcsv << "trajectory_id,t,x,y\n";
    for (std::size_t i = 0; i < ens.size(); ++i)
        for (std::size_t ti = 0; ti < ens.times.size(); ++ti)
            tcsv << i << ',' << io::fmt(ens.times[ti]) << ','
                 << io::fmt(ens.positions[i][ti][0]) << ','
                 << io::fmt(ens.positions[i][ti][1]) << '\n';
    w.add("rankine_traj.csv", tcsv.str());

    json& d = w.extra();
    d["N"] = p.N;
    d["eps"] = p.eps;
    d["xi0"] = p.xi0;
    d["mass"] = p.mass;
    d["B0"] = p.B0();
    d["omega_tilde"] = p.omega();
    d["energy"] = p.energy();
    d["critical_radius"] = p.xi0;  // the Fig. 2 red circle
    d["C1"] = fit.C1;
    d["C2"] = fit.C2;
    d["match_residual"] = fit.residual;
    d["barrier_max"] = wt.barrier_max;
    d["above_barrier"] = wt.above_barrier;
    d["curvature_origin"] = sol.curvature_origin();
}

inline ComplexField build_initial_state(const json& sec, const GridSpec& g) {
    check_keys(sec, {"type", "x0", "sigma", "k", "kx", "ky", "winding", "mass", "omega"},
               "evolve.psi0.");
    const std::string type = get_or<std::string>(sec, "type", "gaussian");
    const double mass = get_or(sec, "mass", 1.0);
    if (type == "gaussian")
        return fields::gaussian_packet(g, get_or(sec, "x0", 0.0),
                                       get_or(sec, "sigma", 1.0), get_or(sec, "k", 0.0),
                                       mass);
    if (type == "plane-wave")
        return fields::plane_wave(g, get_or(sec, "kx", 1.0), get_or(sec, "ky", 0.0), mass);
    if (type == "vortex") return fields::vortex(g, get_or(sec, "winding", 1), mass);
    if (type == "harmonic-ground")
        return fields::harmonic_ground_state(g, get_or(sec, "omega", 1.0), mass);
    throw ValidationError("config: unknown psi0 type '" + type + "'");
}

inline void run_evolve(const json& sec, std::uint64_t, RunWriter& w) {
    check_keys(sec,
               {"grid", "psi0", "potential", "mode", "classical_a", "dt", "steps",
                "record_every"},
               "evolve.");
    json gj = sec.value("grid", json::object());
    check_keys(gj, {"lo", "hi", "points", "dim", "lo_y", "hi_y", "points_y"},
               "evolve.grid.");
    const int dim = get_or(gj, "dim", 1);
    GridSpec g = dim == 1
                     ? GridSpec::make_1d(get_or(gj, "lo", -16.0), get_or(gj, "hi", 16.0),
                                         get_or(gj, "points", 256))
                     : GridSpec::make_2d(get_or(gj, "lo", -8.0), get_or(gj, "hi", 8.0),
                                         get_or(gj, "points", 128),
                                         get_or(gj, "lo_y", -8.0),
                                         get_or(gj, "hi_y", 8.0),
                                         get_or(gj, "points_y", 128));

    ComplexField psi0 = build_initial_state(sec.value("psi0", json::object()), g);

    schrodinger::EvolutionConfig cfg;
    cfg.dt = get_or(sec, "dt", 1e-3);
    cfg.steps = get_or(sec, "steps", 1000);
    cfg.record_every = get_or(sec, "record_every", 100);
    cfg.classical_a = get_or(sec, "classical_a", 1.0);
    const std::string mode = get_or<std::string>(sec, "mode", "quantum");
    if (mode != "quantum" && mode != "classical")
        throw ValidationError("config: mode must be quantum or classical");
    cfg.mode = mode == "quantum" ? schrodinger::Mode::quantum
                                 : schrodinger::Mode::classical;

    json pj = sec.value("potential", json::object());
    check_keys(pj, {"type", "omega", "mass"}, "evolve.potential.");
    const std::string ptype = get_or<std::string>(pj, "type", "zero");
    if (ptype == "harmonic")
        cfg.potential = fields::harmonic_potential(g, get_or(pj, "omega", 1.0),
                                                   get_or(pj, "mass", psi0.mass));
    else if (ptype != "zero")
        throw ValidationError("config: unknown potential type '" + ptype + "'");
    cfg.validate();

    const auto res = cfg.mode == schrodinger::Mode::quantum
                         ? schrodinger::evolve_quantum(psi0, cfg)
                         : schrodinger::evolve_classical(psi0, cfg);

    json times = json::array(), norms = json::array();
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%04zu", i);
        std::ostringstream csv, side;
        {
            // reuse the field writer through temporary strings
            const auto& f = res.snapshots[i];
            csv << (f.spec.dim == 1 ? "x,re,im\n" : "x,y,re,im\n");
            for (int iy = 0; iy < (f.spec.dim == 2 ? f.spec.n[1] : 1); ++iy)
                for (int ix = 0; ix < f.spec.n[0]; ++ix) {
                    csv << io::fmt(f.spec.coord(0, ix));
                    if (f.spec.dim == 2) csv << ',' << io::fmt(f.spec.coord(1, iy));
                    const cplx v = f.values[f.spec.index(ix, iy)];
                    csv << ',' << io::fmt(v.real()) << ',' << io::fmt(v.imag()) << '\n';
                }
            json sidecar;
            sidecar["grid"] = io::grid_to_json(f.spec);
            sidecar["kind"] = "complex";
            sidecar["mass"] = f.mass;
            sidecar["time"] = res.times[i];
            side << sidecar.dump(2) << '\n';
        }
        w.add(std::string(name) + ".csv", csv.str());
        w.add(std::string(name) + ".json", side.str());
        times.push_back(res.times[i]);
        norms.push_back(res.norms[i]);
    }
    w.extra()["times"] = times;
    w.extra()["norms"] = norms;
    w.extra()["warnings"] = res.warnings;
}

inline traj::AnalyticField build_analytic_field(const json& sec) {
    check_keys(sec, {"type", "k", "kx", "ky", "winding", "mass", "n", "eps", "xi0"},
               "trajectories.field.");
    const std::string type = get_or<std::string>(sec, "type", "vortex");
    const double mass = get_or(sec, "mass", 1.0);
    if (type == "plane-wave")
        return traj::plane_wave_field({get_or(sec, "kx", 2.0), get_or(sec, "ky", 0.0), 0.0},
                                      mass, 2);
    if (type == "vortex") return traj::vortex2d_field(get_or(sec, "winding", 1), mass);
    if (type == "hydrogen") return traj::hydrogen_ground_state_field();
    if (type == "rankine") {
        rankine::RankineParams p;
        p.N = get_or(sec, "n", 1);
        p.eps = get_or(sec, "eps", 3.0);
        p.xi0 = get_or(sec, "xi0", 1.0);
        p.mass = mass;
        p.validate();
        return rankine::flow_field(p);
    }
    throw ValidationError("config: unknown field type '" + type + "'");
}

inline void run_trajectories(const json& sec, std::uint64_t, RunWriter& w) {
    check_keys(sec,
               {"field", "starts", "velocities", "integrator", "dt", "t1",
                "record_every"},
               "trajectories.");
    const traj::AnalyticField field =
        build_analytic_field(sec.value("field", json::object()));
    const auto starts_in =
        get_or<std::vector<std::vector<double>>>(sec, "starts", {{1.0, 0.0}});
    std::vector<traj::Vec3> starts;
    for (const auto& s : starts_in) {
        traj::Vec3 q{0.0, 0.0, 0.0};
        for (std::size_t a = 0; a < std::min<std::size_t>(3, s.size()); ++a) q[a] = s[a];
        starts.push_back(q);
    }
    traj::IntegrateOptions opt;
    opt.dt = get_or(sec, "dt", 1e-3);
    opt.t1 = get_or(sec, "t1", 1.0);
    opt.record_every = get_or(sec, "record_every", 16);

    const std::string integ = get_or<std::string>(sec, "integrator", "guided");
    traj::TrajectoryEnsemble ens;
    if (integ == "guided") {
        ens = integrate_guided(field, starts, opt);
    } else if (integ == "newton") {
        const auto vel_in =
            get_or<std::vector<std::vector<double>>>(sec, "velocities", {});
        if (vel_in.size() != starts.size())
            throw ValidationError("config: newton integrator needs one velocity per start");
        std::vector<traj::Vec3> vels;
        for (const auto& s : vel_in) {
            traj::Vec3 q{0.0, 0.0, 0.0};
            for (std::size_t a = 0; a < std::min<std::size_t>(3, s.size()); ++a) q[a] = s[a];
            vels.push_back(q);
        }
        ens = integrate_second_order(field, starts, vels, opt);
    } else {
        throw ValidationError("config: integrator must be guided or newton");
    }
    w.add("ensemble.csv", ensemble_csv(ens));
    w.extra()["integrator"] = ens.integrator;
    w.extra()["source"] = ens.source;
    w.extra()["captured"] = ens.captured_count();
}

inline void run_relax(const json& sec, std::uint64_t seed, RunWriter& w) {
    check_keys(sec,
               {"modes", "n_traj", "cells", "T", "dt", "grid_n", "rho0", "outputs",
                "snapshot_stride"},
               "relax.");
    relax::RelaxationConfig cfg;
    const auto [mx, my] = parse_grid_pair(get_or<std::string>(sec, "modes", "4x4"), "modes");
    cfg.modes_x = mx;
    cfg.modes_y = my;
    if (sec.contains("cells")) {
        if (sec.at("cells").is_string()) {
            const std::string s = sec.at("cells").get<std::string>();
            if (s.find('x') != std::string::npos) {
                const auto [cx, cy] = parse_grid_pair(s, "cells");
                if (cx != cy)
                    throw ValidationError("config: cells must be square, e.g. 32x32");
                cfg.cells = cx;
            } else {
                try {
                    cfg.cells = std::stoi(s);
                } catch (const std::exception&) {
                    throw ValidationError("config: cannot parse 'cells'");
                }
            }
        } else {
            cfg.cells = get_or(sec, "cells", 32);
        }
    }
    cfg.n_traj = get_or<std::size_t>(sec, "n_traj", 100000);
    cfg.T = get_or(sec, "T", 3.82);
    cfg.dt = get_or(sec, "dt", 2.5e-3);
    cfg.grid_n = get_or(sec, "grid_n", 128);
    cfg.outputs = get_or(sec, "outputs", 8);
    cfg.snapshot_stride = get_or(sec, "snapshot_stride", 4);
    cfg.seed = seed;
    const std::string rho0 = get_or<std::string>(sec, "rho0", "ground-mode");
    if (rho0 == "born") cfg.equilibrium_start = true;
    else if (rho0 == "ground-mode") cfg.equilibrium_start = false;
    else throw ValidationError("config: rho0 must be born or ground-mode");
    cfg.validate();

    const relax::RelaxationReport rep = relax::run_relaxation(cfg);
    std::ostringstream csv;
    csv << "t,h_bar,ks,captured_count\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        csv << io::fmt(rep.times[i]) << ',' << io::fmt(rep.h_bar[i]) << ','
            << io::fmt(rep.ks[i]) << ',' << rep.captured_series[i] << '\n';
    w.add("relax_report.csv", csv.str());
    w.extra()["n_traj"] = rep.n_traj;
    w.extra()["captured"] = rep.captured;
    w.extra()["warnings"] = rep.warnings;
    w.extra()["ks_threshold_1pct"] = relax::ks_threshold(rep.n_traj);
}

inline void run_clebsch_check(const json& sec, std::uint64_t, RunWriter& w) {
    check_keys(sec, {"n", "eps", "xi0", "mass", "grid_n", "extent_factor"},
               "clebsch-check.");
    rankine::RankineParams p;
    p.N = get_or(sec, "n", 1);
    p.eps = get_or(sec, "eps", 3.0);
    p.xi0 = get_or(sec, "xi0", 1.0);
    p.mass = get_or(sec, "mass", 1.0);
    p.validate();
    const auto suite = rankine::clebsch_suite(p, get_or(sec, "grid_n", 256),
                                              get_or(sec, "extent_factor", 3.0));
    struct Row {
        const char* name;
        double value;
        double tol;
    };
    const Row rows[] = {
        {"advection_alpha", suite.advection_alpha, 1e-6},
        {"advection_beta", suite.advection_beta, 1e-6},
        {"vorticity_identity", suite.vorticity_identity, 1e-6},
        {"lorentz_force", suite.lorentz_force, 1e-6},
        {"maxwell_faraday", suite.maxwell_faraday, 1e-6},
        {"maxwell_div_b", suite.maxwell_div_b, 1e-6},
        {"gauge_constraint", suite.gauge_constraint, 1e-8},
        {"gauge_velocity_dev", suite.gauge_velocity_dev, 1e-10},
        {"transport", suite.transport, 1e-6},
    };
    std::ostringstream csv;
    csv << "check,residual,tolerance,pass\n";
    bool all_ok = true;
    for (const Row& r : rows) {
        const bool ok = r.value <= r.tol;
        all_ok = all_ok && ok;
        csv << r.name << ',' << io::fmt(r.value) << ',' << io::fmt(r.tol) << ','
            << (ok ? "1" : "0") << '\n';
    }
    w.add("clebsch_residuals.csv", csv.str());
    w.extra()["all_pass"] = all_ok;
    if (!all_ok) throw NumericalError("clebsch-check: residual beyond tolerance");
}

} // namespace detail

/// Validates and runs one experiment; outputs land in output_dir together
/// with a manifest carrying the config echo and output checksums.
inline void run_experiment(const json& config) {
    detail::check_keys(config,
                       {"experiment", "seed", "output_dir", "evolve", "trajectories",
                        "relax", "rankine", "clebsch-check"},
                       "");
    if (!config.contains("experiment"))
        throw ValidationError("config: missing 'experiment'");
    const std::string exp = config.at("experiment").get<std::string>();
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == exp;
    if (!known) throw ValidationError("config: unknown experiment '" + exp + "'");
    for (const auto& n : experiment_names())
        if (n != exp && config.contains(n))
            throw ValidationError("config: section '" + n +
                                  "' does not match experiment '" + exp + "'");
    if (!config.contains("output_dir"))
        throw ValidationError("config: missing 'output_dir'");
    const std::string out_dir = config.at("output_dir").get<std::string>();
    const bool stochastic = exp == "relax";
    if (stochastic && !config.contains("seed"))
        throw ValidationError("config: experiment '" + exp + "' requires a seed");
    const std::uint64_t seed = detail::get_or<std::uint64_t>(config, "seed", 0);

    detail::RunWriter writer(out_dir, exp, seed, config);
    if (fs::exists(writer.manifest_path()))
        throw ValidationError("output directory already holds a manifest: " +
                              writer.manifest_path().string());

    const json sec = config.value(exp, json::object());
    if (exp == "rankine") detail::run_rankine(sec, seed, writer);
    else if (exp == "evolve") detail::run_evolve(sec, seed, writer);
    else if (exp == "trajectories") detail::run_trajectories(sec, seed, writer);
    else if (exp == "relax") detail::run_relax(sec, seed, writer);
    else detail::run_clebsch_check(sec, seed, writer);
    writer.commit();
}

struct VerifyResult {
    bool pass = true;
    std::vector<std::string> mismatches;
};

/// Recomputes the checksum of every file a manifest references.
inline VerifyResult verify_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot read manifest " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest parse error: ") + e.what());
    }
    const fs::path dir = fs::path(manifest_path).parent_path();
    VerifyResult res;
    for (const auto& entry : manifest.at("outputs")) {
        const std::string name = entry.at("file").get<std::string>();
        const std::string want = entry.at("sha256").get<std::string>();
        const fs::path p = dir / name;
        std::string got;
        try {
            got = sha256_file(p.string());
        } catch (const std::exception&) {
            res.pass = false;
            res.mismatches.push_back(name + " (missing)");
            continue;
        }
        if (got != want) {
            res.pass = false;
            res.mismatches.push_back(name);
        }
    }
    return res;
}

} // namespace qbohm::cli

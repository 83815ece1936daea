#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbohm/experiments.hpp"
#include "qbohm/version.hpp"

using nlohmann::json;

namespace {

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qbohm::cli::ValidationError("cannot read config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw qbohm::cli::ValidationError(std::string("config parse error: ") + e.what());
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbohm: pilot-wave and Madelung hydrodynamics experiment runner"};
    app.set_version_flag("--version", qbohm::version());
    app.require_subcommand(1);

    // ---- run -----------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run a named experiment");
    std::string experiment, config_path, out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    run->add_option("experiment", experiment, "experiment name (see list-experiments)");
    run->add_option("--config", config_path, "JSON config file (flags override it)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "RNG seed");

    // rankine / clebsch-check flags
    int n_winding = 0;
    double eps = 0.0, xi0 = 0.0, mass = 0.0, tau_max = 0.0, d_tau = 0.0;
    bool n_set = false, eps_set = false, xi0_set = false, mass_set = false,
         tau_max_set = false, d_tau_set = false;
    std::string starts_list;
    run->add_option_function<int>("--n", [&](int v) { n_winding = v; n_set = true; },
                                  "vortex winding N");
    run->add_option_function<double>("--eps", [&](double v) { eps = v; eps_set = true; },
                                     "normalized energy");
    run->add_option_function<double>("--xi0", [&](double v) { xi0 = v; xi0_set = true; },
                                     "core radius");
    run->add_option_function<double>("--mass", [&](double v) { mass = v; mass_set = true; },
                                     "particle mass");
    run->add_option_function<double>(
        "--tau-max", [&](double v) { tau_max = v; tau_max_set = true; }, "radial extent");
    run->add_option_function<double>(
        "--d-tau", [&](double v) { d_tau = v; d_tau_set = true; }, "radial step");
    run->add_option("--starts", starts_list, "comma-separated start radii");

    // relax flags
    std::string modes, cells, rho0;
    std::uint64_t n_traj = 0;
    double T = 0.0, dt = 0.0;
    int grid_n = 0;
    run->add_option("--modes", modes, "box modes, e.g. 4x4");
    run->add_option("--cells", cells, "coarse cells, e.g. 32x32");
    run->add_option_function<std::uint64_t>(
        "--n-traj", [&](std::uint64_t v) { n_traj = v; }, "ensemble size");
    run->add_option_function<double>("--T", [&](double v) { T = v; }, "total time");
    run->add_option_function<double>("--dt", [&](double v) { dt = v; }, "time step");
    run->add_option_function<int>("--grid-n", [&](int v) { grid_n = v; },
                                  "doubled-domain grid points");
    run->add_option("--rho0", rho0, "initial ensemble: born | ground-mode");

    // ---- verify ----------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "verify a run manifest's checksums");
    std::string manifest_path;
    verify->add_option("manifest", manifest_path, "path to manifest.json")->required();

    // ---- list-experiments --------------------------------------------------------
    auto* list = app.add_subcommand("list-experiments", "list available experiments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : qbohm::cli::experiment_names())
                std::printf("%s\n", name.c_str());
            return 0;
        }

        if (verify->parsed()) {
            const auto res = qbohm::cli::verify_manifest(manifest_path);
            if (res.pass) {
                std::printf("verify: pass\n");
                return 0;
            }
            for (const auto& f : res.mismatches)
                std::printf("verify: checksum mismatch: %s\n", f.c_str());
            return 1;
        }

        // run
        json config = config_path.empty() ? json::object() : load_config(config_path);
        if (!experiment.empty()) config["experiment"] = experiment;
        if (!out_dir.empty()) config["output_dir"] = out_dir;
        if (seed_set) config["seed"] = seed;
        if (!config.contains("output_dir")) config["output_dir"] = "qbohm_out";

        const std::string exp = config.value("experiment", "");
        auto& sec = config[exp.empty() ? "unknown" : exp];
        if (!sec.is_object()) sec = json::object();
        if (exp == "rankine" || exp == "clebsch-check") {
            if (n_set) sec["n"] = n_winding;
            if (eps_set) sec["eps"] = eps;
            if (xi0_set) sec["xi0"] = xi0;
            if (mass_set) sec["mass"] = mass;
            if (exp == "rankine") {
                if (tau_max_set) sec["tau_max"] = tau_max;
                if (d_tau_set) sec["d_tau"] = d_tau;
                if (!starts_list.empty()) sec["starts"] = parse_list(starts_list);
            }
        } else if (exp == "relax") {
            if (!modes.empty()) sec["modes"] = modes;
            if (!cells.empty()) sec["cells"] = cells;
            if (n_traj > 0) sec["n_traj"] = n_traj;
            if (T > 0.0) sec["T"] = T;
            if (dt > 0.0) sec["dt"] = dt;
            if (grid_n > 0) sec["grid_n"] = grid_n;
            if (!rho0.empty()) sec["rho0"] = rho0;
        }
        if (config.contains("unknown")) config.erase("unknown");

        qbohm::cli::run_experiment(config);
        std::printf("run: ok\n");
        return 0;
    } catch (const qbohm::cli::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const qbohm::cli::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

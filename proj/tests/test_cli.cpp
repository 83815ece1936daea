#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qbohm/experiments.hpp"

using namespace qbohm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("qbohm_cli_" + tag);
    fs::remove_all(p);
    return p;
}

json rankine_config(const fs::path& out) {
    json cfg;
    cfg["experiment"] = "rankine";
    cfg["seed"] = 7;
    cfg["output_dir"] = out.string();
    cfg["rankine"] = {{"n", 1},        {"eps", 3.0},    {"xi0", 1.0},
                      {"tau_max", 8.0}, {"d_tau", 1e-3}, {"starts", {0.5, 2.0}}};
    return cfg;
}

json load(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

} // namespace

TEST_CASE("rankine run emits profile, portrait and a verifiable manifest") {
    const auto dir = fresh_dir("rankine");
    cli::run_experiment(rankine_config(dir));
    CHECK(fs::exists(dir / "rankine_profile.csv"));
    CHECK(fs::exists(dir / "rankine_traj.csv"));
    CHECK(fs::exists(dir / "manifest.json"));

    const json manifest = load(dir / "manifest.json");
    CHECK(manifest.at("experiment") == "rankine");
    CHECK(manifest.at("rng") == "xoshiro256starstar");
    CHECK(manifest.at("derived").at("match_residual").get<double>() < 1e-6);
    CHECK(manifest.at("derived").at("critical_radius").get<double>() == 1.0);

    const auto res = cli::verify_manifest((dir / "manifest.json").string());
    CHECK(res.pass);
    CHECK(res.mismatches.empty());
}

TEST_CASE("unknown config keys are rejected before any output is written") {
    const auto dir = fresh_dir("badkey");
    json cfg = rankine_config(dir);
    cfg["rankine"]["typo_key"] = 1;
    CHECK_THROWS_AS(cli::run_experiment(cfg), cli::ValidationError);
    CHECK(!fs::exists(dir / "manifest.json"));
    CHECK(!fs::exists(dir / "rankine_profile.csv"));

    json cfg2 = rankine_config(fresh_dir("badkey2"));
    cfg2["unexpected_top_level"] = 3;
    CHECK_THROWS_AS(cli::run_experiment(cfg2), cli::ValidationError);
}

TEST_CASE("section not matching the experiment is rejected") {
    json cfg = rankine_config(fresh_dir("wrongsec"));
    cfg["relax"] = {{"modes", "4x4"}};
    CHECK_THROWS_AS(cli::run_experiment(cfg), cli::ValidationError);
}

TEST_CASE("same config and seed give byte-identical outputs") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    cli::run_experiment(rankine_config(a));
    cli::run_experiment(rankine_config(b));
    const json ma = load(a / "manifest.json");
    const json mb = load(b / "manifest.json");
    REQUIRE(ma.at("outputs").size() == mb.at("outputs").size());
    for (std::size_t i = 0; i < ma.at("outputs").size(); ++i) {
        CHECK(ma.at("outputs")[i].at("file") == mb.at("outputs")[i].at("file"));
        CHECK(ma.at("outputs")[i].at("sha256") == mb.at("outputs")[i].at("sha256"));
    }
}

TEST_CASE("verify flags an edited output by name") {
    const auto dir = fresh_dir("edited");
    cli::run_experiment(rankine_config(dir));
    {
        std::ofstream f(dir / "rankine_profile.csv", std::ios::app);
        f << "tampered\n";
    }
    const auto res = cli::verify_manifest((dir / "manifest.json").string());
    CHECK(!res.pass);
    REQUIRE(res.mismatches.size() == 1);
    CHECK(res.mismatches[0] == "rankine_profile.csv");
}

TEST_CASE("an existing manifest in the output directory is refused") {
    const auto dir = fresh_dir("taken");
    cli::run_experiment(rankine_config(dir));
    CHECK_THROWS_AS(cli::run_experiment(rankine_config(dir)), cli::ValidationError);
}

TEST_CASE("stochastic experiments demand a seed") {
    json cfg;
    cfg["experiment"] = "relax";
    cfg["output_dir"] = fresh_dir("noseed").string();
    cfg["relax"] = {{"modes", "2x2"}, {"n_traj", 500}};
    CHECK_THROWS_AS(cli::run_experiment(cfg), cli::ValidationError);
}

TEST_CASE("small relax run end to end") {
    const auto dir = fresh_dir("relax");
    json cfg;
    cfg["experiment"] = "relax";
    cfg["seed"] = 3;
    cfg["output_dir"] = dir.string();
    cfg["relax"] = {{"modes", "2x2"}, {"n_traj", 2000}, {"cells", 8},
                    {"T", 0.2},       {"dt", 5e-3},     {"grid_n", 64},
                    {"snapshot_stride", 1}, {"outputs", 2}, {"rho0", "born"}};
    cli::run_experiment(cfg);
    CHECK(fs::exists(dir / "relax_report.csv"));
    const json manifest = load(dir / "manifest.json");
    CHECK(manifest.at("derived").at("n_traj") == 2000);
    const auto res = cli::verify_manifest((dir / "manifest.json").string());
    CHECK(res.pass);
}

TEST_CASE("clebsch-check run reports all residuals green") {
    const auto dir = fresh_dir("clebsuite");
    json cfg;
    cfg["experiment"] = "clebsch-check";
    cfg["output_dir"] = dir.string();
    cfg["clebsch-check"] = {{"n", 1}, {"eps", 3.0}, {"grid_n", 128}};
    cli::run_experiment(cfg);
    const json manifest = load(dir / "manifest.json");
    CHECK(manifest.at("derived").at("all_pass") == true);
}

TEST_CASE("evolve run writes snapshots plus a norm series") {
    const auto dir = fresh_dir("evolve");
    json cfg;
    cfg["experiment"] = "evolve";
    cfg["output_dir"] = dir.string();
    cfg["evolve"] = {{"grid", {{"lo", -16.0}, {"hi", 16.0}, {"points", 128}}},
                     {"psi0", {{"type", "gaussian"}, {"sigma", 1.0}}},
                     {"dt", 1e-3},
                     {"steps", 100},
                     {"record_every", 50}};
    cli::run_experiment(cfg);
    CHECK(fs::exists(dir / "snapshot_0000.csv"));
    CHECK(fs::exists(dir / "snapshot_0002.csv"));
    const json manifest = load(dir / "manifest.json");
    CHECK(manifest.at("derived").at("norms").size() == 3);
    for (const auto& n : manifest.at("derived").at("norms"))
        CHECK(std::abs(n.get<double>() - 1.0) < 1e-10);
}

// ---- binary-level checks through the installed CLI -----------------------------

namespace {

int run_cli(const std::string& args) {
    const char* bin = std::getenv("QBOHM_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("binary: run rankine then verify the manifest") {
    const auto dir = fresh_dir("bin_rankine");
    CHECK(run_cli("run rankine --n 1 --eps 3.0 --xi0 1.0 --tau-max 8 --d-tau 1e-3 "
                  "--out " + dir.string()) == 0);
    CHECK(run_cli("verify " + (dir / "manifest.json").string()) == 0);
    // tamper and verify again
    {
        std::ofstream f(dir / "rankine_traj.csv", std::ios::app);
        f << "x\n";
    }
    CHECK(run_cli("verify " + (dir / "manifest.json").string()) == 1);
}

TEST_CASE("binary: list-experiments names all five") {
    const char* bin = std::getenv("QBOHM_BIN");
    REQUIRE(bin != nullptr);
    const auto out = fs::temp_directory_path() / "qbohm_cli_list.txt";
    std::system((std::string(bin) + " list-experiments > " + out.string()).c_str());
    std::ifstream in(out);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    for (const char* name : {"evolve", "trajectories", "relax", "rankine", "clebsch-check"})
        CHECK(all.find(name) != std::string::npos);
}

TEST_CASE("binary: malformed config exits 2 without partial outputs") {
    const auto dir = fresh_dir("bin_bad");
    const auto cfgp = fs::temp_directory_path() / "qbohm_bad_cfg.json";
    {
        std::ofstream f(cfgp);
        f << R"({"experiment":"rankine","output_dir":")" << dir.string()
          << R"(","rankine":{"unknown_knob":1}})";
    }
    CHECK(run_cli("run --config " + cfgp.string()) == 2);
    CHECK(!fs::exists(dir / "manifest.json"));
}

TEST_CASE("binary: rerun with the same seed reproduces checksums") {
    const auto a = fresh_dir("bin_det_a");
    const auto b = fresh_dir("bin_det_b");
    const std::string flags =
        "run relax --modes 2x2 --n-traj 1000 --cells 8 --T 0.1 --dt 5e-3 "
        "--grid-n 64 --seed 7 --out ";
    CHECK(run_cli(flags + a.string()) == 0);
    CHECK(run_cli(flags + b.string()) == 0);
    const json ma = load(a / "manifest.json");
    const json mb = load(b / "manifest.json");
    CHECK(ma.at("outputs") == mb.at("outputs"));
}

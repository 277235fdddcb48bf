#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "eeqt/cli_io.hpp"
#include "json.hpp"

using namespace eeqt;
namespace fs = std::filesystem;

namespace {

// Cheap custom arrival configuration (strong detector, short horizon).
ExperimentConfig cheap_arrival() {
    ExperimentConfig c;
    c.mode = RunMode::Arrival;
    c.initial = {StateKind::PositiveEnergy, 1.0, -1.0};
    c.detectors = {DetectorSpec{0.0, 0.05, 0.01, true}};
    c.grid = GridSpec{-5.5, 2.5, 0.004, 0.0, 3.0};
    c.dx_pair = 0.008;
    return c;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("eeqt_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("preset catalog: arrival fields") {
    const ExperimentConfig c = preset_config("fig1-p0=1.0", false);
    CHECK(c.mode == RunMode::Arrival);
    CHECK(c.initial.kind == StateKind::PositiveEnergy);
    CHECK(c.initial.p0 == 1.0);
    CHECK(c.initial.x0 == -1.0);
    REQUIRE(c.detectors.size() == 1);
    CHECK(c.detectors[0].x_pos == 0.0);
    CHECK(c.detectors[0].width == 0.01);
    CHECK(c.detectors[0].height_mc2 == 1e-5);
    CHECK(c.detectors[0].destructive);
    CHECK(c.grid.x_min == -6.0);
    CHECK(c.grid.x_max == 4.0);
    CHECK(c.grid.dx == 0.0004);
    CHECK(c.dx_pair == 0.0006);
    CHECK(c.grid.tau_cut == 4.5);

    const ExperimentConfig coarse = preset_config("fig1-p0=1.0", true);
    CHECK(coarse.grid.dx == 0.002);
    CHECK(coarse.dx_pair == 0.004);
    CHECK(coarse.grid.tau_cut == 4.5);
}

TEST_CASE("preset catalog: traversal fields and horizon table") {
    const ExperimentConfig c = preset_config("fig3-p0=0.75", false);
    CHECK(c.mode == RunMode::Traversal);
    CHECK(c.initial.x0 == -1.5);
    REQUIRE(c.detectors.size() == 2);
    CHECK(c.detectors[0].x_pos == 0.0);
    CHECK(c.detectors[0].width == 0.5);
    CHECK(c.detectors[0].height_mc2 == 1e-3);
    CHECK_FALSE(c.detectors[0].destructive);
    CHECK(c.detectors[1].x_pos == 1.26);
    CHECK(c.detectors[1].width == 0.02);
    CHECK(c.detectors[1].destructive);
    CHECK(c.grid.dx == 0.0006);
    CHECK(c.dx_pair == 0.001);
    CHECK(c.grid.tau_cut == 13.5);

    // slower packets need longer horizons
    CHECK(preset_config("fig1-p0=0.25", true).grid.tau_cut == 13.0);
    CHECK(preset_config("fig1-p0=0.5", true).grid.tau_cut == 7.0);
    CHECK(preset_config("fig1-p0=0.75", true).grid.tau_cut == 5.0);
    CHECK(preset_config("fig3-p0=0.25", true).grid.tau_cut == 31.5);
    CHECK(preset_config("fig3-p0=0.5", true).grid.tau_cut == 17.5);
    CHECK(preset_config("fig3-p0=1.0", true).grid.tau_cut == 11.5);
    CHECK(preset_config("fig3-p0=1.5", true).grid.tau_cut == 10.5);
}

TEST_CASE("every listed preset resolves and validates") {
    const auto names = preset_names();
    CHECK(names.size() == 10);
    for (const std::string& name : names) {
        CHECK_NOTHROW(preset_config(name, false));
        CHECK_NOTHROW(preset_config(name, true));
    }
    CHECK_THROWS_AS(preset_config("fig2-p0=1.0", false), std::invalid_argument);
    CHECK_THROWS_AS(preset_config("fig1-p0=", false), std::invalid_argument);
    CHECK_THROWS_AS(preset_config("fig1-p0=1.0x", false), std::invalid_argument);
    CHECK_THROWS_AS(preset_config("fig1-p0=-1", false), std::invalid_argument);
}

TEST_CASE("config text: preset seeding, overrides, comments") {
    const ExperimentConfig c = parse_config_text(
        "# comment line\n"
        "preset = fig1-p0=1.0\n"
        "coarse = true\n"
        "p0 = 0.5   # overrides the preset value\n"
        "tau_cut = 7.0\n"
        "boosts = 0.3, -0.6\n"
        "seed = 42\n");
    CHECK(c.preset == "fig1-p0=1.0");
    CHECK(c.grid.dx == 0.002);      // coarse grid
    CHECK(c.initial.p0 == 0.5);     // override wins
    CHECK(c.grid.tau_cut == 7.0);
    REQUIRE(c.boosts.size() == 2);
    CHECK(c.boosts[0] == 0.3);
    CHECK(c.boosts[1] == -0.6);
    CHECK(c.seed == 42);
}

TEST_CASE("config text: hand-built configs and rejection of bad input") {
    const ExperimentConfig c = parse_config_text(
        "mode = traversal\n"
        "kind = N\n"
        "p0 = 1.0\n"
        "x0 = -1.5\n"
        "x_min = -8\nx_max = 8\ndx = 0.002\ntau_cut = 11.5\n"
        "detector1 = 0 0.5 1e-3 0\n"
        "detector2 = 1.26 0.02 1e-3 1\n"
        "stride = 10\n");
    CHECK(c.mode == RunMode::Traversal);
    CHECK(c.initial.kind == StateKind::NegativeEnergy);
    REQUIRE(c.detectors.size() == 2);
    CHECK_FALSE(c.detectors[0].destructive);
    CHECK(c.detectors[1].x_pos == 1.26);
    CHECK(c.stride == 10);

    CHECK_THROWS_AS(parse_config_text("preset = fig1-p0=1.0\nbogus_key = 3\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("preset = fig1-p0=1.0\nboosts = 1.0\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("preset = fig1-p0=1.0\nnot a key value line\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("preset = fig1-p0=1.0\nkind = Q\n"),
                    std::invalid_argument);
    // arrival mode with two detectors fails validation
    CHECK_THROWS_AS(parse_config_text("preset = fig1-p0=1.0\ndetector2 = 1 0.02 1e-3 1\n"),
                    std::invalid_argument);
}

TEST_CASE("density CSV round trip preserves the curve exactly") {
    TempDir tmp("csv");
    DensityCurve curve;
    curve.spacing = 0.004;
    curve.total_mass = 3.55e-5;
    curve.frame_velocity = 0.6;
    for (int i = 0; i < 100; ++i) {
        curve.abscissa.push_back(0.1 + 0.004 * i);
        curve.density.push_back(std::exp(-std::pow((i - 50) / 12.0, 2)) / 3.0);
    }
    const std::string path = (tmp.path / "rho.csv").string();
    write_density_csv(path, curve, "t");
    const DensityCurve back = read_density_csv(path);

    REQUIRE(back.abscissa.size() == curve.abscissa.size());
    CHECK(back.abscissa == curve.abscissa);   // %.17g round-trips doubles exactly
    CHECK(back.density == curve.density);
    CHECK(back.spacing == curve.spacing);
    CHECK(back.total_mass == curve.total_mass);
    CHECK(back.frame_velocity == curve.frame_velocity);
    CHECK(back.mean() == doctest::Approx(curve.mean()).epsilon(1e-12));
}

TEST_CASE("run_and_emit writes the arrival artifacts and a consistent summary") {
    TempDir tmp("arrival");
    ExperimentConfig c = cheap_arrival();
    c.both_steps = true;
    c.boosts = {0.6};
    REQUIRE(run_and_emit(c, tmp.path.string()) == 0);

    const nlohmann::json summary = read_json(tmp.path / "summary.json");
    CHECK(summary.contains("T_a0"));
    CHECK(summary.contains("P_inf"));
    CHECK(summary.contains("error_T_a0"));
    CHECK(summary["classical"].contains("t_a_rm"));
    CHECK(summary["classical"].contains("relative_deviation"));
    CHECK(summary["config"]["mode"] == "arrival");
    CHECK(summary["config"]["initial"]["p0"] == 1.0);

    // the classical baseline for p0 = 1, distance 1 is sqrt(2)
    const double t_rm = summary["classical"]["t_a_rm"].get<double>();
    CHECK(t_rm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const double dev = summary["classical"]["relative_deviation"].get<double>();
    CHECK(std::abs(dev) < 0.05);

    // the emitted rest-frame density reproduces the summary mean on reload
    const DensityCurve rest = read_density_csv((tmp.path / "density_rest.csv").string());
    CHECK(rest.mean() == doctest::Approx(summary["T_a0"].get<double>()).epsilon(1e-9));

    CHECK(fs::exists(tmp.path / "density_proper.csv"));
    CHECK(fs::exists(tmp.path / "density_boost_v+0.600.csv"));
    const double boosted = summary["boosts"][0]["T_a_v"].get<double>();
    const DensityCurve rho_v = read_density_csv((tmp.path / "density_boost_v+0.600.csv").string());
    CHECK(rho_v.frame_velocity == 0.6);
    CHECK(rho_v.mean() == doctest::Approx(boosted).epsilon(1e-9));
}

TEST_CASE("run_and_emit writes Monte Carlo arrival events") {
    TempDir tmp("mc");
    ExperimentConfig c = cheap_arrival();
    c.mode = RunMode::McArrival;
    c.n_samples = 400;
    c.seed = 7;
    REQUIRE(run_and_emit(c, tmp.path.string()) == 0);

    const nlohmann::json summary = read_json(tmp.path / "summary.json");
    const int detected = summary["n_detected"].get<int>();
    const double p = summary["P_inf"].get<double>();
    CHECK(summary["n_samples"] == 400);
    CHECK(detected > 0);
    const double se = std::sqrt(p * (1.0 - p) / 400.0);
    CHECK(std::abs(detected / 400.0 - p) < 4.0 * se);

    // events.csv has a header plus one row per chain
    std::ifstream events(tmp.path / "events.csv");
    REQUIRE(events.good());
    std::string line;
    int rows = 0;
    while (std::getline(events, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 400);
}

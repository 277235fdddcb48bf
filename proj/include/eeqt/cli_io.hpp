#ifndef EEQT_CLI_IO_HPP
#define EEQT_CLI_IO_HPP

#include <cstdint>
#include <string>

#include "eeqt/classical.hpp"
#include "eeqt/mc_events.hpp"

namespace eeqt {

enum class RunMode { Arrival, Traversal, McArrival, McTraversal };

// Fully resolved experiment description; every run_and_emit call echoes it
// into the JSON summary.
struct ExperimentConfig {
    RunMode mode = RunMode::Arrival;
    std::string preset;  // resolved preset name, empty for hand-built configs
    InitialStateSpec initial;
    std::vector<DetectorSpec> detectors;  // 1 entry (arrival) or 2 (traversal)
    GridSpec grid;
    ModelParams params;
    double dx_pair = 0.0;   // coarser step for paired Richardson runs (0 = 2*dx)
    bool both_steps = false;
    std::vector<double> boosts;  // v/c list
    int stride = 20;
    int n_samples = 10000;
    std::uint64_t seed = 1;
    int threads = 0;

    void validate() const;  // throws std::invalid_argument on bad fields
};

// Preset catalog. Names: "fig1-p0=<value>" (single-detector arrival) and
// "fig3-p0=<value>" (two-detector traversal); coarse swaps in the CI grid
// (dx = 0.002 A). Throws on unknown names.
ExperimentConfig preset_config(const std::string& name, bool coarse);
std::vector<std::string> preset_names();

// key = value text format, '#' comments, unknown keys rejected. A "preset"
// key seeds the config; later keys override individual fields.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Two-column CSV with '#' header comments documenting units.
void write_density_csv(const std::string& path, const DensityCurve& curve,
                       const std::string& abscissa_name);
DensityCurve read_density_csv(const std::string& path);

// Runs the configured pipeline, writes <out_dir>/summary.json plus density,
// event, and joint CSVs as applicable, prints a one-line summary. Returns 0
// on success.
int run_and_emit(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace eeqt

#endif

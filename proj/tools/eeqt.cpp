#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "eeqt/cli_io.hpp"

namespace {

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::string out_dir = ".";
    std::string boosts;
    bool coarse = false;
    bool both_steps = false;
    int stride = 0;
    int samples = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--preset", args.preset, "preset name, e.g. fig1-p0=1.0 (see 'presets')");
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_flag("--coarse", args.coarse, "use the fast CI grid (dx = 0.002 A)");
    cmd->add_flag("--both-steps", args.both_steps,
                  "also run the paired coarser step and report Richardson error bars");
    cmd->add_option("--boost", args.boosts, "comma-separated v/c list for boosted densities");
    cmd->add_option("--seed", args.seed, "RNG seed (Monte Carlo modes)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--stride", args.stride, "first-detection branch stride in steps");
    cmd->add_option("--samples", args.samples, "Monte Carlo sample count");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware concurrency)");
}

int run(eeqt::RunMode mode, const CommonArgs& args) {
    eeqt::ExperimentConfig config;
    if (!args.config_path.empty()) {
        config = eeqt::load_config(args.config_path);
    } else if (!args.preset.empty()) {
        config = eeqt::preset_config(args.preset, args.coarse);
    } else {
        std::fprintf(stderr, "error: need --preset or --config\n");
        return 2;
    }
    config.mode = mode;
    config.both_steps = args.both_steps;
    if (!args.boosts.empty()) {
        std::string rest = args.boosts;
        config.boosts.clear();
        while (!rest.empty()) {
            size_t used = 0;
            config.boosts.push_back(std::stod(rest, &used));
            rest = used < rest.size() && rest[used] == ',' ? rest.substr(used + 1) : "";
        }
    }
    if (args.stride > 0) config.stride = args.stride;
    if (args.samples > 0) config.n_samples = args.samples;
    if (args.seed_set) config.seed = args.seed;
    if (args.threads >= 0) config.threads = args.threads;
    return eeqt::run_and_emit(config, args.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relativistic detection-time simulator: time-of-arrival and traversal-time "
                 "distributions of a 1+1D Dirac wavepacket under weak detector damping"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* arrival = app.add_subcommand("arrival", "single-detector arrival-time density");
    CLI::App* traversal = app.add_subcommand("traversal", "two-detector traversal-time density");
    CLI::App* mc_arrival = app.add_subcommand("mc-arrival", "sampled arrival events");
    CLI::App* mc_traversal = app.add_subcommand("mc-traversal", "sampled detection chains");
    CLI::App* presets = app.add_subcommand("presets", "list built-in presets");
    for (CLI::App* cmd : {arrival, traversal, mc_arrival, mc_traversal}) add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            for (const std::string& name : eeqt::preset_names()) std::printf("%s\n", name.c_str());
            return 0;
        }
        if (arrival->parsed()) return run(eeqt::RunMode::Arrival, args);
        if (traversal->parsed()) return run(eeqt::RunMode::Traversal, args);
        if (mc_arrival->parsed()) return run(eeqt::RunMode::McArrival, args);
        if (mc_traversal->parsed()) return run(eeqt::RunMode::McTraversal, args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

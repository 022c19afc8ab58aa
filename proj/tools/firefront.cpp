// Wildfire front modelling: level-set reference solver and physics-informed
// network training with temporal continuity, data assimilation, and
// Monte-Carlo uncertainty quantification.
//
// Subcommands: make-scenario, simulate-lsm, train, predict, evaluate.

#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "firefront/cli.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace firefront;

ExperimentConfig load_with_overrides(const std::string& config_path,
                                     std::optional<std::uint64_t> seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) {
        cfg.train.seed = *seed;
        cfg.scenario.seed = *seed;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    omp_set_num_threads(firefront::worker_threads());
#endif
    CLI::App app{"firefront: level-set and physics-informed wildfire front solvers"};
    app.require_subcommand(1);

    std::string config_path, out_path, checkpoint, reference, truth, isochrones, preset,
        variant;
    std::optional<std::uint64_t> seed;
    bool force = false, export_members = false;
    double rotate_wind = 0.0;

    auto* mk = app.add_subcommand("make-scenario", "Write a preset experiment config");
    mk->add_option("preset", preset, "synthetic | synthetic2 | fire_s03 | fire_e06")
        ->required();
    mk->add_option("-o,--out", out_path, "output config path")->required();
    mk->add_option("--seed", seed, "seed override");
    mk->add_option("--rotate-wind", rotate_wind, "rotate the wind schedule (degrees)");
    mk->add_option("--variant", variant, "model variant override (pinn_e | pinn_f | pinn_a)");

    bool heatmaps = false;
    auto* sim = app.add_subcommand("simulate-lsm", "Run the level-set reference solver");
    sim->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sim->add_option("-o,--out", out_path, "output directory")->required();
    sim->add_option("--seed", seed, "seed override");
    sim->add_flag("--force", force, "overwrite the output directory");
    sim->add_flag("--heatmaps", heatmaps, "also write grayscale PGM heatmaps");

    auto* tr = app.add_subcommand("train", "Train the configured model variant");
    tr->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    tr->add_option("-o,--out", out_path, "output directory")->required();
    tr->add_option("--seed", seed, "seed override");
    tr->add_flag("--force", force, "overwrite the output directory");

    auto* pr = app.add_subcommand("predict", "Evaluate a checkpoint over the grid");
    pr->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    pr->add_option("-k,--checkpoint", checkpoint, "checkpoint file")->required();
    pr->add_option("-o,--out", out_path, "output directory")->required();
    pr->add_option("--seed", seed, "seed override");
    pr->add_flag("--force", force, "overwrite the output directory");
    pr->add_flag("--export-members", export_members, "write every ensemble member");

    auto* ev = app.add_subcommand("evaluate", "Jaccard/coverage metrics against references");
    ev->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    ev->add_option("-p,--prediction", checkpoint, "prediction directory or checkpoint")
        ->required();
    ev->add_option("-r,--reference", reference, "reference simulation directory")->required();
    ev->add_option("--truth", truth, "truth simulation directory");
    ev->add_option("--isochrones", isochrones, "truth isochrone CSV (coverage)");
    ev->add_option("-o,--out", out_path, "metrics CSV path")->required();
    ev->add_option("--seed", seed, "seed override");

    CLI11_PARSE(app, argc, argv);

    return cli::run_guarded([&] {
        if (mk->parsed()) {
            cli::make_scenario(preset, out_path, seed, rotate_wind, variant);
        } else if (sim->parsed()) {
            cli::simulate_lsm(load_with_overrides(config_path, seed), out_path, force,
                              heatmaps);
        } else if (tr->parsed()) {
            cli::train(load_with_overrides(config_path, seed), out_path, force);
        } else if (pr->parsed()) {
            cli::predict(load_with_overrides(config_path, seed), checkpoint, out_path, force,
                         export_members);
        } else if (ev->parsed()) {
            cli::evaluate(load_with_overrides(config_path, seed), checkpoint, reference, truth,
                          isochrones, out_path);
        }
    });
}

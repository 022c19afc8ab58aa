#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "firefront/io.hpp"

namespace firefront::cli {

namespace fs = std::filesystem;

/// Exit-code policy: 0 ok, 1 config/validation, 2 diverged, 3 I/O.
template <typename Fn>
int run_guarded(Fn fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DivergedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

/// Observation points attached to forcing values, validated against bounds.
inline SampleBatch observation_batch(const IsochroneSet& iso, const ForcingField& forcing,
                                     const GridSpec& grid) {
    SampleBatch batch;
    batch.kind = SampleKind::Observation;
    for (const auto& group : iso.groups)
        for (const auto& pt : group.points) {
            if (!grid.contains(pt[0], pt[1]))
                throw ConfigError("observation point (" + std::to_string(pt[0]) + ", " +
                                  std::to_string(pt[1]) + ") at t=" + std::to_string(group.t) +
                                  " lies outside the grid");
            const Forcing f = forcing(group.t, pt[0], pt[1]);
            batch.inputs.insert(batch.inputs.end(),
                                {group.t, pt[0], pt[1], f.s, f.wx, f.wy});
        }
    return batch;
}

/// Evenly subsamples front polylines at the requested times, with optional
/// Gaussian jitter. Deterministic per seed.
inline IsochroneSet sample_observations(const IsochroneSet& full,
                                        const std::vector<double>& times, int per_time,
                                        double jitter, std::uint64_t seed, double tol) {
    IsochroneSet out;
    Rng rng(seed);
    for (double t : times) {
        const IsochroneSet::Group* best = nullptr;
        double best_gap = tol;
        for (const auto& group : full.groups) {
            const double gap = std::abs(group.t - t);
            if (gap <= best_gap) {
                best_gap = gap;
                best = &group;
            }
        }
        if (!best)
            throw ConfigError("no front found within dt/2 of requested observation time " +
                              std::to_string(t));
        IsochroneSet::Group g;
        g.t = best->t;
        const std::size_t n = best->points.size();
        if (n == 0) continue;
        const int take = std::min<int>(per_time, static_cast<int>(n));
        for (int k = 0; k < take; ++k) {
            auto pt = best->points[static_cast<std::size_t>(k) * n / take];
            if (jitter > 0.0) {
                pt[0] += rng.normal(0.0, jitter);
                pt[1] += rng.normal(0.0, jitter);
            }
            g.points.push_back(pt);
        }
        out.groups.push_back(std::move(g));
    }
    return out;
}

inline Datasets assemble_datasets(const ExperimentConfig& cfg, const ForcingField& forcing) {
    Datasets data;
    data.initial = build_initial_dataset(cfg.sdf, cfg.grid, forcing, cfg.oversample,
                                         Rng::derive_seed(cfg.train.seed, 101));
    data.physics = build_collocation_dataset(cfg.grid, forcing);
    if (cfg.train.model.uses_observation()) {
        const ObservationConfig& oc = *cfg.observations;
        IsochroneSet iso;
        if (!oc.file.empty()) {
            iso = load_isochrones(oc.file);
        } else {
            const IsochroneSet full = load_isochrones(fs::path(oc.from_simulation) / "fronts.csv");
            iso = sample_observations(full, oc.times, oc.per_time, oc.jitter, oc.seed,
                                      cfg.grid.dt() / 2.0);
        }
        data.observation = observation_batch(iso, forcing, cfg.grid);
    }
    return data;
}

// ---------------------------------------------------------------------------
// subcommands

inline void make_scenario(const std::string& preset_name, const fs::path& out_path,
                          std::optional<std::uint64_t> seed, double wind_rotation_deg,
                          const std::string& variant_override) {
    const Preset p = preset_config(preset_name);
    ExperimentConfig cfg;
    cfg.grid = p.grid;
    cfg.sdf = p.sdf;
    cfg.reinit = p.reinit;
    cfg.train = p.train;
    cfg.oversample = p.oversample;
    if (!p.scenario.empty()) {
        cfg.scenario.kind = p.scenario;
    } else {
        // fire presets: external forcing, user-supplied values
        cfg.scenario.kind = "custom";
        cfg.scenario.speed = {SpeedKind::Constant, 0.0, 0.0, 0.0, 0.0};
        cfg.scenario.wind.kind = WindKind::Constant;
        ObservationConfig oc;
        oc.file = "isochrones.csv";
        cfg.observations = oc;
    }
    if (seed) {
        cfg.scenario.seed = *seed;
        cfg.train.seed = *seed;
    }
    cfg.scenario.wind_rotation_deg = wind_rotation_deg;
    if (!variant_override.empty())
        cfg.train.model.variant = variant_from_name(variant_override);
    if (cfg.train.model.uses_observation() && !cfg.observations) {
        ObservationConfig oc;
        oc.from_simulation = "reference_run";
        oc.times = {0.25, 0.5, 0.75, 1.0};
        cfg.observations = oc;
    }
    save_config(out_path, cfg);
}

inline void simulate_lsm(const ExperimentConfig& cfg, const fs::path& out, bool force,
                         bool heatmaps = false) {
    cfg.grid.validate();
    cfg.sdf.validate();
    cfg.reinit.validate();
    const ForcingField forcing = build_forcing(cfg.scenario, cfg.grid);
    const ScalarField u0 = sdf_field(cfg.grid, cfg.sdf);
    const SimulationResult result = run_simulation(u0, forcing, cfg.grid, cfg.reinit);
    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
    ensure_output_dir(out, force);
    write_simulation(out, result);
    if (heatmaps)
        for (std::size_t n = 0; n < result.snapshots.size(); ++n) {
            char name[32];
            std::snprintf(name, sizeof(name), "snap_%03zu.pgm", n);
            write_pgm(out / name, result.snapshots[n]);
        }
    write_manifest(out, "simulate-lsm", cfg, cfg.scenario.seed);
}

inline void write_prediction(const fs::path& dir, const GridSpec& grid,
                             const std::vector<ScalarField>& surfaces) {
    fs::create_directories(dir);
    std::vector<double> times;
    std::vector<std::vector<Polyline>> fronts;
    for (int n = 0; n <= grid.n_t; ++n) {
        times.push_back(grid.t(n));
        write_snapshot(dir / snapshot_name(n), surfaces[n], grid.t(n));
        fronts.push_back(extract_zero_level_set(surfaces[n]));
    }
    write_fronts_csv(dir / "fronts.csv", times, fronts);
}

inline void write_ensemble(const fs::path& dir, const McEnsemble& ens,
                           const PredictiveBand& band) {
    fs::create_directories(dir);
    const GridSpec& g = ens.grid;
    std::vector<double> times;
    for (int n = 0; n <= g.n_t; ++n) {
        times.push_back(g.t(n));
        ScalarField mean(g);
        mean.values = ens.mean_surface[n];
        write_snapshot(dir / ("mean_" + snapshot_name(n)), mean, g.t(n));
        ScalarField mask(g);
        for (std::size_t c = 0; c < mask.values.size(); ++c)
            mask.values[c] = band.in_band[n][c] ? 1.0 : 0.0;
        write_snapshot(dir / ("band_" + snapshot_name(n)), mask, g.t(n));
    }
    write_fronts_csv(dir / "fronts.csv", times, band.mean_front);
}

inline void train(const ExperimentConfig& cfg, const fs::path& out, bool force) {
    cfg.validate();
    const ForcingField forcing = build_forcing(cfg.scenario, cfg.grid);
    const Datasets data = assemble_datasets(cfg, forcing);
    ensure_output_dir(out, force);
    fs::create_directories(out / "checkpoints");

    if (!cfg.train.model.bayesian) {
        const TrainResult result = train_pinn(data, cfg.train, [&](int epoch,
                                                                   const NetworkParams& p) {
            char name[48];
            std::snprintf(name, sizeof(name), "epoch_%06d.ckpt", epoch);
            write_checkpoint(out / "checkpoints" / name, p);
        });
        write_checkpoint(out / "checkpoint.ckpt", result.params);
        write_train_log(out / "train_log.csv", result.log, false);
        write_prediction(out / "prediction", cfg.grid,
                         predict_surfaces(result.params, cfg.grid, forcing));
    } else {
        PriorConfig prior;
        const BpinnResult result =
            train_bpinn(data, cfg.train, prior, [&](int epoch, const VariationalParams& phi) {
                char name[48];
                std::snprintf(name, sizeof(name), "epoch_%06d.vckpt", epoch);
                write_vcheckpoint(out / "checkpoints" / name, phi, prior);
            });
        write_vcheckpoint(out / "checkpoint.vckpt", result.phi, prior);
        write_train_log(out / "train_log.csv", result.log, true);
        const McEnsemble ens = posterior_predictive(result.phi, cfg.grid, forcing,
                                                    cfg.train.n_mc, cfg.train.seed);
        write_ensemble(out / "prediction", ens, predictive_band(ens, 0.95));
    }
    write_manifest(out, "train", cfg, cfg.train.seed);
}

inline void predict(const ExperimentConfig& cfg, const fs::path& checkpoint,
                    const fs::path& out, bool force, bool export_members) {
    cfg.grid.validate();
    if (!fs::exists(checkpoint))
        throw IoError("checkpoint '" + checkpoint.string() + "' does not exist");
    const ForcingField forcing = build_forcing(cfg.scenario, cfg.grid);
    ensure_output_dir(out, force);
    if (is_variational_checkpoint(checkpoint)) {
        const VariationalCheckpoint ck = read_vcheckpoint(checkpoint);
        std::optional<fs::path> members_dir;
        if (export_members) {
            members_dir = out / "members";
            fs::create_directories(*members_dir);
        }
        auto sink = [&](int m, const std::vector<ScalarField>& surfaces) {
            if (!members_dir) return;
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "m%03d_", m);
            for (int n = 0; n < static_cast<int>(surfaces.size()); ++n)
                write_snapshot(*members_dir / (prefix + snapshot_name(n)), surfaces[n],
                               cfg.grid.t(n));
        };
        const McEnsemble ens = posterior_predictive(ck.phi, cfg.grid, forcing, cfg.train.n_mc,
                                                    cfg.train.seed, sink);
        write_ensemble(out, ens, predictive_band(ens, 0.95));
    } else {
        const NetworkParams params = read_checkpoint(checkpoint);
        write_prediction(out, cfg.grid, predict_surfaces(params, cfg.grid, forcing));
    }
    write_manifest(out, "predict", cfg, cfg.train.seed);
}

inline void evaluate(const ExperimentConfig& cfg, const fs::path& prediction,
                     const fs::path& reference, const std::string& truth_dir,
                     const std::string& isochrones, const fs::path& out_csv) {
    cfg.grid.validate();
    if (!fs::exists(reference))
        throw IoError("reference directory '" + reference.string() + "' does not exist");
    const SimulationArtifacts ref = read_simulation(reference);
    if (!ref.grid.same_layout(cfg.grid) ||
        static_cast<int>(ref.snapshots.size()) != cfg.grid.n_t + 1)
        throw ConfigError("evaluate: reference grid does not match the configured grid");

    const ForcingField forcing = build_forcing(cfg.scenario, cfg.grid);

    // prediction surfaces: a simulation/prediction directory or a checkpoint
    std::vector<ScalarField> pred;
    std::optional<McEnsemble> ensemble;
    if (fs::is_directory(prediction)) {
        const SimulationArtifacts art = read_simulation(prediction);
        if (!art.grid.same_layout(cfg.grid))
            throw ConfigError("evaluate: prediction grid does not match the configured grid");
        pred = art.snapshots;
    } else if (is_variational_checkpoint(prediction)) {
        const VariationalCheckpoint ck = read_vcheckpoint(prediction);
        ensemble = posterior_predictive(ck.phi, cfg.grid, forcing, cfg.train.n_mc,
                                        cfg.train.seed);
        for (int n = 0; n <= cfg.grid.n_t; ++n) {
            ScalarField mean(cfg.grid);
            mean.values = ensemble->mean_surface[n];
            pred.push_back(std::move(mean));
        }
    } else {
        pred = predict_surfaces(read_checkpoint(prediction), cfg.grid, forcing);
    }
    if (pred.size() != ref.snapshots.size())
        throw ConfigError("evaluate: prediction and reference disagree on snapshot count");

    std::optional<SimulationArtifacts> truth;
    if (!truth_dir.empty()) {
        truth = read_simulation(truth_dir);
        if (!truth->grid.same_layout(cfg.grid))
            throw ConfigError("evaluate: truth grid does not match the configured grid");
    }

    std::optional<CoverageResult> cov;
    if (!isochrones.empty()) {
        if (!ensemble)
            throw ConfigError(
                "evaluate: coverage needs a variational checkpoint as the prediction");
        cov = coverage(*ensemble, load_isochrones(isochrones), 0.95);
    }

    std::vector<MetricsRow> rows;
    for (std::size_t n = 0; n < pred.size(); ++n) {
        MetricsRow row;
        row.t = cfg.grid.t(static_cast<int>(n));
        row.jaccard_pinn_vs_lsm = jaccard(burned_mask(pred[n]), burned_mask(ref.snapshots[n]));
        if (truth) {
            row.jaccard_pinn_vs_truth =
                jaccard(burned_mask(pred[n]), burned_mask(truth->snapshots[n]));
            row.jaccard_lsm_vs_truth =
                jaccard(burned_mask(ref.snapshots[n]), burned_mask(truth->snapshots[n]));
        }
        if (cov)
            for (const auto& [ct, value] : cov->per_time)
                if (std::abs(ct - row.t) <= cfg.grid.dt() / 2.0) row.coverage = value;
        rows.push_back(row);
    }
    write_metrics_csv(out_csv, rows);
    nlohmann::json j;
    j["tool"] = "firefront";
    j["version"] = kVersion;
    j["command"] = "evaluate";
    j["seed"] = cfg.train.seed;
    j["config"] = to_json(cfg);
    j["prediction"] = prediction.string();
    j["reference"] = reference.string();
    if (!truth_dir.empty()) j["truth"] = truth_dir;
    if (!isochrones.empty()) j["isochrones"] = isochrones;
    std::ofstream mf(out_csv.string() + ".manifest.json");
    mf << j.dump(2) << '\n';
}

}  // namespace firefront::cli

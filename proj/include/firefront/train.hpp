#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "firefront/bayes.hpp"
#include "firefront/engine.hpp"
#include "firefront/levelset.hpp"
#include "firefront/net.hpp"
#include "firefront/pinn.hpp"
#include "firefront/sdf.hpp"

namespace firefront {

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(std::size_t count, double learning_rate) : m(count, 0.0), v(count, 0.0), lr(learning_rate) {}
};

/// Bias-corrected Adam ascent step on the supplied gradient.
inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grad) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw ConfigError("adam_step: shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * grad[k];
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
        const double mhat = state.m[k] / bc1;
        const double vhat = state.v[k] / bc2;
        params[k] += state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

struct TrainConfig {
    std::string preset;  // informational; presets fill the fields below
    int epochs = 6000;
    double lr = 1e-3;
    NetworkShape shape{64, 64, Activation::Tanh};
    ModelConfig model;
    LikelihoodConfig lik;
    std::uint64_t seed = 1;
    int checkpoint_every = 0;  // 0: final checkpoint only
    double rho_init = -3.0;
    int elbo_samples = 1;      // MC samples averaged per ELBO step
    int n_mc = 100;            // posterior-predictive ensemble size
    bool select_best = false;  // return the epoch with the best objective

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (!(lr >= 0.0)) throw ConfigError("train: learning rate must be >= 0");
        if (elbo_samples < 1) throw ConfigError("train: elbo_samples must be >= 1");
        lik.validate();
    }
};

struct TrainLogRow {
    int epoch = 0;
    double total = 0.0;
    double initial = 0.0;
    double physics = 0.0;
    double forecast = 0.0;
    double observation = 0.0;
    // Bayesian runs only
    double neg_elbo = 0.0;
    double logq = 0.0;
    double logprior = 0.0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<TrainLogRow> log;
};

using CheckpointSink = std::function<void(int epoch, const NetworkParams&)>;

namespace traindet {

inline void check_finite(const LogLikTerms& terms, int epoch) {
    if (!terms.finite())
        throw DivergedError("training diverged at epoch " + std::to_string(epoch) +
                            " (initial=" + std::to_string(terms.initial) +
                            ", physics=" + std::to_string(terms.physics) +
                            ", forecast=" + std::to_string(terms.forecast) +
                            ", observation=" + std::to_string(terms.observation) + ")");
}

}  // namespace traindet

/// Maximum-likelihood training: full-batch epochs, Adam ascent on the total
/// log-likelihood, forecast targets regenerated from the current parameters
/// at every epoch and treated as constants. Deterministic per seed.
inline TrainResult train_pinn(const Datasets& data, const TrainConfig& cfg,
                              const CheckpointSink& on_checkpoint = {}) {
    cfg.validate();
    EpochEngine engine(data, cfg.model, cfg.lik);
    TrainResult result;
    result.params = init_params(cfg.shape, cfg.seed);
    AdamState adam(result.params.data.size(), cfg.lr);
    std::vector<double> grad;
    result.log.reserve(cfg.epochs);
    NetworkParams best = result.params;
    double best_total = -std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const LogLikTerms terms = engine.accumulate(result.params, grad);
        traindet::check_finite(terms, epoch);
        if (cfg.select_best && terms.total() > best_total) {
            best_total = terms.total();
            best = result.params;
        }
        adam_step(adam, result.params.data, grad);
        TrainLogRow row;
        row.epoch = epoch;
        row.initial = terms.initial;
        row.physics = terms.physics;
        row.forecast = terms.forecast;
        row.observation = terms.observation;
        row.total = terms.total();
        result.log.push_back(row);
        if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            on_checkpoint(epoch, result.params);
    }
    if (cfg.select_best) result.params = best;
    return result;
}

struct BpinnResult {
    VariationalParams phi;
    std::vector<TrainLogRow> log;
};

using VariationalCheckpointSink = std::function<void(int epoch, const VariationalParams&)>;

/// Variational training: per epoch, `elbo_samples` reparameterised draws give
/// a negative-ELBO estimate whose exact fixed-noise gradient drives Adam on
/// (mu, rho). mu starts at the network initialiser, rho at cfg.rho_init.
inline BpinnResult train_bpinn(const Datasets& data, const TrainConfig& cfg,
                               const PriorConfig& prior,
                               const VariationalCheckpointSink& on_checkpoint = {}) {
    cfg.validate();
    prior.validate();
    EpochEngine engine(data, cfg.model, cfg.lik);
    BpinnResult result;
    result.phi = VariationalParams(cfg.shape, cfg.rho_init);
    result.phi.mu = init_params(cfg.shape, cfg.seed).data;
    const std::size_t count = result.phi.count();

    // one flat Adam state over (mu | rho)
    AdamState adam(2 * count, cfg.lr);
    std::vector<double> flat(2 * count, 0.0);
    std::vector<double> ascent(2 * count, 0.0);
    result.log.reserve(cfg.epochs);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double neg_elbo = 0.0, logq = 0.0, logprior = 0.0;
        LogLikTerms terms;
        std::fill(ascent.begin(), ascent.end(), 0.0);
        for (int s = 0; s < cfg.elbo_samples; ++s) {
            const std::uint64_t draw_seed =
                Rng::derive_seed(cfg.seed, 0x9E3779B9ULL + static_cast<std::uint64_t>(epoch) *
                                                               cfg.elbo_samples + s);
            const ElboEstimate est = elbo_estimate(result.phi, engine, prior, draw_seed);
            neg_elbo += est.value / cfg.elbo_samples;
            logq += est.logq / cfg.elbo_samples;
            logprior += est.logprior / cfg.elbo_samples;
            terms.initial += est.terms.initial / cfg.elbo_samples;
            terms.physics += est.terms.physics / cfg.elbo_samples;
            terms.forecast += est.terms.forecast / cfg.elbo_samples;
            terms.observation += est.terms.observation / cfg.elbo_samples;
            for (std::size_t k = 0; k < count; ++k) {
                // ascent on the ELBO = descent on est.grad
                ascent[k] -= est.grad_mu[k] / cfg.elbo_samples;
                ascent[count + k] -= est.grad_rho[k] / cfg.elbo_samples;
            }
        }
        traindet::check_finite(terms, epoch);
        if (!std::isfinite(neg_elbo))
            throw DivergedError("variational training diverged at epoch " +
                                std::to_string(epoch));
        std::copy(result.phi.mu.begin(), result.phi.mu.end(), flat.begin());
        std::copy(result.phi.rho.begin(), result.phi.rho.end(), flat.begin() + count);
        adam_step(adam, flat, ascent);
        std::copy(flat.begin(), flat.begin() + count, result.phi.mu.begin());
        std::copy(flat.begin() + count, flat.end(), result.phi.rho.begin());

        TrainLogRow row;
        row.epoch = epoch;
        row.initial = terms.initial;
        row.physics = terms.physics;
        row.forecast = terms.forecast;
        row.observation = terms.observation;
        row.total = terms.total();
        row.neg_elbo = neg_elbo;
        row.logq = logq;
        row.logprior = logprior;
        result.log.push_back(row);
        if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            on_checkpoint(epoch, result.phi);
    }
    return result;
}

/// Physics log-likelihood summed per time bin. n_bins <= 0 bins by the
/// distinct collocation times; n_bins = 1 recovers the total in one bin.
/// Diagnoses solutions that go degenerate after a forcing change.
inline std::vector<std::pair<double, double>> physics_term_timeseries(
    const NetworkParams& params, const SampleBatch& physics, double sigma_p2, int n_bins = 0) {
    detail::require_kind(physics, SampleKind::Physics, "physics_term_timeseries");
    if (physics.n() == 0) return {};
    double t_lo = physics.row(0)[0], t_hi = physics.row(0)[0];
    for (std::size_t k = 1; k < physics.n(); ++k) {
        t_lo = std::min(t_lo, physics.row(k)[0]);
        t_hi = std::max(t_hi, physics.row(k)[0]);
    }
    std::vector<double> edges;  // bin lower edges
    if (n_bins <= 0 && physics.group_size > 0) {
        for (int g = 0; g < physics.n_groups; ++g)
            edges.push_back(physics.row(static_cast<std::size_t>(g) * physics.group_size)[0]);
    } else {
        const int nb = n_bins <= 0 ? 1 : n_bins;
        for (int b = 0; b < nb; ++b) edges.push_back(t_lo + (t_hi - t_lo) * b / nb);
    }
    std::vector<double> sums(edges.size(), 0.0);
    std::vector<long> counts(edges.size(), 0);
    const double norm = detail::gauss_norm_term(sigma_p2);
    for (std::size_t k = 0; k < physics.n(); ++k) {
        const auto row = physics.row(k);
        const EvalRecord r = forward(row, params);
        const double f = residual_from(r.du[0], r.du[1], r.du[2], row[3], row[4], row[5]);
        const double term = norm - f * f / (2.0 * sigma_p2);
        std::size_t bin = edges.size() - 1;
        while (bin > 0 && row[0] < edges[bin] - 1e-12) --bin;
        sums[bin] += term;
        counts[bin] += 1;
    }
    std::vector<std::pair<double, double>> out;
    for (std::size_t b = 0; b < edges.size(); ++b) out.emplace_back(edges[b], sums[b]);
    return out;
}

/// One preset per Table-style configuration row plus the scenario pieces the
/// experiments need (grid, initialiser, reinitialisation schedule).
struct Preset {
    std::string name;
    std::string scenario;
    GridSpec grid;
    SdfSpec sdf;
    int oversample = 0;
    ReinitConfig reinit;
    TrainConfig train;
};

inline Preset preset_config(const std::string& name) {
    Preset p;
    p.name = name;
    p.train.preset = name;
    if (name == "synthetic" || name == "synthetic2") {
        p.scenario = name;
        p.grid = {0.0, 1.0, 0.0, 1.0, 35, 35, 0.0, 1.0, 48};
        p.sdf.variant = SdfVariant::Cone;
        p.sdf.r = 0.1;
        p.oversample = 35 * 35;
        p.reinit.period = 0;  // disabled for the synthetic runs
        p.train.shape = {64, 64, Activation::Tanh};
        p.train.lr = 1e-3;
        p.train.epochs = name == "synthetic" ? 6000 : 16000;
        if (name == "synthetic") {
            p.sdf.cx = 0.4;
            p.sdf.cy = 0.5;
            p.train.model.variant = Variant::PinnF;
        } else {
            p.sdf.cx = 0.5;
            p.sdf.cy = 0.5;
            p.train.model.variant = Variant::PinnF;
            p.train.model.bayesian = true;
        }
    } else if (name == "fire_s03" || name == "fire_e06") {
        p.scenario = "";  // external forcing and isochrones supplied by the user
        p.sdf.variant = SdfVariant::EllipticalCone;
        p.train.shape = {128, 128, Activation::Relu};
        p.train.epochs = 50000;
        p.train.model.variant = Variant::PinnA;
        p.reinit.period = 10;
        p.reinit.inner_iterations = 1;
        if (name == "fire_s03") {
            p.grid = {0.0, 1.0, 0.0, 1.0, 71, 71, 0.0, 1.0, 68};
            p.train.lr = 5e-4;
            p.sdf.a = std::sqrt(5.0);
            p.sdf.b = 1.0;
            p.sdf.r = 0.02;
            p.sdf.alpha = 30.0 * 3.14159265358979323846 / 180.0;
            p.oversample = 71 * 71;
        } else {
            p.grid = {0.0, 1.0, 0.0, 1.0, 57, 57, 0.0, 1.0, 69};
            p.train.lr = 1e-4;
            p.sdf.a = std::sqrt(0.5);
            p.sdf.b = std::sqrt(7.0);
            p.sdf.r = 4.5;
            p.sdf.alpha = 222.0 * 3.14159265358979323846 / 180.0;
            p.oversample = 57 * 57;
        }
    } else {
        throw ConfigError("unknown preset '" + name +
                          "' (synthetic | synthetic2 | fire_s03 | fire_e06)");
    }
    // shared likelihood weights across all rows
    p.train.lik.sigma_i2 = 1.0 / 2000.0;
    p.train.lik.sigma_p2 = 0.5;
    p.train.lik.sigma_f2 = 1.0 / 100.0;
    p.train.lik.sigma_o2 = 1.0 / 2000.0;
    return p;
}

}  // namespace firefront

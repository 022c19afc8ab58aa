#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "firefront/errors.hpp"
#include "firefront/forcing.hpp"
#include "firefront/grid.hpp"
#include "firefront/net.hpp"
#include "firefront/rng.hpp"
#include "firefront/sdf.hpp"

namespace firefront {

enum class SampleKind { Initial, Physics, Forecast, Observation };

/// Flat batch of 6-component samples (t, x, y, s, wx, wy), row-major.
/// Physics/forecast batches are grouped by time index: `n_groups` blocks of
/// `group_size` consecutive rows sharing one t, uniformly spaced by dt.
struct SampleBatch {
    SampleKind kind = SampleKind::Physics;
    std::vector<double> inputs;             // n() x 6
    std::optional<std::vector<double>> targets;
    int n_groups = 0;
    int group_size = 0;

    std::size_t n() const { return inputs.size() / 6; }
    std::span<const double, 6> row(std::size_t k) const {
        return std::span<const double, 6>(inputs.data() + 6 * k, 6);
    }
    double target(std::size_t k) const { return (*targets)[k]; }
};

struct LikelihoodConfig {
    double sigma_i2 = 1.0 / 2000.0;
    double sigma_p2 = 0.5;
    double sigma_f2 = 1.0 / 100.0;
    double sigma_o2 = 1.0 / 2000.0;

    void validate() const {
        if (!(sigma_i2 > 0 && sigma_p2 > 0 && sigma_f2 > 0 && sigma_o2 > 0))
            throw ConfigError("likelihood variances must be > 0");
    }
};

enum class Variant { PinnE, PinnF, PinnA };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::PinnE: return "pinn_e";
        case Variant::PinnF: return "pinn_f";
        default: return "pinn_a";
    }
}
inline Variant variant_from_name(const std::string& s) {
    if (s == "pinn_e") return Variant::PinnE;
    if (s == "pinn_f") return Variant::PinnF;
    if (s == "pinn_a") return Variant::PinnA;
    throw ConfigError("unknown model variant '" + s + "' (pinn_e | pinn_f | pinn_a)");
}

struct ModelConfig {
    Variant variant = Variant::PinnF;
    bool bayesian = false;

    bool uses_forecast() const { return variant != Variant::PinnE; }
    bool uses_observation() const { return variant == Variant::PinnA; }
};

/// PDE residual of a network evaluation:
/// f = du/dt + s |grad u| + max(W . grad u, 0).
/// Clamping the advection dot product keeps the front from backtracking.
inline double residual_from(double dut, double dux, double duy, double s, double wx, double wy) {
    const double gn = std::sqrt(dux * dux + duy * duy);
    const double wdot = wx * dux + wy * duy;
    return dut + s * gn + std::max(wdot, 0.0);
}

inline double residual(const EvalRecord& rec, double s, std::pair<double, double> wind) {
    return residual_from(rec.du[0], rec.du[1], rec.du[2], s, wind.first, wind.second);
}

/// Partials of the residual with respect to (du_t, du_x, du_y); used to seed
/// the parameter backward pass. At a vanishing gradient norm the normal-speed
/// term gets a zero subgradient; the clamp contributes only where W.grad > 0.
inline std::array<double, 3> residual_seeds(double dux, double duy, double s, double wx,
                                            double wy) {
    const double gn = std::sqrt(dux * dux + duy * duy);
    const double wdot = wx * dux + wy * duy;
    double ax = 0.0, ay = 0.0;
    if (gn > 0.0) {
        ax = s * dux / gn;
        ay = s * duy / gn;
    }
    if (wdot > 0.0) {
        ax += wx;
        ay += wy;
    }
    return {1.0, ax, ay};
}

/// Euler forecast of u at the next time level from the previous evaluation:
/// u_hat = u_prev - dt (s |grad u_prev| + max(W . grad u_prev, 0)).
/// The minus sign integrates du/dt = -(s |grad u| + clamped advection).
inline double forecast_target_from(double u_prev, double dux, double duy, double s, double wx,
                                   double wy, double dt) {
    const double gn = std::sqrt(dux * dux + duy * duy);
    const double wdot = wx * dux + wy * duy;
    return u_prev - dt * (s * gn + std::max(wdot, 0.0));
}

inline double forecast_target(const EvalRecord& prev, double s, std::pair<double, double> wind,
                              double dt) {
    if (!(dt > 0.0)) throw ConfigError("forecast_target: dt must be > 0");
    return forecast_target_from(prev.u, prev.du[1], prev.du[2], s, wind.first, wind.second, dt);
}

/// Samples on every spatial node at t = t_min with signed-distance targets,
/// plus `oversample_interior` uniform rejection-sampled points strictly
/// inside the zero level set. Forcing components are attached per point.
inline SampleBatch build_initial_dataset(const SdfSpec& sdf, const GridSpec& grid,
                                         const ForcingField& forcing, int oversample_interior,
                                         std::uint64_t seed) {
    SampleBatch batch;
    batch.kind = SampleKind::Initial;
    batch.targets.emplace();
    const double t0 = grid.t_min;
    auto push = [&](double x, double y) {
        const Forcing f = forcing(t0, x, y);
        batch.inputs.insert(batch.inputs.end(), {t0, x, y, f.s, f.wx, f.wy});
        batch.targets->push_back(evaluate_sdf(sdf, x, y));
    };
    for (int i = 0; i < grid.n_x; ++i)
        for (int j = 0; j < grid.n_y; ++j) push(grid.x(i), grid.y(j));

    Rng rng(seed);
    int accepted = 0;
    long draws = 0;
    while (accepted < oversample_interior) {
        if (++draws > 1000000)
            throw ConfigError("initial dataset: interior region appears empty "
                              "(rejection sampling gave up after 1e6 draws)");
        const double x = rng.uniform(grid.x_min, grid.x_max);
        const double y = rng.uniform(grid.y_min, grid.y_max);
        if (evaluate_sdf(sdf, x, y) < 0.0) {
            push(x, y);
            ++accepted;
        }
    }
    return batch;
}

/// Full space-time grid product, time-major, starting at t = t_min + dt
/// (the t = 0 slice belongs to the initial dataset). No targets.
inline SampleBatch build_collocation_dataset(const GridSpec& grid, const ForcingField& forcing) {
    SampleBatch batch;
    batch.kind = SampleKind::Physics;
    batch.n_groups = grid.n_t;
    batch.group_size = grid.n_x * grid.n_y;
    batch.inputs.reserve(static_cast<std::size_t>(batch.n_groups) * batch.group_size * 6);
    for (int n = 1; n <= grid.n_t; ++n) {
        const double t = grid.t(n);
        for (int i = 0; i < grid.n_x; ++i)
            for (int j = 0; j < grid.n_y; ++j) {
                const double x = grid.x(i), y = grid.y(j);
                const Forcing f = forcing(t, x, y);
                batch.inputs.insert(batch.inputs.end(), {t, x, y, f.s, f.wx, f.wy});
            }
    }
    return batch;
}

/// View of the collocation batch as the forecast dataset (same rows, same
/// time-major grouping); targets are produced on the fly during training.
inline SampleBatch make_forecast_batch(const SampleBatch& physics) {
    SampleBatch batch = physics;
    batch.kind = SampleKind::Forecast;
    batch.targets.reset();
    return batch;
}

namespace detail {

inline void require_kind(const SampleBatch& b, SampleKind k, const char* what) {
    if (b.kind != k) throw ConfigError(std::string(what) + ": wrong batch kind");
}

// Grouped batches must repeat one spatial layout at uniformly spaced times.
inline void validate_groups(const SampleBatch& b, const char* what) {
    if (b.n_groups <= 0 || b.group_size <= 0 ||
        static_cast<std::size_t>(b.n_groups) * b.group_size != b.n())
        throw ConfigError(std::string(what) + ": batch lacks time-major grouping");
    const std::size_t gs = b.group_size;
    double dt0 = 0.0;
    for (int g = 1; g < b.n_groups; ++g) {
        const double dt = b.row(g * gs)[0] - b.row((g - 1) * gs)[0];
        if (g == 1)
            dt0 = dt;
        else if (std::abs(dt - dt0) > 1e-12)
            throw ConfigError(std::string(what) + ": time groups are not uniformly spaced");
        for (std::size_t k = 0; k < gs; ++k) {
            const auto cur = b.row(g * gs + k);
            const auto prev = b.row((g - 1) * gs + k);
            if (cur[1] != prev[1] || cur[2] != prev[2])
                throw ConfigError(std::string(what) +
                                  ": spatial grids differ between consecutive time groups");
        }
    }
    if (b.n_groups > 1 && !(dt0 > 0.0))
        throw ConfigError(std::string(what) + ": non-positive time spacing");
}

inline double gauss_norm_term(double sigma2) {
    return -0.5 * std::log(2.0 * 3.14159265358979323846 * sigma2);
}

}  // namespace detail

inline double log_lik_initial(const NetworkParams& params, const SampleBatch& batch,
                              double sigma_i2) {
    detail::require_kind(batch, SampleKind::Initial, "log_lik_initial");
    if (!batch.targets || batch.targets->size() != batch.n())
        throw ConfigError("log_lik_initial: initial batch lacks targets");
    const double norm = detail::gauss_norm_term(sigma_i2);
    double acc = 0.0;
    for (std::size_t k = 0; k < batch.n(); ++k) {
        const EvalRecord r = forward(batch.row(k), params);
        const double e = r.u - batch.target(k);
        acc += norm - e * e / (2.0 * sigma_i2);
    }
    return acc;
}

inline double log_lik_physics(const NetworkParams& params, const SampleBatch& batch,
                              double sigma_p2) {
    detail::require_kind(batch, SampleKind::Physics, "log_lik_physics");
    const double norm = detail::gauss_norm_term(sigma_p2);
    double acc = 0.0;
    for (std::size_t k = 0; k < batch.n(); ++k) {
        const auto row = batch.row(k);
        const EvalRecord r = forward(row, params);
        const double f = residual_from(r.du[0], r.du[1], r.du[2], row[3], row[4], row[5]);
        acc += norm - f * f / (2.0 * sigma_p2);
    }
    return acc;
}

/// Euler forecast targets for every sample of a grouped batch, computed from
/// the current parameters. Entries of the first time group are unused (0).
/// The forcing entering each forecast is the one attached to the previous-
/// time sample, matching the explicit Euler step.
inline std::vector<double> forecast_targets(const NetworkParams& params,
                                            const SampleBatch& batch) {
    detail::validate_groups(batch, "forecast_targets");
    const std::size_t gs = batch.group_size;
    const double dt = batch.n_groups > 1 ? batch.row(gs)[0] - batch.row(0)[0] : 0.0;
    std::vector<double> targets(batch.n(), 0.0);
    for (int g = 1; g < batch.n_groups; ++g)
        for (std::size_t k = 0; k < gs; ++k) {
            const std::size_t prev_idx = (g - 1) * gs + k;
            const auto prev = batch.row(prev_idx);
            const EvalRecord r = forward(prev, params);
            targets[g * gs + k] =
                forecast_target_from(r.u, r.du[1], r.du[2], prev[3], prev[4], prev[5], dt);
        }
    return targets;
}

/// Forecast log-likelihood. Targets are treated as constants; when no frozen
/// targets are supplied they are regenerated from the current parameters.
/// The first time group contributes nothing.
inline double log_lik_forecast(const NetworkParams& params, const SampleBatch& batch,
                               double sigma_f2,
                               const std::vector<double>* frozen_targets = nullptr) {
    if (batch.kind != SampleKind::Forecast && batch.kind != SampleKind::Physics)
        throw ConfigError("log_lik_forecast: wrong batch kind");
    detail::validate_groups(batch, "log_lik_forecast");
    std::vector<double> local;
    if (!frozen_targets) {
        local = forecast_targets(params, batch);
        frozen_targets = &local;
    }
    const double norm = detail::gauss_norm_term(sigma_f2);
    const std::size_t gs = batch.group_size;
    double acc = 0.0;
    for (int g = 1; g < batch.n_groups; ++g)
        for (std::size_t k = 0; k < gs; ++k) {
            const std::size_t idx = g * gs + k;
            const EvalRecord r = forward(batch.row(idx), params);
            const double e = r.u - (*frozen_targets)[idx];
            acc += norm - e * e / (2.0 * sigma_f2);
        }
    return acc;
}

inline double log_lik_observation(const NetworkParams& params, const SampleBatch& batch,
                                  double sigma_o2) {
    detail::require_kind(batch, SampleKind::Observation, "log_lik_observation");
    const double norm = detail::gauss_norm_term(sigma_o2);
    double acc = 0.0;
    for (std::size_t k = 0; k < batch.n(); ++k) {
        const EvalRecord r = forward(batch.row(k), params);
        acc += norm - r.u * r.u / (2.0 * sigma_o2);
    }
    return acc;
}

/// Bundle of datasets a variant trains on. `forecast_frozen` optionally pins
/// the forecast targets (they are regenerated once per epoch in training).
struct Datasets {
    SampleBatch initial;
    SampleBatch physics;
    std::optional<SampleBatch> observation;
    std::optional<std::vector<double>> forecast_frozen;
};

inline double total_log_likelihood(const NetworkParams& params, const Datasets& data,
                                   const ModelConfig& cfg, const LikelihoodConfig& lik) {
    double acc = log_lik_initial(params, data.initial, lik.sigma_i2) +
                 log_lik_physics(params, data.physics, lik.sigma_p2);
    if (cfg.uses_forecast())
        acc += log_lik_forecast(params, data.physics, lik.sigma_f2,
                                data.forecast_frozen ? &*data.forecast_frozen : nullptr);
    if (cfg.uses_observation()) {
        if (!data.observation)
            throw ConfigError("total_log_likelihood: variant pinn_a requires observation data");
        acc += log_lik_observation(params, *data.observation, lik.sigma_o2);
    }
    return acc;
}

/// Reference gradient of the total log-likelihood (forecast targets frozen at
/// the supplied parameters). Slow but independent of the batched trainer.
inline std::vector<double> total_log_likelihood_gradient(const NetworkParams& params,
                                                         const Datasets& data,
                                                         const ModelConfig& cfg,
                                                         const LikelihoodConfig& lik) {
    std::vector<double> grad(params.data.size(), 0.0);
    for (std::size_t k = 0; k < data.initial.n(); ++k) {
        const EvalRecord r = forward(data.initial.row(k), params);
        const double e = r.u - data.initial.target(k);
        param_gradient({-e / lik.sigma_i2, 0, 0, 0}, r, params, grad);
    }
    std::vector<double> targets;
    if (cfg.uses_forecast()) {
        if (data.forecast_frozen)
            targets = *data.forecast_frozen;
        else
            targets = forecast_targets(params, data.physics);
    }
    const std::size_t gs = data.physics.group_size;
    for (std::size_t k = 0; k < data.physics.n(); ++k) {
        const auto row = data.physics.row(k);
        const EvalRecord r = forward(row, params);
        const double f = residual_from(r.du[0], r.du[1], r.du[2], row[3], row[4], row[5]);
        const auto s = residual_seeds(r.du[1], r.du[2], row[3], row[4], row[5]);
        GradSeeds seeds{0.0, -f / lik.sigma_p2 * s[0], -f / lik.sigma_p2 * s[1],
                        -f / lik.sigma_p2 * s[2]};
        if (cfg.uses_forecast() && k >= gs) {
            const double e = r.u - targets[k];
            seeds.a += -e / lik.sigma_f2;
        }
        param_gradient(seeds, r, params, grad);
    }
    if (cfg.uses_observation() && data.observation)
        for (std::size_t k = 0; k < data.observation->n(); ++k) {
            const EvalRecord r = forward(data.observation->row(k), params);
            param_gradient({-r.u / lik.sigma_o2, 0, 0, 0}, r, params, grad);
        }
    return grad;
}

}  // namespace firefront

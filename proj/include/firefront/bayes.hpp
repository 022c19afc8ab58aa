#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <utility>
#include <vector>

#include "firefront/engine.hpp"
#include "firefront/errors.hpp"
#include "firefront/metrics.hpp"
#include "firefront/net.hpp"
#include "firefront/pinn.hpp"
#include "firefront/rng.hpp"

namespace firefront {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Mean-field Gaussian posterior: one (mu, rho) pair per network parameter,
/// sigma = softplus(rho) so no update can make a scale non-positive.
struct VariationalParams {
    NetworkShape shape;
    std::vector<double> mu;
    std::vector<double> rho;

    VariationalParams() = default;
    VariationalParams(const NetworkShape& s, double rho_init)
        : shape(s), mu(s.param_count(), 0.0), rho(s.param_count(), rho_init) {}

    std::size_t count() const { return mu.size(); }
};

/// Two-component zero-mean Gaussian mixture over each parameter
/// (narrow spike sigma2, wide slab sigma1; sigmas are standard deviations).
struct PriorConfig {
    double sigma1 = 1.0;
    double sigma2 = std::exp(-6.0);
    double mix = 0.5;

    void validate() const {
        if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw ConfigError("prior: sigmas must be > 0");
        if (!(mix > 0.0 && mix < 1.0)) throw ConfigError("prior: mix must be in (0,1)");
    }
};

/// Reparameterised draw theta_k = mu_k + softplus(rho_k) eps_k. Returns the
/// noise so the gradient path can be reconstructed; deterministic per seed.
inline std::pair<NetworkParams, std::vector<double>> sample_params(const VariationalParams& phi,
                                                                   std::uint64_t seed) {
    NetworkParams theta(phi.shape);
    std::vector<double> eps(phi.count());
    Rng rng(seed);
    for (std::size_t k = 0; k < phi.count(); ++k) {
        eps[k] = rng.normal();
        theta.data[k] = phi.mu[k] + softplus(phi.rho[k]) * eps[k];
    }
    return {std::move(theta), std::move(eps)};
}

inline double log_q(const NetworkParams& theta, const VariationalParams& phi) {
    constexpr double half_ln_2pi = 0.91893853320467274178;
    double acc = 0.0;
    for (std::size_t k = 0; k < phi.count(); ++k) {
        const double sigma = softplus(phi.rho[k]);
        const double z = (theta.data[k] - phi.mu[k]) / sigma;
        acc += -half_ln_2pi - std::log(sigma) - 0.5 * z * z;
    }
    return acc;
}

namespace bayesdet {

// log mixture density and its derivative at one parameter value,
// evaluated with log-sum-exp
inline double log_mix(double theta, const PriorConfig& p, double* dtheta) {
    constexpr double half_ln_2pi = 0.91893853320467274178;
    const double la = std::log(p.mix) - half_ln_2pi - std::log(p.sigma1) -
                      0.5 * theta * theta / (p.sigma1 * p.sigma1);
    const double lb = std::log(1.0 - p.mix) - half_ln_2pi - std::log(p.sigma2) -
                      0.5 * theta * theta / (p.sigma2 * p.sigma2);
    const double m = std::max(la, lb);
    const double val = m + std::log(std::exp(la - m) + std::exp(lb - m));
    if (dtheta) {
        const double ra = std::exp(la - val);
        const double rb = std::exp(lb - val);
        *dtheta = -theta * (ra / (p.sigma1 * p.sigma1) + rb / (p.sigma2 * p.sigma2));
    }
    return val;
}

}  // namespace bayesdet

inline double log_prior(const NetworkParams& theta, const PriorConfig& prior) {
    double acc = 0.0;
    for (double v : theta.data) acc += bayesdet::log_mix(v, prior, nullptr);
    return acc;
}

/// Single-sample negative-ELBO estimate ln q(theta) - ln p(D|theta) -
/// ln p(theta) at theta = sample_params(phi, seed), with the exact gradient
/// of the fixed-noise estimate with respect to (mu, rho).
struct ElboEstimate {
    double value = 0.0;
    double loglik = 0.0;
    double logq = 0.0;
    double logprior = 0.0;
    LogLikTerms terms;
    std::vector<double> grad_mu;
    std::vector<double> grad_rho;
};

inline ElboEstimate elbo_estimate(const VariationalParams& phi, EpochEngine& engine,
                                  const PriorConfig& prior, std::uint64_t seed) {
    prior.validate();
    auto [theta, eps] = sample_params(phi, seed);
    const std::size_t count = phi.count();

    ElboEstimate est;
    std::vector<double> grad_theta;
    est.terms = engine.accumulate(theta, grad_theta);
    est.loglik = est.terms.total();

    est.grad_mu.assign(count, 0.0);
    est.grad_rho.assign(count, 0.0);
    constexpr double half_ln_2pi = 0.91893853320467274178;
    double logq = 0.0, logprior = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double sigma = softplus(phi.rho[k]);
        const double dsig = sigmoid(phi.rho[k]);
        logq += -half_ln_2pi - std::log(sigma) - 0.5 * eps[k] * eps[k];
        double dprior = 0.0;
        logprior += bayesdet::log_mix(theta.data[k], prior, &dprior);
        // d(negELBO)/dmu: the entropy term has no mu dependence at fixed eps
        est.grad_mu[k] = -(grad_theta[k] + dprior);
        // d(negELBO)/drho: through theta plus the direct entropy term
        est.grad_rho[k] = -(grad_theta[k] + dprior) * dsig * eps[k] - dsig / sigma;
    }
    est.logq = logq;
    est.logprior = logprior;
    est.value = logq - est.loglik - logprior;
    return est;
}

inline ElboEstimate elbo_estimate(const VariationalParams& phi, const Datasets& data,
                                  const ModelConfig& cfg, const LikelihoodConfig& lik,
                                  const PriorConfig& prior, std::uint64_t seed) {
    EpochEngine engine(data, cfg, lik);
    return elbo_estimate(phi, engine, prior, seed);
}

/// Network inputs over the full space-time grid (time-major, t = t_min
/// onward), matching the simulation snapshot indexing.
inline FeatureBatch grid_inputs(const GridSpec& grid, const ForcingField& forcing) {
    FeatureBatch fb;
    fb.n = static_cast<std::size_t>(grid.n_t + 1) * grid.n_x * grid.n_y;
    for (auto& c : fb.col) c.resize(fb.n);
    std::size_t k = 0;
    for (int n = 0; n <= grid.n_t; ++n) {
        const double t = grid.t(n);
        for (int i = 0; i < grid.n_x; ++i)
            for (int j = 0; j < grid.n_y; ++j, ++k) {
                const double x = grid.x(i), y = grid.y(j);
                const Forcing f = forcing(t, x, y);
                fb.col[0][k] = static_cast<float>(t);
                fb.col[1][k] = static_cast<float>(x);
                fb.col[2][k] = static_cast<float>(y);
                fb.col[3][k] = static_cast<float>(f.s);
                fb.col[4][k] = static_cast<float>(f.wx);
                fb.col[5][k] = static_cast<float>(f.wy);
            }
    }
    return fb;
}

/// Level-set surfaces for one parameter draw over the whole grid.
inline std::vector<ScalarField> predict_surfaces(const NetworkParams& params,
                                                 const GridSpec& grid,
                                                 const ForcingField& forcing) {
    const FeatureBatch fb = grid_inputs(grid, forcing);
    const std::vector<double> values = batch_values(params, fb);
    std::vector<ScalarField> out;
    out.reserve(grid.n_t + 1);
    const std::size_t per = static_cast<std::size_t>(grid.n_x) * grid.n_y;
    for (int n = 0; n <= grid.n_t; ++n) {
        ScalarField f(grid);
        std::copy(values.begin() + n * per, values.begin() + (n + 1) * per, f.values.begin());
        out.push_back(std::move(f));
    }
    return out;
}

/// Monte-Carlo posterior predictive: n_mc independent draws, each evaluated
/// over the full grid. `member_sink`, when set, receives every member's
/// surfaces (used for ensemble export). Fully reproducible per seed.
template <typename MemberSink = std::nullptr_t>
McEnsemble posterior_predictive(const VariationalParams& phi, const GridSpec& grid,
                                const ForcingField& forcing, int n_mc, std::uint64_t seed,
                                MemberSink member_sink = nullptr) {
    if (n_mc < 1) throw ConfigError("posterior_predictive: n_mc must be >= 1");
    McEnsemble ens;
    ens.grid = grid;
    ens.n_mc = n_mc;
    const std::size_t per = static_cast<std::size_t>(grid.n_x) * grid.n_y;
    ens.burned_count.assign(grid.n_t + 1, std::vector<std::uint32_t>(per, 0));
    ens.mean_surface.assign(grid.n_t + 1, std::vector<double>(per, 0.0));
    const FeatureBatch fb = grid_inputs(grid, forcing);
    for (int m = 0; m < n_mc; ++m) {
        auto [theta, eps] = sample_params(phi, Rng::derive_seed(seed, m));
        const std::vector<double> values = batch_values(theta, fb);
        for (int n = 0; n <= grid.n_t; ++n) {
            const double* v = values.data() + static_cast<std::size_t>(n) * per;
            auto& counts = ens.burned_count[n];
            auto& mean = ens.mean_surface[n];
            for (std::size_t c = 0; c < per; ++c) {
                counts[c] += v[c] < 0.0 ? 1 : 0;
                mean[c] += v[c];
            }
        }
        if constexpr (!std::is_same_v<MemberSink, std::nullptr_t>) {
            std::vector<ScalarField> surfaces;
            surfaces.reserve(grid.n_t + 1);
            for (int n = 0; n <= grid.n_t; ++n) {
                ScalarField f(grid);
                std::copy(values.begin() + n * per, values.begin() + (n + 1) * per,
                          f.values.begin());
                surfaces.push_back(std::move(f));
            }
            member_sink(m, surfaces);
        }
    }
    for (auto& mean : ens.mean_surface)
        for (double& v : mean) v /= n_mc;
    return ens;
}

}  // namespace firefront

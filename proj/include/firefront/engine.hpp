#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "firefront/batch.hpp"
#include "firefront/pinn.hpp"

namespace firefront {

/// Worker threads for the blocked paths; FIREFRONT_THREADS overrides.
/// Results do not depend on this value (fixed block partition and fold order).
inline int worker_threads() {
    static const int n = [] {
        if (const char* env = std::getenv("FIREFRONT_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
#ifdef _OPENMP
        return omp_get_max_threads();
#else
        return 1;
#endif
    }();
    return n;
}

struct LogLikTerms {
    double initial = 0.0;
    double physics = 0.0;
    double forecast = 0.0;
    double observation = 0.0;

    double total() const { return initial + physics + forecast + observation; }
    bool finite() const {
        return std::isfinite(initial) && std::isfinite(physics) && std::isfinite(forecast) &&
               std::isfinite(observation);
    }
};

/// One full-batch evaluation of the active log-likelihood terms and their
/// parameter gradient. Holds float copies of the datasets; forecast targets
/// are regenerated from the supplied parameters on every call and otherwise
/// treated as constants (no gradient flows through them).
class EpochEngine {
  public:
    EpochEngine(const Datasets& data, const ModelConfig& model, const LikelihoodConfig& lik)
        : model_(model), lik_(lik) {
        lik.validate();
        detail::require_kind(data.initial, SampleKind::Initial, "EpochEngine");
        detail::require_kind(data.physics, SampleKind::Physics, "EpochEngine");
        if (model.uses_forecast()) detail::validate_groups(data.physics, "EpochEngine");
        if (model.uses_observation() && !data.observation)
            throw ConfigError("variant pinn_a requires an observation dataset");

        if (!data.initial.targets || data.initial.targets->size() != data.initial.n())
            throw ConfigError("EpochEngine: initial batch lacks targets");
        fb_init_ = FeatureBatch::from(data.initial);
        init_targets_.assign(data.initial.targets->begin(), data.initial.targets->end());
        fb_phys_ = FeatureBatch::from(data.physics);
        n_groups_ = std::max(data.physics.n_groups, 1);
        group_size_ = data.physics.group_size > 0 ? data.physics.group_size
                                                  : static_cast<int>(data.physics.n());
        if (n_groups_ > 1)
            dt_ = data.physics.row(group_size_)[0] - data.physics.row(0)[0];
        if (model.uses_observation()) fb_obs_ = FeatureBatch::from(*data.observation);

        const int max_blocks =
            std::max({blocks_of(group_size_), blocks_of(static_cast<int>(fb_init_.n)),
                      blocks_of(static_cast<int>(fb_obs_.n))});
        grad_pool_.resize(max_blocks);
        sse_pool_.resize(max_blocks);
        fc_sse_pool_.resize(max_blocks);
        u_cur_.resize(group_size_);
        dux_cur_.resize(group_size_);
        duy_cur_.resize(group_size_);
        u_prev_.resize(group_size_);
        dux_prev_.resize(group_size_);
        duy_prev_.resize(group_size_);
        const int nt = worker_threads();
        for (int i = 0; i < nt; ++i) seeds_.emplace_back();
    }

    std::size_t initial_count() const { return fb_init_.n; }
    std::size_t physics_count() const { return fb_phys_.n; }
    std::size_t observation_count() const { return fb_obs_.n; }
    int forecast_pairs() const {
        return model_.uses_forecast() ? (n_groups_ - 1) * group_size_ : 0;
    }

    /// Evaluates terms and accumulates d(total log lik)/d(theta) into grad.
    LogLikTerms accumulate(const NetworkParams& params, std::vector<double>& grad) {
        ensure_arenas(params.shape);
        BatchNet net(params);
        grad.assign(params.data.size(), 0.0);

        LogLikTerms terms;
        double sse_init = 0.0, sse_phys = 0.0, sse_fc = 0.0, sse_obs = 0.0;

        // initial dataset: value seeds only
        run_section(net, fb_init_, grad, [&](int tid, BlockArena& arena, std::size_t off, int nb,
                                             double& sse, double& /*fc*/) {
            auto& s = seeds_[tid];
            for (int n = 0; n < nb; ++n) {
                const double e = static_cast<double>(arena.u()[n]) - init_targets_[off + n];
                sse += e * e;
                s.a[n] = static_cast<float>(-e / lik_.sigma_i2);
            }
            std::fill(s.a.begin() + nb, s.a.end(), 0.0f);
        }, false, &sse_init, nullptr);

        // physics (+ forecast) over time-major groups
        const bool fc = model_.uses_forecast();
        for (int g = 0; g < n_groups_; ++g) {
            const std::size_t base = static_cast<std::size_t>(g) * group_size_;
            const int nblocks = blocks_of(group_size_);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
            for (int b = 0; b < nblocks; ++b) {
#ifdef _OPENMP
                const int tid = omp_get_thread_num();
#else
                const int tid = 0;
#endif
                BlockArena& arena = *arenas_[tid];
                const std::size_t off = base + static_cast<std::size_t>(b) * kBlock;
                const int nb = std::min<int>(kBlock, group_size_ - b * kBlock);
                arena.eval(net, fb_phys_, off, nb, true);
                auto& s = seeds_[tid];
                double sse = 0.0, fsse = 0.0;
                const std::size_t goff = static_cast<std::size_t>(b) * kBlock;
                for (int n = 0; n < nb; ++n) {
                    const double dut = arena.dut()[n];
                    const double dux = arena.dux()[n];
                    const double duy = arena.duy()[n];
                    const double sv = fb_phys_.col[3][off + n];
                    const double wx = fb_phys_.col[4][off + n];
                    const double wy = fb_phys_.col[5][off + n];
                    const double gn = std::sqrt(dux * dux + duy * duy);
                    const double wdot = wx * dux + wy * duy;
                    const double f = dut + sv * gn + std::max(wdot, 0.0);
                    sse += f * f;
                    const double scale = -f / lik_.sigma_p2;
                    double ax = 0.0, ay = 0.0;
                    if (gn > 0.0) {
                        ax = sv * dux / gn;
                        ay = sv * duy / gn;
                    }
                    if (wdot > 0.0) {
                        ax += wx;
                        ay += wy;
                    }
                    s.bt[n] = static_cast<float>(scale);
                    s.bx[n] = static_cast<float>(scale * ax);
                    s.by[n] = static_cast<float>(scale * ay);
                    double a_seed = 0.0;
                    if (fc && g > 0) {
                        const std::size_t poff = off - group_size_;
                        const double sp = fb_phys_.col[3][poff + n];
                        const double wxp = fb_phys_.col[4][poff + n];
                        const double wyp = fb_phys_.col[5][poff + n];
                        const double gxp = dux_prev_[goff + n];
                        const double gyp = duy_prev_[goff + n];
                        const double gnp = std::sqrt(gxp * gxp + gyp * gyp);
                        const double wdp = wxp * gxp + wyp * gyp;
                        const double target =
                            u_prev_[goff + n] - dt_ * (sp * gnp + std::max(wdp, 0.0));
                        const double e = static_cast<double>(arena.u()[n]) - target;
                        fsse += e * e;
                        a_seed = -e / lik_.sigma_f2;
                    }
                    s.a[n] = static_cast<float>(a_seed);
                    u_cur_[goff + n] = arena.u()[n];
                    dux_cur_[goff + n] = arena.dux()[n];
                    duy_cur_[goff + n] = arena.duy()[n];
                }
                pad_seeds(s, nb);
                auto& gbuf = grad_pool_[b];
                gbuf.assign(params.data.size(), 0.0);
                arena.reverse(net, s.a.data(), s.bt.data(), s.bx.data(), s.by.data(),
                              gbuf.data());
                sse_pool_[b] = sse;
                fc_sse_pool_[b] = fsse;
            }
            for (int b = 0; b < nblocks; ++b) {
                const auto& gbuf = grad_pool_[b];
                for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += gbuf[k];
                sse_phys += sse_pool_[b];
                sse_fc += fc_sse_pool_[b];
            }
            std::swap(u_cur_, u_prev_);
            std::swap(dux_cur_, dux_prev_);
            std::swap(duy_cur_, duy_prev_);
        }

        // observations: value seeds only
        if (model_.uses_observation() && fb_obs_.n > 0) {
            run_section(net, fb_obs_, grad, [&](int tid, BlockArena& arena, std::size_t /*off*/,
                                                int nb, double& sse, double& /*fc*/) {
                auto& s = seeds_[tid];
                for (int n = 0; n < nb; ++n) {
                    const double u = arena.u()[n];
                    sse += u * u;
                    s.a[n] = static_cast<float>(-u / lik_.sigma_o2);
                }
                std::fill(s.a.begin() + nb, s.a.end(), 0.0f);
            }, false, &sse_obs, nullptr);
        }

        const double c = 2.0 * 3.14159265358979323846;
        terms.initial = -0.5 * std::log(c * lik_.sigma_i2) * static_cast<double>(fb_init_.n) -
                        sse_init / (2.0 * lik_.sigma_i2);
        terms.physics = -0.5 * std::log(c * lik_.sigma_p2) * static_cast<double>(fb_phys_.n) -
                        sse_phys / (2.0 * lik_.sigma_p2);
        if (fc && n_groups_ > 1)
            terms.forecast = -0.5 * std::log(c * lik_.sigma_f2) *
                                 static_cast<double>(forecast_pairs()) -
                             sse_fc / (2.0 * lik_.sigma_f2);
        if (model_.uses_observation() && fb_obs_.n > 0)
            terms.observation = -0.5 * std::log(c * lik_.sigma_o2) *
                                    static_cast<double>(fb_obs_.n) -
                                sse_obs / (2.0 * lik_.sigma_o2);
        return terms;
    }

  private:
    struct SeedBuf {
        std::vector<float> a = std::vector<float>(kBlock, 0.0f);
        std::vector<float> bt = std::vector<float>(kBlock, 0.0f);
        std::vector<float> bx = std::vector<float>(kBlock, 0.0f);
        std::vector<float> by = std::vector<float>(kBlock, 0.0f);
    };

    static int blocks_of(int n) { return n > 0 ? (n + kBlock - 1) / kBlock : 0; }

    static void pad_seeds(SeedBuf& s, int nb) {
        std::fill(s.a.begin() + nb, s.a.end(), 0.0f);
        std::fill(s.bt.begin() + nb, s.bt.end(), 0.0f);
        std::fill(s.bx.begin() + nb, s.bx.end(), 0.0f);
        std::fill(s.by.begin() + nb, s.by.end(), 0.0f);
    }

    void ensure_arenas(const NetworkShape& shape) {
        if (!arenas_.empty() && arena_shape_ == shape) return;
        arenas_.clear();
        for (int i = 0; i < worker_threads(); ++i)
            arenas_.push_back(std::make_unique<BlockArena>(shape));
        arena_shape_ = shape;
    }

    template <typename SeedFn>
    void run_section(const BatchNet& net, const FeatureBatch& fb, std::vector<double>& grad,
                     SeedFn seed_fn, bool want_grads, double* sse_out, double* fc_out) {
        if (fb.n == 0) return;
        const int nblocks = blocks_of(static_cast<int>(fb.n));
#pragma omp parallel for schedule(static) num_threads(worker_threads())
        for (int b = 0; b < nblocks; ++b) {
#ifdef _OPENMP
            const int tid = omp_get_thread_num();
#else
            const int tid = 0;
#endif
            BlockArena& arena = *arenas_[tid];
            const std::size_t off = static_cast<std::size_t>(b) * kBlock;
            const int nb = std::min<int>(kBlock, static_cast<int>(fb.n - off));
            arena.eval(net, fb, off, nb, want_grads);
            double sse = 0.0, fsse = 0.0;
            seed_fn(tid, arena, off, nb, sse, fsse);
            auto& gbuf = grad_pool_[b];
            gbuf.assign(grad.size(), 0.0);
            auto& s = seeds_[tid];
            arena.reverse(net, s.a.data(), want_grads ? s.bt.data() : nullptr,
                          want_grads ? s.bx.data() : nullptr,
                          want_grads ? s.by.data() : nullptr, gbuf.data());
            sse_pool_[b] = sse;
            fc_sse_pool_[b] = fsse;
        }
        for (int b = 0; b < nblocks; ++b) {
            const auto& gbuf = grad_pool_[b];
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += gbuf[k];
            if (sse_out) *sse_out += sse_pool_[b];
            if (fc_out) *fc_out += fc_sse_pool_[b];
        }
    }

    ModelConfig model_;
    LikelihoodConfig lik_;
    FeatureBatch fb_init_, fb_phys_, fb_obs_;
    std::vector<double> init_targets_;
    int n_groups_ = 1;
    int group_size_ = 0;
    double dt_ = 0.0;
    std::vector<std::vector<double>> grad_pool_;
    std::vector<double> sse_pool_, fc_sse_pool_;
    std::vector<float> u_cur_, dux_cur_, duy_cur_;
    std::vector<float> u_prev_, dux_prev_, duy_prev_;
    std::vector<std::unique_ptr<BlockArena>> arenas_;
    NetworkShape arena_shape_;
    std::vector<SeedBuf> seeds_;
};

}  // namespace firefront

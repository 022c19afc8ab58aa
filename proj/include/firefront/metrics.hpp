#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "firefront/contour.hpp"
#include "firefront/errors.hpp"
#include "firefront/grid.hpp"

namespace firefront {

/// Grid-aligned burned region: true where u < 0.
struct BurnedMask {
    GridSpec spec;
    std::vector<std::uint8_t> burned;

    BurnedMask() = default;
    explicit BurnedMask(const GridSpec& g)
        : spec(g), burned(static_cast<std::size_t>(g.n_x) * g.n_y, 0) {}

    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : burned) c += b != 0;
        return c;
    }
};

inline BurnedMask burned_mask(const ScalarField& u) {
    BurnedMask m(u.spec);
    for (std::size_t c = 0; c < u.values.size(); ++c) m.burned[c] = u.values[c] < 0.0 ? 1 : 0;
    return m;
}

/// Intersection over union of two burned masks; 1 when both are empty.
inline double jaccard(const BurnedMask& a, const BurnedMask& b) {
    if (a.burned.size() != b.burned.size())
        throw ConfigError("jaccard: mask shapes differ");
    std::size_t inter = 0, uni = 0;
    for (std::size_t c = 0; c < a.burned.size(); ++c) {
        const bool in_a = a.burned[c] != 0, in_b = b.burned[c] != 0;
        inter += in_a && in_b;
        uni += in_a || in_b;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Front observations grouped by timestamp.
struct IsochroneSet {
    struct Group {
        double t = 0.0;
        std::vector<std::array<double, 2>> points;
    };
    std::vector<Group> groups;

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& g : groups) n += g.points.size();
        return n;
    }
};

/// Monte-Carlo posterior-predictive ensemble over the full space-time grid.
/// Stores per-cell burned counts and the member-mean level-set surface per
/// time index; memberwise surfaces can be streamed out by the producer.
struct McEnsemble {
    GridSpec grid;
    int n_mc = 0;
    std::vector<std::vector<std::uint32_t>> burned_count;  // [time][cell]
    std::vector<std::vector<double>> mean_surface;         // [time][cell]
};

struct PredictiveBand {
    GridSpec grid;
    double level = 0.95;
    std::vector<std::vector<std::uint8_t>> in_band;     // [time][cell]
    std::vector<std::vector<Polyline>> mean_front;      // [time]
};

/// Band of cells whose burned fraction p across members satisfies
/// (1-level)/2 < p < 1-(1-level)/2 (open interval: unanimous cells are
/// excluded, so an ensemble of identical members gives an empty band).
/// The mean front is the zero level set of the member-mean surface.
inline PredictiveBand predictive_band(const McEnsemble& ens, double level = 0.95) {
    if (ens.n_mc < 2) throw ConfigError("predictive_band: need at least 2 members");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("predictive_band: level must be in (0,1)");
    PredictiveBand band;
    band.grid = ens.grid;
    band.level = level;
    const double lo = (1.0 - level) / 2.0;
    const double hi = 1.0 - lo;
    band.in_band.resize(ens.burned_count.size());
    band.mean_front.resize(ens.burned_count.size());
    for (std::size_t n = 0; n < ens.burned_count.size(); ++n) {
        const auto& counts = ens.burned_count[n];
        auto& cells = band.in_band[n];
        cells.assign(counts.size(), 0);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            const double p = static_cast<double>(counts[c]) / ens.n_mc;
            cells[c] = (p > lo && p < hi) ? 1 : 0;
        }
        ScalarField mean(ens.grid);
        mean.values = ens.mean_surface[n];
        band.mean_front[n] = extract_zero_level_set(mean);
    }
    return band;
}

struct CoverageResult {
    std::vector<std::pair<double, double>> per_time;  // (t, fraction)
    double mean = 0.0;
};

/// Fraction of truth front points whose containing cell lies in the
/// predictive band, per time and averaged. Truth timestamps must align to
/// ensemble time indices within dt/2; points must lie inside the grid.
inline CoverageResult coverage(const McEnsemble& ens, const IsochroneSet& truth,
                               double level = 0.95) {
    const PredictiveBand band = predictive_band(ens, level);
    const GridSpec& g = ens.grid;
    CoverageResult res;
    double sum = 0.0;
    for (const auto& group : truth.groups) {
        const double rel = (group.t - g.t_min) / g.dt();
        const int n = static_cast<int>(std::lround(rel));
        if (std::abs(rel - n) > 0.5 + 1e-9 || n < 0 ||
            n >= static_cast<int>(band.in_band.size()))
            throw ConfigError("coverage: truth timestamp " + std::to_string(group.t) +
                              " does not align to an ensemble time index");
        std::size_t hit = 0;
        for (const auto& p : group.points) {
            if (!g.contains(p[0], p[1]))
                throw ConfigError("coverage: truth point outside grid bounds");
            const int ci = g.cell_index_x(p[0]);
            const int cj = g.cell_index_y(p[1]);
            hit += band.in_band[n][static_cast<std::size_t>(ci) * g.n_y + cj] != 0;
        }
        const double frac =
            group.points.empty() ? 0.0 : static_cast<double>(hit) / group.points.size();
        res.per_time.emplace_back(group.t, frac);
        sum += frac;
    }
    res.mean = res.per_time.empty() ? 0.0 : sum / res.per_time.size();
    return res;
}

}  // namespace firefront

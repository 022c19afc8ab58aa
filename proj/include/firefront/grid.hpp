#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "firefront/errors.hpp"

namespace firefront {

/// Regular space-time grid. Spatial samples sit at cell centres,
/// x_i = x_min + (i + 1/2) dx, so an odd n_x puts a sample on the domain
/// mid-line. Time levels are t_n = t_min + n dt for n = 0..n_t.
struct GridSpec {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int n_x = 2, n_y = 2;
    double t_min = 0.0, t_max = 1.0;
    int n_t = 1;

    double dx() const { return (x_max - x_min) / n_x; }
    double dy() const { return (y_max - y_min) / n_y; }
    double dt() const { return (t_max - t_min) / n_t; }

    double x(int i) const { return x_min + (i + 0.5) * dx(); }
    double y(int j) const { return y_min + (j + 0.5) * dy(); }
    double t(int n) const { return t_min + n * dt(); }

    int cell_count() const { return n_x * n_y; }

    /// Nearest-cell lookup with ties toward the lower index.
    int cell_index_x(double px) const { return clamp_index((px - x_min) / dx(), n_x); }
    int cell_index_y(double py) const { return clamp_index((py - y_min) / dy(), n_y); }

    bool contains(double px, double py) const {
        return px >= x_min && px <= x_max && py >= y_min && py <= y_max;
    }

    void validate() const {
        if (n_x < 2 || n_y < 2)
            throw ConfigError("grid: n_x and n_y must be >= 2 (got " + std::to_string(n_x) +
                              ", " + std::to_string(n_y) + ")");
        if (n_t < 1) throw ConfigError("grid: n_t must be >= 1 (got " + std::to_string(n_t) + ")");
        if (!(x_min < x_max)) throw ConfigError("grid: x_min must be < x_max");
        if (!(y_min < y_max)) throw ConfigError("grid: y_min must be < y_max");
        if (!(t_min < t_max)) throw ConfigError("grid: t_min must be < t_max");
    }

    bool same_layout(const GridSpec& o) const {
        return n_x == o.n_x && n_y == o.n_y && x_min == o.x_min && x_max == o.x_max &&
               y_min == o.y_min && y_max == o.y_max;
    }

  private:
    static int clamp_index(double r, int n) {
        // exact cell boundaries resolve to the lower cell
        double f = std::floor(r);
        int idx = (f == r && r > 0.0) ? static_cast<int>(f) - 1 : static_cast<int>(f);
        if (idx < 0) idx = 0;
        if (idx > n - 1) idx = n - 1;
        return idx;
    }
};

/// Level-set values on one time slice, indexed (i, j) with i along x.
struct ScalarField {
    GridSpec spec;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : spec(g), values(static_cast<std::size_t>(g.n_x) * g.n_y, fill) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * spec.n_y + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n_y + j]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace firefront

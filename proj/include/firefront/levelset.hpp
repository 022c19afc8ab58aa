#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "firefront/contour.hpp"
#include "firefront/errors.hpp"
#include "firefront/forcing.hpp"
#include "firefront/grid.hpp"

namespace firefront {

/// One-sided differences and the Godunov gradient pair for a field slice.
/// grad_plus / grad_minus are nonnegative by construction.
struct UpwindWorkspace {
    GridSpec spec;
    std::vector<double> d_plus_x, d_minus_x, d_plus_y, d_minus_y;
    std::vector<double> grad_plus, grad_minus;
};

/// Forward/backward differences; a missing neighbour at the boundary is
/// replaced by the available one-sided difference at that cell.
inline UpwindWorkspace one_sided_differences(const ScalarField& u) {
    const GridSpec& g = u.spec;
    const int nx = g.n_x, ny = g.n_y;
    const double inv_dx = 1.0 / g.dx(), inv_dy = 1.0 / g.dy();
    UpwindWorkspace w;
    w.spec = g;
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    w.d_plus_x.resize(n);
    w.d_minus_x.resize(n);
    w.d_plus_y.resize(n);
    w.d_minus_y.resize(n);
    w.grad_plus.resize(n);
    w.grad_minus.resize(n);

    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t c = static_cast<std::size_t>(i) * ny + j;
            const double uc = u.at(i, j);
            double dpx = (i + 1 < nx) ? (u.at(i + 1, j) - uc) * inv_dx
                                      : (uc - u.at(i - 1, j)) * inv_dx;
            double dmx = (i > 0) ? (uc - u.at(i - 1, j)) * inv_dx
                                 : (u.at(i + 1, j) - uc) * inv_dx;
            double dpy = (j + 1 < ny) ? (u.at(i, j + 1) - uc) * inv_dy
                                      : (uc - u.at(i, j - 1)) * inv_dy;
            double dmy = (j > 0) ? (uc - u.at(i, j - 1)) * inv_dy
                                 : (u.at(i, j + 1) - uc) * inv_dy;
            w.d_plus_x[c] = dpx;
            w.d_minus_x[c] = dmx;
            w.d_plus_y[c] = dpy;
            w.d_minus_y[c] = dmy;

            auto sq = [](double v) { return v * v; };
            w.grad_plus[c] = std::sqrt(sq(std::max(dmx, 0.0)) + sq(std::min(dpx, 0.0)) +
                                       sq(std::max(dmy, 0.0)) + sq(std::min(dpy, 0.0)));
            w.grad_minus[c] = std::sqrt(sq(std::min(dmx, 0.0)) + sq(std::max(dpx, 0.0)) +
                                        sq(std::min(dmy, 0.0)) + sq(std::max(dpy, 0.0)));
        }
    }
    return w;
}

namespace detail {

// Central-difference gradient, one-sided at the boundary.
inline void central_gradient(const ScalarField& u, int i, int j, double& gx, double& gy) {
    const GridSpec& g = u.spec;
    if (i > 0 && i + 1 < g.n_x)
        gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.dx());
    else if (i == 0)
        gx = (u.at(1, j) - u.at(0, j)) / g.dx();
    else
        gx = (u.at(i, j) - u.at(i - 1, j)) / g.dx();
    if (j > 0 && j + 1 < g.n_y)
        gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.dy());
    else if (j == 0)
        gy = (u.at(i, 1) - u.at(i, 0)) / g.dy();
    else
        gy = (u.at(i, j) - u.at(i, j - 1)) / g.dy();
}

}  // namespace detail

/// One upwind time step of the level-set equation at time t. The advection
/// magnitude is c = s + max(W.n, 0) with n the central-difference normal;
/// where the gradient norm is below 1e-12 the wind projection is taken as 0.
/// Cells with zero forcing are left unchanged.
inline ScalarField upwind_step(const ScalarField& u, const ForcingField& forcing, double t,
                               double dt) {
    const GridSpec& g = u.spec;
    const UpwindWorkspace w = one_sided_differences(u);
    ScalarField out = u;
    for (int i = 0; i < g.n_x; ++i) {
        for (int j = 0; j < g.n_y; ++j) {
            const Forcing f = forcing(t, g.x(i), g.y(j));
            if (f.s == 0.0 && f.wx == 0.0 && f.wy == 0.0) continue;
            double wdotn = 0.0;
            if (f.wx != 0.0 || f.wy != 0.0) {
                double gx, gy;
                detail::central_gradient(u, i, j, gx, gy);
                const double norm = std::sqrt(gx * gx + gy * gy);
                if (norm >= 1e-12) wdotn = (f.wx * gx + f.wy * gy) / norm;
            }
            const double c = f.s + std::max(wdotn, 0.0);
            const std::size_t cell = static_cast<std::size_t>(i) * g.n_y + j;
            out.at(i, j) = u.at(i, j) - dt * (std::max(c, 0.0) * w.grad_plus[cell] +
                                              std::min(c, 0.0) * w.grad_minus[cell]);
        }
    }
    return out;
}

/// One pseudo-time Euler step of the reinitialisation equation
/// du/dtau = -sign(u0) (|grad u| - 1) with the smeared sign
/// u0 / sqrt(u0^2 + dx^2) and Godunov upwinding keyed on sign(u0).
inline ScalarField reinit_step(const ScalarField& u, const ScalarField& u0, double d_tau) {
    if (!u.spec.same_layout(u0.spec)) throw ConfigError("reinit: u and u0 grids differ");
    if (!(d_tau > 0.0)) throw ConfigError("reinit: pseudo time step must be > 0");
    const GridSpec& g = u.spec;
    const UpwindWorkspace w = one_sided_differences(u);
    const double dx2 = g.dx() * g.dx();
    ScalarField out = u;
    for (std::size_t c = 0; c < u.values.size(); ++c) {
        const double v0 = u0.values[c];
        if (v0 == 0.0) continue;  // smeared sign of 0 is 0: zero set is pinned
        const double sgn = v0 / std::sqrt(v0 * v0 + dx2);
        const double grad = v0 > 0.0 ? w.grad_plus[c] : w.grad_minus[c];
        out.values[c] = u.values[c] - d_tau * sgn * (grad - 1.0);
    }
    return out;
}

struct ReinitConfig {
    int period = 0;             // in time steps; 0 disables reinitialisation
    int inner_iterations = 1;
    double pseudo_time_step = 0.0;  // <= 0 selects the default 0.5 dx

    void validate() const {
        if (period < 0) throw ConfigError("reinit: period must be >= 0");
        if (inner_iterations < 0) throw ConfigError("reinit: inner_iterations must be >= 0");
    }
};

struct SimulationResult {
    GridSpec grid;
    std::vector<ScalarField> snapshots;              // n_t + 1 entries
    std::vector<std::vector<Polyline>> fronts;       // per time index
    std::vector<std::string> warnings;
};

/// Runs the upwind solver over all n_t steps, reinitialising every
/// `period` steps. Throws DivergedError naming the time index if any value
/// becomes non-finite. A conservative CFL check records a warning when
/// dt * max(c) * (1/dx + 1/dy) exceeds 1; nothing is clamped.
inline SimulationResult run_simulation(const ScalarField& u0, const ForcingField& forcing,
                                       const GridSpec& grid, const ReinitConfig& reinit = {}) {
    if (!u0.spec.same_layout(grid))
        throw ConfigError("run_simulation: initial field does not match the grid");
    SimulationResult result;
    result.grid = grid;
    result.snapshots.reserve(grid.n_t + 1);
    result.fronts.reserve(grid.n_t + 1);
    result.snapshots.push_back(u0);
    result.fronts.push_back(extract_zero_level_set(u0));

    const double dtau = reinit.pseudo_time_step > 0.0 ? reinit.pseudo_time_step : 0.5 * grid.dx();
    bool cfl_warned = false;
    ScalarField u = u0;
    for (int n = 1; n <= grid.n_t; ++n) {
        const double t = grid.t(n - 1);
        if (!cfl_warned) {
            double cmax = 0.0;
            for (int i = 0; i < grid.n_x; ++i)
                for (int j = 0; j < grid.n_y; ++j) {
                    const Forcing f = forcing(t, grid.x(i), grid.y(j));
                    cmax = std::max(cmax, f.s + std::hypot(f.wx, f.wy));
                }
            const double cfl = grid.dt() * cmax * (1.0 / grid.dx() + 1.0 / grid.dy());
            if (cfl > 1.0) {
                result.warnings.push_back("CFL estimate " + std::to_string(cfl) +
                                          " > 1 at step " + std::to_string(n) +
                                          "; the scheme may be inaccurate");
                cfl_warned = true;
            }
        }
        u = upwind_step(u, forcing, t, grid.dt());
        if (reinit.period > 0 && n % reinit.period == 0 && reinit.inner_iterations > 0) {
            const ScalarField frozen = u;
            for (int it = 0; it < reinit.inner_iterations; ++it) u = reinit_step(u, frozen, dtau);
        }
        if (!u.all_finite())
            throw DivergedError("simulation diverged: non-finite value at time index " +
                                std::to_string(n));
        result.snapshots.push_back(u);
        result.fronts.push_back(extract_zero_level_set(u));
    }
    return result;
}

}  // namespace firefront

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "firefront/errors.hpp"
#include "firefront/grid.hpp"
#include "firefront/rng.hpp"

namespace firefront {

struct Forcing {
    double s = 0.0;
    double wx = 0.0;
    double wy = 0.0;
};

/// Axis-aligned rectangle; membership is inclusive of the boundary.
struct Rect {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Wind of the first synthetic scenario: northerly until t = 0.1, easterly after.
inline std::pair<double, double> synthetic_wind(double t) {
    if (t <= 0.1) return {0.0, 0.4};
    return {0.4, 0.0};
}

/// Random-walk wind path of the second synthetic scenario: starts at
/// (1e-6, 0.1), each step adds N(0, diag(0.001^2, 0.005^2)). Deterministic
/// per seed (see Rng for the documented generator).
inline std::vector<std::pair<double, double>> synthetic2_wind_path(int count, std::uint64_t seed) {
    if (count < 1) throw ConfigError("wind path: count must be >= 1");
    std::vector<std::pair<double, double>> path;
    path.reserve(count);
    path.emplace_back(1e-6, 0.1);
    Rng rng(seed);
    for (int k = 1; k < count; ++k) {
        const double dx = rng.normal(0.0, 0.001);
        const double dy = rng.normal(0.0, 0.005);
        path.emplace_back(path.back().first + dx, path.back().second + dy);
    }
    return path;
}

enum class WindKind { Constant, StepChange, RandomWalk };
enum class SpeedKind { Constant, XSplit };

struct WindSchedule {
    WindKind kind = WindKind::Constant;
    double wx0 = 0.0, wy0 = 0.0;            // Constant; StepChange before
    double wx1 = 0.0, wy1 = 0.0;            // StepChange after
    double t_change = 0.0;                  // StepChange boundary (inclusive on the left)
    std::vector<std::pair<double, double>> walk;  // RandomWalk table, one entry per time level
    double walk_t_min = 0.0, walk_dt = 1.0;
    std::uint64_t walk_seed = 0;
    double rotation_deg = 0.0;              // applied to the evaluated vector

    std::pair<double, double> eval(double t) const {
        double wx = wx0, wy = wy0;
        switch (kind) {
            case WindKind::Constant: break;
            case WindKind::StepChange:
                if (t > t_change) {
                    wx = wx1;
                    wy = wy1;
                }
                break;
            case WindKind::RandomWalk: {
                int k = static_cast<int>(std::floor((t - walk_t_min) / walk_dt + 1e-9));
                if (k < 0) k = 0;
                if (k > static_cast<int>(walk.size()) - 1) k = static_cast<int>(walk.size()) - 1;
                wx = walk[k].first;
                wy = walk[k].second;
                break;
            }
        }
        if (rotation_deg != 0.0) {
            const double phi = rotation_deg * 3.14159265358979323846 / 180.0;
            const double c = std::cos(phi), s = std::sin(phi);
            const double rx = wx * c - wy * s;
            const double ry = wx * s + wy * c;
            wx = rx;
            wy = ry;
        }
        return {wx, wy};
    }
};

struct SpeedMap {
    SpeedKind kind = SpeedKind::Constant;
    double s0 = 0.0;                       // Constant
    double s_left = 0.0, s_right = 0.0;    // XSplit
    double x_split = 0.0;

    double eval(double /*t*/, double x, double /*y*/) const {
        if (kind == SpeedKind::Constant) return s0;
        return x < x_split ? s_left : s_right;
    }
};

/// Forcing evaluable at any (t,x,y). Inside any obstruction rectangle both
/// the speed and the wind are exactly zero. Evaluation is pure.
struct ForcingField {
    SpeedMap speed;
    WindSchedule wind;
    std::vector<Rect> obstructions;

    Forcing operator()(double t, double x, double y) const {
        for (const Rect& r : obstructions)
            if (r.contains(x, y)) return {0.0, 0.0, 0.0};
        const auto [wx, wy] = wind.eval(t);
        return {speed.eval(t, x, y), wx, wy};
    }

    bool obstructed(double x, double y) const {
        for (const Rect& r : obstructions)
            if (r.contains(x, y)) return true;
        return false;
    }
};

/// The two shipped scenarios. `wind_rotation_deg` perturbs the wind schedule
/// (used to build synthetic "truth" twins); 0 reproduces the nominal setup.
inline ForcingField build_scenario(const std::string& name, const GridSpec& grid,
                                   std::uint64_t seed, double wind_rotation_deg = 0.0) {
    ForcingField f;
    if (name == "synthetic") {
        f.speed = {SpeedKind::Constant, 0.4, 0.0, 0.0, 0.0};
        f.wind.kind = WindKind::StepChange;
        f.wind.wx0 = 0.0;
        f.wind.wy0 = 0.4;
        f.wind.wx1 = 0.4;
        f.wind.wy1 = 0.0;
        f.wind.t_change = 0.1;
        f.obstructions = {{0.0, 0.2, 0.2, 0.8}};
    } else if (name == "synthetic2") {
        f.speed.kind = SpeedKind::XSplit;
        f.speed.s_left = 0.25;
        f.speed.s_right = 0.15;
        f.speed.x_split = 0.5;
        f.wind.kind = WindKind::RandomWalk;
        f.wind.walk = synthetic2_wind_path(grid.n_t + 1, seed);
        f.wind.walk_t_min = grid.t_min;
        f.wind.walk_dt = grid.dt();
        f.wind.walk_seed = seed;
        f.obstructions = {{0.0, 0.2, 0.2, 0.8}, {0.7, 0.8, 0.4, 0.5}, {0.7, 0.8, 0.6, 0.7}};
    } else {
        throw ConfigError("unknown scenario '" + name + "' (expected synthetic or synthetic2)");
    }
    f.wind.rotation_deg = wind_rotation_deg;
    return f;
}

}  // namespace firefront

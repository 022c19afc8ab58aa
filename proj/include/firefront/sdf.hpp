#pragma once

#include <cmath>
#include <string>

#include "firefront/errors.hpp"
#include "firefront/grid.hpp"

namespace firefront {

/// Distance from (px,py) to the circle of radius r centred at (cx,cy);
/// negative inside, zero on the circle.
inline double cone_sdf(double px, double py, double cx, double cy, double r) {
    const double dx = px - cx;
    const double dy = py - cy;
    return std::sqrt(dx * dx + dy * dy) - r;
}

enum class SdfVariant { Cone, EllipticalCone };

struct SdfSpec {
    SdfVariant variant = SdfVariant::Cone;
    double r = 0.1;      // offset; the zero set of the cone is the circle of this radius
    double a = 1.0;      // ellipse semi-axis scales (elliptical variant)
    double b = 1.0;
    double alpha = 0.0;  // ellipse rotation, radians
    double cx = 0.5, cy = 0.5;

    void validate() const {
        if (variant == SdfVariant::EllipticalCone && (a <= 0.0 || b <= 0.0))
            throw ConfigError("sdf: elliptical cone requires a > 0 and b > 0");
    }
};

inline double elliptical_cone_sdf(double px, double py, const SdfSpec& spec) {
    if (spec.a <= 0.0 || spec.b <= 0.0)
        throw ConfigError("sdf: elliptical cone requires a > 0 and b > 0");
    const double xc = px - spec.cx;
    const double yc = py - spec.cy;
    const double ca = std::cos(spec.alpha);
    const double sa = std::sin(spec.alpha);
    const double u = xc * ca + yc * sa;
    const double v = xc * sa - yc * ca;
    return std::sqrt(u * u / (spec.a * spec.a) + v * v / (spec.b * spec.b)) - spec.r;
}

inline double evaluate_sdf(const SdfSpec& spec, double px, double py) {
    if (spec.variant == SdfVariant::Cone) return cone_sdf(px, py, spec.cx, spec.cy, spec.r);
    return elliptical_cone_sdf(px, py, spec);
}

/// Samples the signed-distance initialiser onto a grid slice.
inline ScalarField sdf_field(const GridSpec& grid, const SdfSpec& spec) {
    ScalarField f(grid);
    for (int i = 0; i < grid.n_x; ++i)
        for (int j = 0; j < grid.n_y; ++j) f.at(i, j) = evaluate_sdf(spec, grid.x(i), grid.y(j));
    return f;
}

}  // namespace firefront

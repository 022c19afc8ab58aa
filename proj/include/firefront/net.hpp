#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "firefront/errors.hpp"
#include "firefront/rng.hpp"

namespace firefront {

enum class Activation { Tanh, Relu };

inline std::string activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }
inline Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw ConfigError("unknown activation '" + s + "'");
}

/// Two hidden layers, 6 inputs (t, x, y, s, wx, wy), scalar output.
struct NetworkShape {
    int h1 = 64;
    int h2 = 64;
    Activation activation = Activation::Tanh;

    static constexpr int input_dim = 6;

    std::size_t param_count() const {
        return static_cast<std::size_t>(h1) * input_dim + h1 +
               static_cast<std::size_t>(h2) * h1 + h2 + static_cast<std::size_t>(h2) + 1;
    }
    // flat layout: W1 (h1 x 6) | b1 | W2 (h2 x h1) | b2 | W3 (1 x h2) | b3
    std::size_t w1_off() const { return 0; }
    std::size_t b1_off() const { return static_cast<std::size_t>(h1) * input_dim; }
    std::size_t w2_off() const { return b1_off() + h1; }
    std::size_t b2_off() const { return w2_off() + static_cast<std::size_t>(h2) * h1; }
    std::size_t w3_off() const { return b2_off() + h2; }
    std::size_t b3_off() const { return w3_off() + h2; }

    bool operator==(const NetworkShape& o) const {
        return h1 == o.h1 && h2 == o.h2 && activation == o.activation;
    }
};

/// Weights and biases in one flat buffer (matrices row-major).
struct NetworkParams {
    NetworkShape shape;
    std::vector<double> data;

    NetworkParams() = default;
    explicit NetworkParams(const NetworkShape& s) : shape(s), data(s.param_count(), 0.0) {}

    std::span<double> w1() { return {data.data() + shape.w1_off(), static_cast<std::size_t>(shape.h1) * 6}; }
    std::span<double> b1() { return {data.data() + shape.b1_off(), static_cast<std::size_t>(shape.h1)}; }
    std::span<double> w2() { return {data.data() + shape.w2_off(), static_cast<std::size_t>(shape.h2) * shape.h1}; }
    std::span<double> b2() { return {data.data() + shape.b2_off(), static_cast<std::size_t>(shape.h2)}; }
    std::span<double> w3() { return {data.data() + shape.w3_off(), static_cast<std::size_t>(shape.h2)}; }
    double& b3() { return data[shape.b3_off()]; }

    std::span<const double> w1() const { return {data.data() + shape.w1_off(), static_cast<std::size_t>(shape.h1) * 6}; }
    std::span<const double> b1() const { return {data.data() + shape.b1_off(), static_cast<std::size_t>(shape.h1)}; }
    std::span<const double> w2() const { return {data.data() + shape.w2_off(), static_cast<std::size_t>(shape.h2) * shape.h1}; }
    std::span<const double> b2() const { return {data.data() + shape.b2_off(), static_cast<std::size_t>(shape.h2)}; }
    std::span<const double> w3() const { return {data.data() + shape.w3_off(), static_cast<std::size_t>(shape.h2)}; }
    double b3() const { return data[shape.b3_off()]; }
};

namespace act {

inline double eval(Activation a, double z) {
    return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}
// first derivative expressed through value and pre-activation;
// relu'(0) is defined as 0
inline double d1(Activation a, double z, double v) {
    return a == Activation::Tanh ? 1.0 - v * v : (z > 0.0 ? 1.0 : 0.0);
}
inline double d2(Activation a, double /*z*/, double v, double d1v) {
    return a == Activation::Tanh ? -2.0 * v * d1v : 0.0;
}

}  // namespace act

/// Output, spatio-temporal input gradients, and the cached intermediate
/// state needed for the parameter backward pass.
struct EvalRecord {
    double u = 0.0;
    std::array<double, 3> du = {0.0, 0.0, 0.0};  // d/dt, d/dx, d/dy

    std::array<double, 6> in = {};
    std::vector<double> z1, a1, g1p;     // h1
    std::vector<double> t1;              // h1 x 3: tangents of layer-1 activations
    std::vector<double> z2, a2, g2p;     // h2
    std::vector<double> t2pre, t2;       // h2 x 3
};

/// Forward pass with exact forward-mode derivatives along the first three
/// inputs (t, x, y). The remaining inputs are never differentiated against.
inline EvalRecord forward(std::span<const double, 6> in, const NetworkParams& p) {
    const NetworkShape& s = p.shape;
    const int h1 = s.h1, h2 = s.h2;
    EvalRecord r;
    for (int k = 0; k < 6; ++k) r.in[k] = in[k];
    r.z1.resize(h1);
    r.a1.resize(h1);
    r.g1p.resize(h1);
    r.t1.assign(static_cast<std::size_t>(h1) * 3, 0.0);
    r.z2.resize(h2);
    r.a2.resize(h2);
    r.g2p.resize(h2);
    r.t2pre.assign(static_cast<std::size_t>(h2) * 3, 0.0);
    r.t2.assign(static_cast<std::size_t>(h2) * 3, 0.0);

    const auto w1 = p.w1();
    const auto b1 = p.b1();
    for (int i = 0; i < h1; ++i) {
        double z = b1[i];
        for (int k = 0; k < 6; ++k) z += w1[static_cast<std::size_t>(i) * 6 + k] * in[k];
        r.z1[i] = z;
        r.a1[i] = act::eval(s.activation, z);
        r.g1p[i] = act::d1(s.activation, z, r.a1[i]);
        // tangent of a1 along input direction d is g'(z1) * W1[:, d]
        for (int d = 0; d < 3; ++d)
            r.t1[static_cast<std::size_t>(i) * 3 + d] =
                r.g1p[i] * w1[static_cast<std::size_t>(i) * 6 + d];
    }

    const auto w2 = p.w2();
    const auto b2 = p.b2();
    for (int i = 0; i < h2; ++i) {
        double z = b2[i];
        std::array<double, 3> tp = {0.0, 0.0, 0.0};
        const std::size_t row = static_cast<std::size_t>(i) * h1;
        for (int k = 0; k < h1; ++k) {
            const double wv = w2[row + k];
            z += wv * r.a1[k];
            for (int d = 0; d < 3; ++d) tp[d] += wv * r.t1[static_cast<std::size_t>(k) * 3 + d];
        }
        r.z2[i] = z;
        r.a2[i] = act::eval(s.activation, z);
        r.g2p[i] = act::d1(s.activation, z, r.a2[i]);
        for (int d = 0; d < 3; ++d) {
            r.t2pre[static_cast<std::size_t>(i) * 3 + d] = tp[d];
            r.t2[static_cast<std::size_t>(i) * 3 + d] = r.g2p[i] * tp[d];
        }
    }

    const auto w3 = p.w3();
    double u = p.b3();
    std::array<double, 3> du = {0.0, 0.0, 0.0};
    for (int i = 0; i < h2; ++i) {
        u += w3[i] * r.a2[i];
        for (int d = 0; d < 3; ++d) du[d] += w3[i] * r.t2[static_cast<std::size_t>(i) * 3 + d];
    }
    r.u = u;
    r.du = du;
    return r;
}

/// Adjoint seeds for the scalar objective a*u + bt*du_t + bx*du_x + by*du_y.
struct GradSeeds {
    double a = 0.0;
    double bt = 0.0;
    double bx = 0.0;
    double by = 0.0;
};

/// Exact parameter gradient of the seeded objective, accumulated into
/// `grad` (same flat layout as NetworkParams). The backward pass runs
/// through both the primal values and the input-derivative tangents, so
/// second-order terms through the hidden layers are included.
inline void param_gradient(const GradSeeds& seeds, const EvalRecord& r, const NetworkParams& p,
                           std::span<double> grad) {
    const NetworkShape& s = p.shape;
    const int h1 = s.h1, h2 = s.h2;
    if (grad.size() != p.data.size())
        throw ConfigError("param_gradient: gradient buffer size mismatch");
    const std::array<double, 3> b = {seeds.bt, seeds.bx, seeds.by};

    const auto w1 = p.w1();
    const auto w2 = p.w2();
    const auto w3 = p.w3();
    double* gw1 = grad.data() + s.w1_off();
    double* gb1 = grad.data() + s.b1_off();
    double* gw2 = grad.data() + s.w2_off();
    double* gb2 = grad.data() + s.b2_off();
    double* gw3 = grad.data() + s.w3_off();
    double* gb3 = grad.data() + s.b3_off();

    // output layer
    *gb3 += seeds.a;
    std::vector<double> a2bar(h2), t2bar(static_cast<std::size_t>(h2) * 3);
    for (int i = 0; i < h2; ++i) {
        double gw = seeds.a * r.a2[i];
        for (int d = 0; d < 3; ++d) gw += b[d] * r.t2[static_cast<std::size_t>(i) * 3 + d];
        gw3[i] += gw;
        a2bar[i] = seeds.a * w3[i];
        for (int d = 0; d < 3; ++d) t2bar[static_cast<std::size_t>(i) * 3 + d] = b[d] * w3[i];
    }

    // second hidden layer
    std::vector<double> z2bar(h2), t2prebar(static_cast<std::size_t>(h2) * 3);
    for (int i = 0; i < h2; ++i) {
        const double g2pp = act::d2(s.activation, r.z2[i], r.a2[i], r.g2p[i]);
        double zb = r.g2p[i] * a2bar[i];
        for (int d = 0; d < 3; ++d) {
            const std::size_t idx = static_cast<std::size_t>(i) * 3 + d;
            t2prebar[idx] = r.g2p[i] * t2bar[idx];
            zb += g2pp * r.t2pre[idx] * t2bar[idx];
        }
        z2bar[i] = zb;
        gb2[i] += zb;
    }

    std::vector<double> a1bar(h1, 0.0), t1bar(static_cast<std::size_t>(h1) * 3, 0.0);
    for (int i = 0; i < h2; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * h1;
        for (int k = 0; k < h1; ++k) {
            double gw = z2bar[i] * r.a1[k];
            for (int d = 0; d < 3; ++d)
                gw += t2prebar[static_cast<std::size_t>(i) * 3 + d] *
                      r.t1[static_cast<std::size_t>(k) * 3 + d];
            gw2[row + k] += gw;
            a1bar[k] += w2[row + k] * z2bar[i];
            for (int d = 0; d < 3; ++d)
                t1bar[static_cast<std::size_t>(k) * 3 + d] +=
                    w2[row + k] * t2prebar[static_cast<std::size_t>(i) * 3 + d];
        }
    }

    // first hidden layer; the tangent of z1 along direction d is W1[:, d]
    for (int i = 0; i < h1; ++i) {
        const double g1pp = act::d2(s.activation, r.z1[i], r.a1[i], r.g1p[i]);
        double zb = r.g1p[i] * a1bar[i];
        for (int d = 0; d < 3; ++d) {
            const std::size_t idx = static_cast<std::size_t>(i) * 3 + d;
            zb += g1pp * w1[static_cast<std::size_t>(i) * 6 + d] * t1bar[idx];
            // direct dependence of the layer-1 tangent on W1[:, d]
            gw1[static_cast<std::size_t>(i) * 6 + d] += r.g1p[i] * t1bar[idx];
        }
        gb1[i] += zb;
        for (int k = 0; k < 6; ++k) gw1[static_cast<std::size_t>(i) * 6 + k] += zb * r.in[k];
    }
}

/// Glorot-uniform weights, zero biases; deterministic per seed.
inline NetworkParams init_params(const NetworkShape& shape, std::uint64_t seed) {
    NetworkParams p(shape);
    Rng rng(seed);
    auto fill = [&](std::span<double> w, int fan_in, int fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : w) v = rng.uniform(-bound, bound);
    };
    fill(p.w1(), 6, shape.h1);
    fill(p.w2(), shape.h1, shape.h2);
    fill(p.w3(), shape.h2, 1);
    return p;
}

}  // namespace firefront

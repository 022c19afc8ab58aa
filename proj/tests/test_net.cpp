#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "firefront/net.hpp"
#include "firefront/rng.hpp"

using namespace firefront;

namespace {

// central finite difference of a scalar function of one coordinate
template <typename F>
double central_fd(F f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-12});
    return std::abs(got - want) / denom;
}

NetworkParams random_params(const NetworkShape& shape, std::uint64_t seed, double scale = 1.0) {
    NetworkParams p = init_params(shape, seed);
    Rng rng(seed + 17);
    for (double& b : p.b1()) b = scale * rng.normal(0.0, 0.3);
    for (double& b : p.b2()) b = scale * rng.normal(0.0, 0.3);
    p.b3() = scale * rng.normal(0.0, 0.3);
    return p;
}

// keeps relu pre-activations away from the kink
bool relu_safe(const EvalRecord& r, double margin) {
    for (double z : r.z1)
        if (std::abs(z) < margin) return false;
    for (double z : r.z2)
        if (std::abs(z) < margin) return false;
    return true;
}

}  // namespace

TEST_CASE("constant network returns the output bias") {
    NetworkShape shape{4, 5, Activation::Tanh};
    NetworkParams p(shape);
    p.b3() = 2.5;
    const std::array<double, 6> in = {0.3, -0.2, 0.9, 0.1, 0.0, 0.4};
    const EvalRecord r = forward(std::span<const double, 6>(in), p);
    CHECK(r.u == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.du[0] == 0.0);
    CHECK(r.du[1] == 0.0);
    CHECK(r.du[2] == 0.0);
}

TEST_CASE("scalar chain through two tanh units") {
    // h1 = h2 = 1, every weight 1, biases 0, inputs all 0:
    // u = tanh(tanh(0)) = 0, du/dt = sech^2(0) * sech^2(0) * 1 = 1
    NetworkShape shape{1, 1, Activation::Tanh};
    NetworkParams p(shape);
    for (double& v : p.w1()) v = 1.0;
    for (double& v : p.w2()) v = 1.0;
    for (double& v : p.w3()) v = 1.0;
    const std::array<double, 6> in = {};
    const EvalRecord r = forward(std::span<const double, 6>(in), p);
    CHECK(r.u == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.du[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.du[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.du[2] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("input gradients match finite differences") {
    const double h = 1e-5;
    for (auto act : {Activation::Tanh, Activation::Relu}) {
        NetworkShape shape{9, 7, act};
        int checked = 0;
        std::uint64_t draw = 0;
        while (checked < 100) {
            NetworkParams p = random_params(shape, 1000 + draw);
            Rng rng(2000 + draw);
            ++draw;
            std::array<double, 6> in;
            for (double& v : in) v = rng.uniform(-1.0, 1.0);
            const EvalRecord r = forward(std::span<const double, 6>(in), p);
            if (act == Activation::Relu && !relu_safe(r, 1e-3)) continue;
            for (int d = 0; d < 3; ++d) {
                auto f = [&](double v) {
                    std::array<double, 6> probe = in;
                    probe[d] = v;
                    return forward(std::span<const double, 6>(probe), p).u;
                };
                const double fd = central_fd(f, in[d], h);
                if (act == Activation::Tanh)
                    CHECK(rel_err(r.du[d], fd) < 1e-5);
                else
                    CHECK(rel_err(r.du[d], fd) < 1e-5);
            }
            ++checked;
        }
    }
}

TEST_CASE("parameter gradient: trivial seeds") {
    NetworkShape shape{3, 3, Activation::Tanh};
    NetworkParams p = random_params(shape, 5);
    const std::array<double, 6> in = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const EvalRecord r = forward(std::span<const double, 6>(in), p);

    SUBCASE("zero seeds give a zero gradient") {
        std::vector<double> grad(p.data.size(), 0.0);
        param_gradient({0, 0, 0, 0}, r, p, grad);
        for (double g : grad) CHECK(g == 0.0);
    }
    SUBCASE("constant network with value seed touches only the output bias") {
        NetworkParams zero(shape);
        const EvalRecord rz = forward(std::span<const double, 6>(in), zero);
        std::vector<double> grad(zero.data.size(), 0.0);
        param_gradient({1, 0, 0, 0}, rz, zero, grad);
        for (std::size_t k = 0; k + 1 < grad.size(); ++k) CHECK(grad[k] == 0.0);
        CHECK(grad.back() == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("parameter gradients match finite differences, value and derivative seeds") {
    // exercises the second-order pathway (d^2 u / dx dtheta)
    const double h = 1e-6;
    NetworkShape shape{6, 5, Activation::Tanh};
    int checked = 0;
    for (std::uint64_t draw = 0; checked < 20; ++draw) {
        NetworkParams p = random_params(shape, 3000 + draw);
        Rng rng(4000 + draw);
        std::array<double, 6> in;
        for (double& v : in) v = rng.uniform(-1.0, 1.0);
        const GradSeeds seeds{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-1, 1)};
        const EvalRecord r = forward(std::span<const double, 6>(in), p);
        std::vector<double> grad(p.data.size(), 0.0);
        param_gradient(seeds, r, p, grad);

        auto objective = [&](const NetworkParams& q) {
            const EvalRecord rr = forward(std::span<const double, 6>(in), q);
            return seeds.a * rr.u + seeds.bt * rr.du[0] + seeds.bx * rr.du[1] +
                   seeds.by * rr.du[2];
        };
        double worst = 0.0;
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            NetworkParams q = p;
            q.data[k] = p.data[k] + h;
            const double up = objective(q);
            q.data[k] = p.data[k] - h;
            const double dn = objective(q);
            const double fd = (up - dn) / (2.0 * h);
            worst = std::max(worst, rel_err(grad[k], fd));
        }
        CHECK(worst < 1e-4);
        ++checked;
    }
}

TEST_CASE("parameter gradient is linear in the seeds") {
    NetworkShape shape{5, 4, Activation::Tanh};
    NetworkParams p = random_params(shape, 77);
    const std::array<double, 6> in = {0.2, -0.4, 0.6, 0.3, -0.1, 0.5};
    const EvalRecord r = forward(std::span<const double, 6>(in), p);
    const GradSeeds s1{0.3, -1.2, 0.7, 0.4};
    const GradSeeds s2{-0.8, 0.5, 1.1, -0.6};
    const GradSeeds sum{s1.a + s2.a, s1.bt + s2.bt, s1.bx + s2.bx, s1.by + s2.by};
    std::vector<double> g1(p.data.size(), 0.0), g2(p.data.size(), 0.0), gs(p.data.size(), 0.0);
    param_gradient(s1, r, p, g1);
    param_gradient(s2, r, p, g2);
    param_gradient(sum, r, p, gs);
    for (std::size_t k = 0; k < gs.size(); ++k)
        CHECK(std::abs(gs[k] - (g1[k] + g2[k])) < 1e-12);
}

TEST_CASE("forward is pure") {
    NetworkShape shape{8, 8, Activation::Tanh};
    NetworkParams p = random_params(shape, 11);
    const std::array<double, 6> in = {0.3, 0.1, -0.7, 0.2, 0.0, 0.9};
    const EvalRecord r1 = forward(std::span<const double, 6>(in), p);
    const EvalRecord r2 = forward(std::span<const double, 6>(in), p);
    CHECK(r1.u == r2.u);
    CHECK(r1.du == r2.du);
}

TEST_CASE("init_params determinism, shape, and zero biases") {
    NetworkShape shape{64, 64, Activation::Tanh};
    NetworkParams a = init_params(shape, 42);
    NetworkParams b = init_params(shape, 42);
    CHECK(a.data == b.data);
    CHECK(a.data.size() == 4673);  // 6*64+64 + 64*64+64 + 64*1+1
    for (double v : a.b1()) CHECK(v == 0.0);
    for (double v : a.b2()) CHECK(v == 0.0);
    CHECK(a.b3() == 0.0);
    NetworkParams c = init_params(shape, 43);
    CHECK(a.data != c.data);
    // Glorot bound for W1
    const double bound = std::sqrt(6.0 / (6 + 64));
    for (double v : a.w1()) CHECK(std::abs(v) <= bound);
}

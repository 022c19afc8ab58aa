#pragma once

// Blocked float32 evaluation path used by the trainers and the Monte-Carlo
// predictive pass. Mathematically it mirrors net.hpp exactly; a unit test
// pins the two paths against each other. Per-sample work is organised
// feature-major over fixed-size sample blocks so the hot loops vectorise,
// gradients are accumulated per block in double and folded in block order,
// which makes results bit-deterministic and independent of the thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "firefront/forcing.hpp"
#include "firefront/grid.hpp"
#include "firefront/net.hpp"
#include "firefront/pinn.hpp"

namespace firefront {

/// Sample block width. Hot buffers are padded to this width; pad lanes carry
/// zero inputs and zero seeds so they never contribute.
inline constexpr int kBlock = 128;

namespace batchdet {

// rational tanh approximation, accurate to ~1e-7 over the clamp range;
// saturates beyond |x| ~ 7.99 like the exact function at float precision
__attribute__((always_inline)) inline float tanh_approx(float x) {
    const float cap = 7.99881172180175781f;
    const float v = std::min(std::max(x, -cap), cap);
    const float x2 = v * v;
    // numerator: x * (a1 + x2 (a3 + x2 (a5 + x2 (a7 + x2 (a9 + x2 (a11 + x2 a13))))))
    float num = -2.76076847742355e-16f;
    num = num * x2 + 2.00018790482477e-13f;
    num = num * x2 + -8.60467152213735e-11f;
    num = num * x2 + 5.12229709037114e-08f;
    num = num * x2 + 1.48572235717979e-05f;
    num = num * x2 + 6.37261928875436e-04f;
    num = num * x2 + 4.89352455891786e-03f;
    num *= v;
    float den = 1.19825839466702e-06f;
    den = den * x2 + 1.18534705686654e-04f;
    den = den * x2 + 2.26843463243900e-03f;
    den = den * x2 + 4.89352518554385e-03f;
    return num / den;
}

// C (m x kBlock) (+)= A (m x k, row major) * B (k x kBlock)
inline void gemm_block(int m, int k, const float* __restrict a, const float* __restrict b,
                       float* __restrict c, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        float* __restrict crow = c + static_cast<std::size_t>(i) * kBlock;
        if (!accumulate)
            for (int n = 0; n < kBlock; ++n) crow[n] = 0.0f;
        const float* __restrict arow = a + static_cast<std::size_t>(i) * k;
        int kk = 0;
        for (; kk + 4 <= k; kk += 4) {
            const float a0 = arow[kk];
            const float a1 = arow[kk + 1];
            const float a2 = arow[kk + 2];
            const float a3 = arow[kk + 3];
            const float* __restrict b0 = b + static_cast<std::size_t>(kk) * kBlock;
            const float* __restrict b1 = b0 + kBlock;
            const float* __restrict b2 = b1 + kBlock;
            const float* __restrict b3 = b2 + kBlock;
            for (int n = 0; n < kBlock; ++n)
                crow[n] += (a0 * b0[n] + a1 * b1[n]) + (a2 * b2[n] + a3 * b3[n]);
        }
        for (; kk < k; ++kk) {
            const float a0 = arow[kk];
            const float* __restrict b0 = b + static_cast<std::size_t>(kk) * kBlock;
            for (int n = 0; n < kBlock; ++n) crow[n] += a0 * b0[n];
        }
    }
}

// reductions over a block row use a fixed 16-lane partial-sum pattern:
// deterministic reassociation that the compiler can keep in one vector register

__attribute__((always_inline)) inline float row_sum(const float* __restrict row) {
    float acc[16] = {};
    for (int n = 0; n < kBlock; n += 16)
        for (int l = 0; l < 16; ++l) acc[l] += row[n + l];
    float total = 0.0f;
    for (int l = 0; l < 16; ++l) total += acc[l];
    return total;
}

__attribute__((always_inline)) inline float row_dot(const float* __restrict a,
                                                    const float* __restrict b) {
    float acc[16] = {};
    for (int n = 0; n < kBlock; n += 16)
        for (int l = 0; l < 16; ++l) acc[l] += a[n + l] * b[n + l];
    float total = 0.0f;
    for (int l = 0; l < 16; ++l) total += acc[l];
    return total;
}

// scratch (kBlock x k) <- M (k x kBlock)^T
inline void transpose_block(int k, const float* __restrict mm, float* __restrict mt) {
    for (int j = 0; j < k; ++j) {
        const float* __restrict row = mm + static_cast<std::size_t>(j) * kBlock;
        for (int n = 0; n < kBlock; ++n) mt[static_cast<std::size_t>(n) * k + j] = row[n];
    }
}

// C (m x k, row major, float) += S (m x kBlock) * M (k x kBlock)^T.
// Runs as a plain GEMM against the transposed panel in `mt_scratch`
// (capacity kBlock * k) so the inner loop stays contiguous.
inline void gemm_rank_update(int m, int k, const float* __restrict s, const float* __restrict mm,
                             float* __restrict c, float* __restrict mt_scratch) {
    transpose_block(k, mm, mt_scratch);
    for (int i = 0; i < m; ++i) {
        const float* __restrict srow = s + static_cast<std::size_t>(i) * kBlock;
        float* __restrict crow = c + static_cast<std::size_t>(i) * k;
        int n = 0;
        for (; n + 2 <= kBlock; n += 2) {
            const float s0 = srow[n];
            const float s1 = srow[n + 1];
            const float* __restrict m0 = mt_scratch + static_cast<std::size_t>(n) * k;
            const float* __restrict m1 = m0 + k;
            for (int j = 0; j < k; ++j) crow[j] += s0 * m0[j] + s1 * m1[j];
        }
        for (; n < kBlock; ++n) {
            const float s0 = srow[n];
            const float* __restrict m0 = mt_scratch + static_cast<std::size_t>(n) * k;
            for (int j = 0; j < k; ++j) crow[j] += s0 * m0[j];
        }
    }
}

}  // namespace batchdet

/// Float snapshot of the parameters, refreshed once per epoch.
struct BatchNet {
    NetworkShape shape;
    std::vector<float> w1;    // h1 x 6
    std::vector<float> w1c3;  // 3 x h1: transposed first three W1 columns
    std::vector<float> b1;
    std::vector<float> w2;    // h2 x h1
    std::vector<float> w2t;   // h1 x h2
    std::vector<float> b2;
    std::vector<float> w3;    // h2
    float b3 = 0.0f;

    explicit BatchNet(const NetworkParams& p) : shape(p.shape) {
        const int h1 = shape.h1, h2 = shape.h2;
        w1.resize(static_cast<std::size_t>(h1) * 6);
        w1c3.resize(static_cast<std::size_t>(3) * h1);
        b1.resize(h1);
        w2.resize(static_cast<std::size_t>(h2) * h1);
        w2t.resize(static_cast<std::size_t>(h1) * h2);
        b2.resize(h2);
        w3.resize(h2);
        const auto pw1 = p.w1();
        for (int i = 0; i < h1; ++i) {
            for (int k = 0; k < 6; ++k)
                w1[static_cast<std::size_t>(i) * 6 + k] =
                    static_cast<float>(pw1[static_cast<std::size_t>(i) * 6 + k]);
            for (int d = 0; d < 3; ++d)
                w1c3[static_cast<std::size_t>(d) * h1 + i] =
                    static_cast<float>(pw1[static_cast<std::size_t>(i) * 6 + d]);
        }
        const auto pb1 = p.b1();
        for (int i = 0; i < h1; ++i) b1[i] = static_cast<float>(pb1[i]);
        const auto pw2 = p.w2();
        for (int i = 0; i < h2; ++i)
            for (int k = 0; k < h1; ++k) {
                const float v = static_cast<float>(pw2[static_cast<std::size_t>(i) * h1 + k]);
                w2[static_cast<std::size_t>(i) * h1 + k] = v;
                w2t[static_cast<std::size_t>(k) * h2 + i] = v;
            }
        const auto pb2 = p.b2();
        for (int i = 0; i < h2; ++i) b2[i] = static_cast<float>(pb2[i]);
        const auto pw3 = p.w3();
        for (int i = 0; i < h2; ++i) w3[i] = static_cast<float>(pw3[i]);
        b3 = static_cast<float>(p.b3());
    }
};

/// Feature-major float copy of a sample batch.
struct FeatureBatch {
    std::size_t n = 0;
    std::array<std::vector<float>, 6> col;

    static FeatureBatch from(const SampleBatch& b) {
        FeatureBatch fb;
        fb.n = b.n();
        for (auto& c : fb.col) c.resize(fb.n);
        for (std::size_t k = 0; k < fb.n; ++k) {
            const auto row = b.row(k);
            for (int f = 0; f < 6; ++f) fb.col[f][k] = static_cast<float>(row[f]);
        }
        return fb;
    }
};

/// Per-thread scratch for one block of samples. eval() fills the caches the
/// subsequent reverse() consumes, so the pair must run on the same arena.
class BlockArena {
  public:
    explicit BlockArena(const NetworkShape& shape) : shape_(shape) {
        const int h1 = shape.h1, h2 = shape.h2;
        auto sz1 = static_cast<std::size_t>(h1) * kBlock;
        auto sz2 = static_cast<std::size_t>(h2) * kBlock;
        x_.assign(6 * kBlock, 0.0f);
        a1_.assign(sz1, 0.0f);
        g1p_.assign(sz1, 0.0f);
        v1_.assign(sz1, 0.0f);
        q1_.assign(sz1, 0.0f);
        a2_.assign(sz2, 0.0f);
        g2p_.assign(sz2, 0.0f);
        v2_.assign(sz2, 0.0f);
        c1_.assign(sz1, 0.0f);
        tau1_.assign(sz1, 0.0f);
        tau2pre_.assign(sz2, 0.0f);
        z2bar_.assign(sz2, 0.0f);
        a1bar_.assign(sz1, 0.0f);
        z1bar_.assign(sz1, 0.0f);
        w1g_.assign(static_cast<std::size_t>(h1) * 6, 0.0f);
        w2g_.assign(static_cast<std::size_t>(h2) * h1, 0.0f);
        mt_.assign(static_cast<std::size_t>(kBlock) * std::max({h1, h2, 6}), 0.0f);
        u_.assign(kBlock, 0.0f);
        dut_.assign(kBlock, 0.0f);
        dux_.assign(kBlock, 0.0f);
        duy_.assign(kBlock, 0.0f);
    }

    int count() const { return nb_; }
    const float* u() const { return u_.data(); }
    const float* dut() const { return dut_.data(); }
    const float* dux() const { return dux_.data(); }
    const float* duy() const { return duy_.data(); }

    /// Forward pass over samples [offset, offset+nb) of the batch.
    /// want_grads additionally produces the (t, x, y) input derivatives.
    void eval(const BatchNet& net, const FeatureBatch& fb, std::size_t offset, int nb,
              bool want_grads) {
        nb_ = nb;
        const int h1 = shape_.h1, h2 = shape_.h2;
        for (int f = 0; f < 6; ++f) {
            float* dst = x_.data() + static_cast<std::size_t>(f) * kBlock;
            std::memcpy(dst, fb.col[f].data() + offset, sizeof(float) * nb);
            for (int n = nb; n < kBlock; ++n) dst[n] = 0.0f;
        }
        // layer 1
        batchdet::gemm_block(h1, 6, net.w1.data(), x_.data(), a1_.data(), false);
        activate(net, a1_.data(), g1p_.data(), net.b1.data(), h1);
        // layer 2
        batchdet::gemm_block(h2, h1, net.w2.data(), a1_.data(), a2_.data(), false);
        activate(net, a2_.data(), g2p_.data(), net.b2.data(), h2);
        // output
        for (int n = 0; n < kBlock; ++n) u_[n] = net.b3;
        for (int i = 0; i < h2; ++i) {
            const float w = net.w3[i];
            const float* arow = a2_.data() + static_cast<std::size_t>(i) * kBlock;
            for (int n = 0; n < kBlock; ++n) u_[n] += w * arow[n];
        }
        if (!want_grads) {
            has_grads_ = false;
            return;
        }
        // reverse sweep for the input derivatives:
        // v2 = g2' (.) w3, v1 = W2^T v2, q1 = g1' (.) v1, du_d = w1col_d . q1
        for (int i = 0; i < h2; ++i) {
            const float w = net.w3[i];
            const std::size_t row = static_cast<std::size_t>(i) * kBlock;
            for (int n = 0; n < kBlock; ++n) v2_[row + n] = w * g2p_[row + n];
        }
        batchdet::gemm_block(h1, h2, net.w2t.data(), v2_.data(), v1_.data(), false);
        for (std::size_t idx = 0; idx < v1_.size(); ++idx) q1_[idx] = g1p_[idx] * v1_[idx];
        std::array<float*, 3> dout = {dut_.data(), dux_.data(), duy_.data()};
        for (int d = 0; d < 3; ++d) {
            float* out = dout[d];
            for (int n = 0; n < kBlock; ++n) out[n] = 0.0f;
            const float* wc = net.w1c3.data() + static_cast<std::size_t>(d) * h1;
            for (int i = 0; i < h1; ++i) {
                const float w = wc[i];
                const float* qrow = q1_.data() + static_cast<std::size_t>(i) * kBlock;
                for (int n = 0; n < kBlock; ++n) out[n] += w * qrow[n];
            }
        }
        has_grads_ = true;
    }

    /// Backward pass for the seeded objective
    ///   sum_n a[n] u_n + bt[n] du_t,n + bx[n] du_x,n + by[n] du_y,n,
    /// accumulated into `grad` (flat double layout of NetworkParams).
    /// Derivative seeds require eval(want_grads = true).
    void reverse(const BatchNet& net, const float* a, const float* bt, const float* bx,
                 const float* by, double* grad) {
        const int h1 = shape_.h1, h2 = shape_.h2;
        const NetworkShape& s = shape_;
        const bool with_tangent = bt != nullptr;

        std::fill(w1g_.begin(), w1g_.end(), 0.0f);
        std::fill(w2g_.begin(), w2g_.end(), 0.0f);

        if (with_tangent) {
            // c1 = W1 (bt, bx, by, 0, 0, 0)^T per sample; tau1 = g1' (.) c1
            for (int i = 0; i < h1; ++i) {
                const float wt = net.w1c3[i];
                const float wx = net.w1c3[static_cast<std::size_t>(h1) + i];
                const float wy = net.w1c3[static_cast<std::size_t>(2) * h1 + i];
                const std::size_t row = static_cast<std::size_t>(i) * kBlock;
                for (int n = 0; n < kBlock; ++n) {
                    const float c = wt * bt[n] + wx * bx[n] + wy * by[n];
                    c1_[row + n] = c;
                    tau1_[row + n] = g1p_[row + n] * c;
                }
            }
            batchdet::gemm_block(h2, h1, net.w2.data(), tau1_.data(), tau2pre_.data(), false);
        }

        // z2bar = g2' (.) (a w3) [+ g2'' (.) tau2pre (.) w3]
        const bool is_tanh = s.activation == Activation::Tanh;
        for (int i = 0; i < h2; ++i) {
            const float w = net.w3[i];
            const std::size_t row = static_cast<std::size_t>(i) * kBlock;
            for (int n = 0; n < kBlock; ++n) {
                float zb = g2p_[row + n] * a[n] * w;
                if (with_tangent && is_tanh) {
                    const float g2pp = -2.0f * a2_[row + n] * g2p_[row + n];
                    zb += g2pp * tau2pre_[row + n] * w;
                }
                z2bar_[row + n] = zb;
            }
        }

        // W3, b3 (seed pad lanes are zero, so full-width reductions are safe)
        {
            grad[s.b3_off()] += batchdet::row_sum(a);
            double* gw3 = grad + s.w3_off();
            for (int i = 0; i < h2; ++i) {
                const std::size_t row = static_cast<std::size_t>(i) * kBlock;
                float acc = batchdet::row_dot(a, a2_.data() + row);
                if (with_tangent)
                    acc += batchdet::row_dot(g2p_.data() + row, tau2pre_.data() + row);
                gw3[i] += acc;
            }
        }

        // W2 and its backward products
        batchdet::gemm_rank_update(h2, h1, z2bar_.data(), a1_.data(), w2g_.data(), mt_.data());
        if (with_tangent)
            batchdet::gemm_rank_update(h2, h1, v2_.data(), tau1_.data(), w2g_.data(), mt_.data());
        batchdet::gemm_block(h1, h2, net.w2t.data(), z2bar_.data(), a1bar_.data(), false);

        {
            double* gb2 = grad + s.b2_off();
            for (int i = 0; i < h2; ++i)
                gb2[i] += batchdet::row_sum(z2bar_.data() + static_cast<std::size_t>(i) * kBlock);
            double* gw2 = grad + s.w2_off();
            for (std::size_t idx = 0; idx < w2g_.size(); ++idx) gw2[idx] += w2g_[idx];
        }

        // z1bar = g1' (.) a1bar [+ g1'' (.) c1 (.) v1]; tau1bar equals v1
        for (int i = 0; i < h1; ++i) {
            const std::size_t row = static_cast<std::size_t>(i) * kBlock;
            for (int n = 0; n < kBlock; ++n) {
                float zb = g1p_[row + n] * a1bar_[row + n];
                if (with_tangent && is_tanh) {
                    const float g1pp = -2.0f * a1_[row + n] * g1p_[row + n];
                    zb += g1pp * c1_[row + n] * v1_[row + n];
                }
                z1bar_[row + n] = zb;
            }
        }

        // W1 += z1bar x^T plus the direct tangent term on the first 3 columns
        batchdet::gemm_rank_update(h1, 6, z1bar_.data(), x_.data(), w1g_.data(), mt_.data());
        {
            double* gw1 = grad + s.w1_off();
            double* gb1 = grad + s.b1_off();
            for (int i = 0; i < h1; ++i) {
                const std::size_t row = static_cast<std::size_t>(i) * kBlock;
                gb1[i] += batchdet::row_sum(z1bar_.data() + row);
                for (int k = 0; k < 6; ++k)
                    gw1[static_cast<std::size_t>(i) * 6 + k] +=
                        w1g_[static_cast<std::size_t>(i) * 6 + k];
                if (with_tangent) {
                    // c1bar = g1' (.) v1 = q1
                    const std::array<const float*, 3> bs = {bt, bx, by};
                    for (int d = 0; d < 3; ++d)
                        gw1[static_cast<std::size_t>(i) * 6 + d] +=
                            batchdet::row_dot(bs[d], q1_.data() + row);
                }
            }
        }
    }

  private:
    void activate(const BatchNet& net, float* z_in_a_out, float* g_out, const float* bias,
                  int h) {
        // input buffer holds pre-activations without bias; writes a and g'
        if (shape_.activation == Activation::Tanh) {
            for (int i = 0; i < h; ++i) {
                const float b = bias[i];
                float* row = z_in_a_out + static_cast<std::size_t>(i) * kBlock;
                float* grow = g_out + static_cast<std::size_t>(i) * kBlock;
                for (int n = 0; n < kBlock; ++n) {
                    const float a = batchdet::tanh_approx(row[n] + b);
                    row[n] = a;
                    grow[n] = 1.0f - a * a;
                }
            }
        } else {
            for (int i = 0; i < h; ++i) {
                const float b = bias[i];
                float* row = z_in_a_out + static_cast<std::size_t>(i) * kBlock;
                float* grow = g_out + static_cast<std::size_t>(i) * kBlock;
                for (int n = 0; n < kBlock; ++n) {
                    const float z = row[n] + b;
                    row[n] = z > 0.0f ? z : 0.0f;
                    grow[n] = z > 0.0f ? 1.0f : 0.0f;
                }
            }
        }
    }

    NetworkShape shape_;
    int nb_ = 0;
    bool has_grads_ = false;
    std::vector<float> x_;
    std::vector<float> a1_, g1p_, v1_, q1_;
    std::vector<float> a2_, g2p_, v2_;
    std::vector<float> c1_, tau1_, tau2pre_, z2bar_, a1bar_, z1bar_;
    std::vector<float> w1g_, w2g_, mt_;
    std::vector<float> u_, dut_, dux_, duy_;
};

/// Evaluates the network over every sample of a batch, values only.
inline std::vector<double> batch_values(const NetworkParams& params, const FeatureBatch& fb) {
    BatchNet net(params);
    BlockArena arena(params.shape);
    std::vector<double> out(fb.n);
    for (std::size_t off = 0; off < fb.n; off += kBlock) {
        const int nb = static_cast<int>(std::min<std::size_t>(kBlock, fb.n - off));
        arena.eval(net, fb, off, nb, false);
        for (int n = 0; n < nb; ++n) out[off + n] = arena.u()[n];
    }
    return out;
}

}  // namespace firefront

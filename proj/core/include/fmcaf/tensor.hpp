#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fmcaf/errors.hpp"

namespace fmcaf {

// Dense row-major (batch, channel, height, width) array of 32-bit floats.
// The single value carrier for the whole pipeline.
struct Tensor4 {
    int b = 0, c = 0, h = 0, w = 0;
    std::vector<float> data;

    Tensor4() = default;
    Tensor4(int b_, int c_, int h_, int w_, float fill = 0.0f);

    static Tensor4 from(int b_, int c_, int h_, int w_, std::vector<float> values);

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor4& o) const {
        return b == o.b && c == o.c && h == o.h && w == o.w;
    }

    std::size_t index(int ib, int ic, int iy, int ix) const {
        return ((static_cast<std::size_t>(ib) * c + ic) * h + iy) * w + ix;
    }
    float& at(int ib, int ic, int iy, int ix) { return data[index(ib, ic, iy, ix)]; }
    float at(int ib, int ic, int iy, int ix) const { return data[index(ib, ic, iy, ix)]; }

    float* plane(int ib, int ic) { return data.data() + index(ib, ic, 0, 0); }
    const float* plane(int ib, int ic) const { return data.data() + index(ib, ic, 0, 0); }

    Tensor4 slice_batch(int ib) const;                // (1,C,H,W)
    Tensor4 slice_channels(int c0, int count) const;  // (B,count,H,W)

    bool all_finite() const;
};

// Counter-based generator: the n-th draw depends only on (seed, n), so
// identical seeds give identical sequences on every platform and the
// draw order cannot leak between differently named streams.
struct Rng {
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next_u64();
    float next_uniform();                      // [0, 1)
    float next_uniform(float lo, float hi);

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// A convolution kernel with its bias, the unit all learnable blocks are
// assembled from.
struct ConvLayer {
    Tensor4 weight;             // (Cout, Cin, kh, kw)
    std::vector<float> bias;    // Cout
};

// kernel dims (Cout, Cin, kh, kw), odd kh/kw, zero padding.
Tensor4 conv2d(const Tensor4& x, const Tensor4& kernel, const std::vector<float>& bias,
               int stride = 1, int pad = 0);
Tensor4 conv2d(const Tensor4& x, const ConvLayer& layer, int stride = 1, int pad = 0);

// Numerically stable (max-subtracted) softmax along one axis of the tensor.
Tensor4 softmax(const Tensor4& x, int axis);

// In-place row-wise softmax on a rows x cols matrix. Shared by the attention
// kernels so every score row goes through the same stable normalization.
void softmax_rows(float* m, int rows, int cols);

float sigmoid_scalar(float v);
Tensor4 sigmoid(const Tensor4& x);

// (B,C,M,K) x (B,C,K,P) -> (B,C,M,P), independent product per (b,c) slice.
Tensor4 matmul_batched(const Tensor4& a, const Tensor4& bmat);

// Uniform(-s, s) with s = sqrt(6 / fan_in).
Tensor4 init_params(Rng& rng, int b, int c, int h, int w, int fan_in);

Tensor4 relu(const Tensor4& x);
Tensor4 avg_pool2d(const Tensor4& x, int k, int stride, int pad);
Tensor4 concat(const Tensor4& a, const Tensor4& b, int axis);
Tensor4 add(const Tensor4& a, const Tensor4& b);
Tensor4 mul(const Tensor4& a, const Tensor4& b);
Tensor4 mean_axis(const Tensor4& x, int axis);
Tensor4 upsample_nearest(const Tensor4& x, int out_h, int out_w);

} // namespace fmcaf

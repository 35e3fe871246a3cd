#include "fmcaf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fmcaf {

namespace {

std::string shape_str(const Tensor4& t) {
    return "(" + std::to_string(t.b) + "," + std::to_string(t.c) + "," +
           std::to_string(t.h) + "," + std::to_string(t.w) + ")";
}

void check_axis(int axis) {
    if (axis < 0 || axis > 3)
        throw ShapeError("axis out of range: " + std::to_string(axis));
}

int dim_of(const Tensor4& t, int axis) {
    switch (axis) {
        case 0: return t.b;
        case 1: return t.c;
        case 2: return t.h;
        default: return t.w;
    }
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        hash ^= ch;
        hash *= 0x100000001B3ull;
    }
    return hash;
}

} // namespace

Tensor4::Tensor4(int b_, int c_, int h_, int w_, float fill)
    : b(b_), c(c_), h(h_), w(w_) {
    if (b < 0 || c < 0 || h < 0 || w < 0)
        throw ShapeError("negative tensor dimension");
    data.assign(static_cast<std::size_t>(b) * c * h * w, fill);
}

Tensor4 Tensor4::from(int b_, int c_, int h_, int w_, std::vector<float> values) {
    Tensor4 t;
    t.b = b_;
    t.c = c_;
    t.h = h_;
    t.w = w_;
    if (values.size() != static_cast<std::size_t>(b_) * c_ * h_ * w_)
        throw ShapeError("value count does not match dims");
    t.data = std::move(values);
    return t;
}

Tensor4 Tensor4::slice_batch(int ib) const {
    if (ib < 0 || ib >= b) throw ShapeError("batch index out of range");
    Tensor4 out(1, c, h, w);
    const std::size_t n = static_cast<std::size_t>(c) * h * w;
    std::copy_n(data.begin() + static_cast<std::size_t>(ib) * n, n, out.data.begin());
    return out;
}

Tensor4 Tensor4::slice_channels(int c0, int count) const {
    if (c0 < 0 || count < 0 || c0 + count > c)
        throw ShapeError("channel slice out of range");
    Tensor4 out(b, count, h, w);
    const std::size_t plane_n = static_cast<std::size_t>(h) * w;
    for (int ib = 0; ib < b; ++ib)
        for (int ic = 0; ic < count; ++ic)
            std::copy_n(plane(ib, c0 + ic), plane_n, out.plane(ib, ic));
    return out;
}

bool Tensor4::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed)) {}

Rng::Rng(std::uint64_t seed, std::string_view stream)
    : key_(mix64(mix64(seed) ^ fnv1a(stream))) {}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

float Rng::next_uniform() {
    // Top 24 bits -> [0,1) float; identical across platforms.
    return static_cast<float>(next_u64() >> 40) * (1.0f / 16777216.0f);
}

float Rng::next_uniform(float lo, float hi) {
    return lo + (hi - lo) * next_uniform();
}

Tensor4 conv2d(const Tensor4& x, const Tensor4& kernel, const std::vector<float>& bias,
               int stride, int pad) {
    if (kernel.c != x.c)
        throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.c) +
                         " input channels, got " + std::to_string(x.c));
    if (kernel.h % 2 == 0 || kernel.w % 2 == 0)
        throw ShapeError("conv2d: kernel dims must be odd, got " + std::to_string(kernel.h) +
                         "x" + std::to_string(kernel.w));
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
    if (pad < 0) throw ShapeError("conv2d: negative padding");
    if (bias.size() != static_cast<std::size_t>(kernel.b))
        throw ShapeError("conv2d: bias length does not match output channels");

    const int out_h = (x.h + 2 * pad - kernel.h) / stride + 1;
    const int out_w = (x.w + 2 * pad - kernel.w) / stride + 1;
    if (x.h + 2 * pad < kernel.h || x.w + 2 * pad < kernel.w)
        throw ShapeError("conv2d: kernel larger than padded input " + shape_str(x));

    Tensor4 out(x.b, kernel.b, out_h, out_w);

    // 1x1 / stride 1 / no padding is a pure channel mix; process pixels in
    // chunks so the accumulators stay cache-resident.
    if (kernel.h == 1 && kernel.w == 1 && stride == 1 && pad == 0) {
        const int n = x.h * x.w;
        const int chunk = 4096;
        for (int ib = 0; ib < x.b; ++ib) {
            for (int p0 = 0; p0 < n; p0 += chunk) {
                const int len = std::min(chunk, n - p0);
                for (int co = 0; co < kernel.b; ++co) {
                    float* op = out.plane(ib, co) + p0;
                    std::fill_n(op, len, bias[co]);
                    for (int ci = 0; ci < x.c; ++ci) {
                        const float wv = kernel.at(co, ci, 0, 0);
                        if (wv == 0.0f) continue;
                        const float* ip = x.plane(ib, ci) + p0;
                        for (int i = 0; i < len; ++i) op[i] += wv * ip[i];
                    }
                }
            }
        }
        return out;
    }

    for (int ib = 0; ib < x.b; ++ib) {
        for (int co = 0; co < kernel.b; ++co) {
            float* op = out.plane(ib, co);
            std::fill_n(op, static_cast<std::size_t>(out_h) * out_w, bias[co]);
            for (int oy = 0; oy < out_h; ++oy) {
                float* orow = op + static_cast<std::size_t>(oy) * out_w;
                for (int ci = 0; ci < x.c; ++ci) {
                    const float* ip = x.plane(ib, ci);
                    for (int ky = 0; ky < kernel.h; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= x.h) continue;
                        const float* irow = ip + static_cast<std::size_t>(iy) * x.w;
                        for (int kx = 0; kx < kernel.w; ++kx) {
                            const float wv = kernel.at(co, ci, ky, kx);
                            if (wv == 0.0f) continue;
                            int ox_lo = 0;
                            if (pad - kx > 0) ox_lo = (pad - kx + stride - 1) / stride;
                            const int num = x.w - 1 - kx + pad;
                            if (num < 0) continue;
                            const int ox_hi = std::min(out_w - 1, num / stride);
                            if (stride == 1) {
                                const int off = kx - pad;
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    orow[ox] += wv * irow[ox + off];
                            } else {
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    orow[ox] += wv * irow[ox * stride + kx - pad];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor4 conv2d(const Tensor4& x, const ConvLayer& layer, int stride, int pad) {
    return conv2d(x, layer.weight, layer.bias, stride, pad);
}

void softmax_rows(float* m, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* row = m + static_cast<std::size_t>(r) * cols;
        float mx = row[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const float inv = static_cast<float>(1.0 / sum);
        for (int j = 0; j < cols; ++j) row[j] *= inv;
    }
}

Tensor4 softmax(const Tensor4& x, int axis) {
    check_axis(axis);
    Tensor4 out = x;
    const int dims[4] = {x.b, x.c, x.h, x.w};
    const std::size_t strides[4] = {static_cast<std::size_t>(x.c) * x.h * x.w,
                                    static_cast<std::size_t>(x.h) * x.w,
                                    static_cast<std::size_t>(x.w), 1};
    const int len = dims[axis];
    const std::size_t step = strides[axis];
    if (len == 0) return out;

    int outer_dims[3];
    std::size_t outer_strides[3];
    int n_outer = 0;
    for (int a = 0; a < 4; ++a) {
        if (a == axis) continue;
        outer_dims[n_outer] = dims[a];
        outer_strides[n_outer] = strides[a];
        ++n_outer;
    }
    for (int i0 = 0; i0 < outer_dims[0]; ++i0) {
        for (int i1 = 0; i1 < outer_dims[1]; ++i1) {
            for (int i2 = 0; i2 < outer_dims[2]; ++i2) {
                const std::size_t base =
                    i0 * outer_strides[0] + i1 * outer_strides[1] + i2 * outer_strides[2];
                float mx = out.data[base];
                for (int j = 1; j < len; ++j)
                    mx = std::max(mx, out.data[base + j * step]);
                double sum = 0.0;
                for (int j = 0; j < len; ++j) {
                    float& v = out.data[base + j * step];
                    v = std::exp(v - mx);
                    sum += v;
                }
                const float inv = static_cast<float>(1.0 / sum);
                for (int j = 0; j < len; ++j)
                    out.data[base + j * step] *= inv;
            }
        }
    }
    return out;
}

float sigmoid_scalar(float v) {
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(v)));
    float f = static_cast<float>(s);
    // Keep the open-interval contract even where float rounding would
    // saturate to exactly 0 or 1.
    const float hi = std::nextafter(1.0f, 0.0f);
    if (f >= 1.0f) f = hi;
    if (f <= 0.0f) f = std::numeric_limits<float>::min();
    return f;
}

Tensor4 sigmoid(const Tensor4& x) {
    Tensor4 out = x;
    for (float& v : out.data) v = sigmoid_scalar(v);
    return out;
}

Tensor4 matmul_batched(const Tensor4& a, const Tensor4& bm) {
    if (a.b != bm.b || a.c != bm.c)
        throw ShapeError("matmul_batched: batch dims differ " + shape_str(a) + " vs " + shape_str(bm));
    if (a.w != bm.h)
        throw ShapeError("matmul_batched: inner dims differ " + shape_str(a) + " vs " + shape_str(bm));
    const int m = a.h, k = a.w, p = bm.w;
    Tensor4 out(a.b, a.c, m, p);
    for (int ib = 0; ib < a.b; ++ib) {
        for (int ic = 0; ic < a.c; ++ic) {
            const float* ap = a.plane(ib, ic);
            const float* bp = bm.plane(ib, ic);
            float* op = out.plane(ib, ic);
            for (int i = 0; i < m; ++i) {
                float* orow = op + static_cast<std::size_t>(i) * p;
                for (int kk = 0; kk < k; ++kk) {
                    const float av = ap[static_cast<std::size_t>(i) * k + kk];
                    if (av == 0.0f) continue;
                    const float* brow = bp + static_cast<std::size_t>(kk) * p;
                    for (int j = 0; j < p; ++j) orow[j] += av * brow[j];
                }
            }
        }
    }
    return out;
}

Tensor4 init_params(Rng& rng, int b, int c, int h, int w, int fan_in) {
    if (fan_in < 1) throw ConfigError("init_params: fan_in must be >= 1");
    const float s = std::sqrt(6.0f / static_cast<float>(fan_in));
    Tensor4 out(b, c, h, w);
    for (float& v : out.data) v = rng.next_uniform(-s, s);
    return out;
}

Tensor4 relu(const Tensor4& x) {
    Tensor4 out = x;
    for (float& v : out.data)
        if (v < 0.0f) v = 0.0f;
    return out;
}

Tensor4 avg_pool2d(const Tensor4& x, int k, int stride, int pad) {
    if (k < 1 || stride < 1 || pad < 0)
        throw ShapeError("avg_pool2d: invalid window/stride/pad");
    const int out_h = (x.h + 2 * pad - k) / stride + 1;
    const int out_w = (x.w + 2 * pad - k) / stride + 1;
    if (x.h + 2 * pad < k || x.w + 2 * pad < k)
        throw ShapeError("avg_pool2d: window larger than padded input");
    Tensor4 out(x.b, x.c, out_h, out_w);
    const float inv = 1.0f / static_cast<float>(k * k);  // padded zeros count
    for (int ib = 0; ib < x.b; ++ib) {
        for (int ic = 0; ic < x.c; ++ic) {
            const float* ip = x.plane(ib, ic);
            float* op = out.plane(ib, ic);
            for (int oy = 0; oy < out_h; ++oy) {
                for (int ox = 0; ox < out_w; ++ox) {
                    float acc = 0.0f;
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= x.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= x.w) continue;
                            acc += ip[static_cast<std::size_t>(iy) * x.w + ix];
                        }
                    }
                    op[static_cast<std::size_t>(oy) * out_w + ox] = acc * inv;
                }
            }
        }
    }
    return out;
}

Tensor4 concat(const Tensor4& a, const Tensor4& b, int axis) {
    check_axis(axis);
    const int da[4] = {a.b, a.c, a.h, a.w};
    const int db[4] = {b.b, b.c, b.h, b.w};
    for (int i = 0; i < 4; ++i)
        if (i != axis && da[i] != db[i])
            throw ShapeError("concat: non-axis dims differ " + shape_str(a) + " vs " + shape_str(b));
    int dd[4];
    for (int i = 0; i < 4; ++i) dd[i] = da[i];
    dd[axis] = da[axis] + db[axis];
    Tensor4 out(dd[0], dd[1], dd[2], dd[3]);
    for (int ib = 0; ib < out.b; ++ib)
        for (int ic = 0; ic < out.c; ++ic)
            for (int iy = 0; iy < out.h; ++iy)
                for (int ix = 0; ix < out.w; ++ix) {
                    int src[4] = {ib, ic, iy, ix};
                    const Tensor4* t = &a;
                    if (src[axis] >= da[axis]) {
                        src[axis] -= da[axis];
                        t = &b;
                    }
                    out.at(ib, ic, iy, ix) = t->at(src[0], src[1], src[2], src[3]);
                }
    return out;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
    if (!a.same_shape(b))
        throw ShapeError("add: shapes differ " + shape_str(a) + " vs " + shape_str(b));
    Tensor4 out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor4 mul(const Tensor4& a, const Tensor4& b) {
    if (!a.same_shape(b))
        throw ShapeError("mul: shapes differ " + shape_str(a) + " vs " + shape_str(b));
    Tensor4 out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Tensor4 mean_axis(const Tensor4& x, int axis) {
    check_axis(axis);
    const int len = dim_of(x, axis);
    if (len == 0) throw ShapeError("mean_axis: empty axis");
    int d[4] = {x.b, x.c, x.h, x.w};
    d[axis] = 1;
    Tensor4 out(d[0], d[1], d[2], d[3]);
    const double inv = 1.0 / len;
    for (int ib = 0; ib < d[0]; ++ib)
        for (int ic = 0; ic < d[1]; ++ic)
            for (int iy = 0; iy < d[2]; ++iy)
                for (int ix = 0; ix < d[3]; ++ix) {
                    double acc = 0.0;
                    int src[4] = {ib, ic, iy, ix};
                    for (int j = 0; j < len; ++j) {
                        src[axis] = j;
                        acc += x.at(src[0], src[1], src[2], src[3]);
                    }
                    out.at(ib, ic, iy, ix) = static_cast<float>(acc * inv);
                }
    return out;
}

Tensor4 upsample_nearest(const Tensor4& x, int out_h, int out_w) {
    if (out_h < x.h || out_w < x.w || out_h % x.h != 0 || out_w % x.w != 0)
        throw ShapeError("upsample_nearest: output dims must be integer multiples of input");
    const int fy = out_h / x.h, fx = out_w / x.w;
    Tensor4 out(x.b, x.c, out_h, out_w);
    for (int ib = 0; ib < x.b; ++ib)
        for (int ic = 0; ic < x.c; ++ic) {
            const float* ip = x.plane(ib, ic);
            float* op = out.plane(ib, ic);
            for (int oy = 0; oy < out_h; ++oy) {
                const float* irow = ip + static_cast<std::size_t>(oy / fy) * x.w;
                float* orow = op + static_cast<std::size_t>(oy) * out_w;
                for (int ox = 0; ox < out_w; ++ox) orow[ox] = irow[ox / fx];
            }
        }
    return out;
}

} // namespace fmcaf

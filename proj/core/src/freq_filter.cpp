#include "fmcaf/freq_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fmcaf {

int SpectralMask::count() const {
    int n = 0;
    for (std::uint8_t v : keep) n += v;
    return n;
}

bool SpectralMask::symmetric() const {
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
            if (at(u, v) != at((h - u) % h, (w - v) % w)) return false;
    return true;
}

float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

std::pair<Tensor4, Tensor4> split_modalities(const Tensor4& x) {
    if (x.c != 4)
        throw ShapeError("split_modalities: expected 4 channels [R,G,B,IR], got " +
                         std::to_string(x.c));
    return {x.slice_channels(0, 3), x.slice_channels(3, 1)};
}

Tensor4 amplitude_map(const Tensor4& x_m) {
    return mean_axis(amplitude(dft2(x_m)), 1);
}

Tensor4 encode_activations(const Tensor4& amp, const FilterParams& p) {
    Tensor4 scaled = amp;
    for (float& v : scaled.data) v = std::log1p(v);
    Tensor4 hidden = relu(conv2d(scaled, p.encoder_conv1, 1, 1));
    return conv2d(hidden, p.encoder_conv2, 1, 1);
}

SpectralMask topk_mask(const Tensor4& act, float ratio) {
    if (!(ratio > 0.0f) || ratio > 1.0f)
        throw ConfigError("topk_mask: ratio must be in (0,1], got " + std::to_string(ratio));
    if (act.b != 1 || act.c != 1)
        throw ShapeError("topk_mask: expects a (1,1,H,W) activation map");

    const int h = act.h, w = act.w;
    const std::size_t total = static_cast<std::size_t>(h) * w;
    const std::size_t n =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total))));

    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    const float* a = act.data.data();
    std::sort(order.begin(), order.end(), [a](int lhs, int rhs) {
        if (a[lhs] != a[rhs]) return a[lhs] > a[rhs];
        return lhs < rhs;  // ties: smaller flat index wins
    });

    SpectralMask mask(h, w);
    for (std::size_t i = 0; i < n && i < total; ++i) mask.keep[order[i]] = 1;

    // Symmetrize (logical OR) so the masked spectrum stays invertible to a
    // real image, and always keep DC so the image mean survives.
    SpectralMask sym = mask;
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
            if (mask.at(u, v)) sym.at((h - u) % h, (w - v) % w) = 1;
    sym.at(0, 0) = 1;
    return sym;
}

Spectrum apply_spectral_mask(const Spectrum& s, const SpectralMask& m) {
    if (s.h != m.h || s.w != m.w)
        throw ShapeError("apply_spectral_mask: spectrum " + std::to_string(s.h) + "x" +
                         std::to_string(s.w) + " vs mask " + std::to_string(m.h) + "x" +
                         std::to_string(m.w));
    Spectrum out = s;
    const std::size_t plane_n = static_cast<std::size_t>(s.h) * s.w;
    for (int ic = 0; ic < s.c; ++ic) {
        float* rp = out.re.data() + out.index(ic, 0, 0);
        float* mp = out.im.data() + out.index(ic, 0, 0);
        for (std::size_t i = 0; i < plane_n; ++i) {
            if (!m.keep[i]) {
                rp[i] = 0.0f;
                mp[i] = 0.0f;
            }
        }
    }
    return out;
}

Tensor4 filter_modality(const Tensor4& x_m, const FilterParams& p, const FilterConfig& cfg) {
    const Spectrum spec = dft2(x_m);
    const Tensor4 amp = mean_axis(amplitude(spec), 1);
    const Tensor4 act = encode_activations(amp, p);
    const SpectralMask mask = topk_mask(act, cfg.topk_ratio);
    return idft2(apply_spectral_mask(spec, mask));
}

Tensor4 blend(const Tensor4& raw, const Tensor4& filtered, float alpha) {
    if (!raw.same_shape(filtered))
        throw ShapeError("blend: shape mismatch between raw and filtered inputs");
    Tensor4 out = raw;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = alpha * filtered.data[i] + (1.0f - alpha) * raw.data[i];
    return out;
}

Tensor4 freq_filter_forward(const Tensor4& x, const FilterParams& p, const FilterConfig& cfg) {
    if (x.c != 4) throw ShapeError("freq_filter_forward: expected 4-channel input");
    const float alpha_rgb = clamp01(p.alpha_raw_rgb);
    const float alpha_ir = clamp01(p.alpha_raw_ir);

    Tensor4 out(x.b, 4, x.h, x.w);
    const std::size_t plane_n = static_cast<std::size_t>(x.h) * x.w;
    for (int ib = 0; ib < x.b; ++ib) {
        const Tensor4 elem = x.slice_batch(ib);
        const Tensor4 rgb = elem.slice_channels(0, 3);
        const Tensor4 ir = elem.slice_channels(3, 1);
        const Tensor4 rgb_out = blend(rgb, filter_modality(rgb, p, cfg), alpha_rgb);
        const Tensor4 ir_out = blend(ir, filter_modality(ir, p, cfg), alpha_ir);
        for (int ic = 0; ic < 3; ++ic)
            std::copy_n(rgb_out.plane(0, ic), plane_n, out.plane(ib, ic));
        std::copy_n(ir_out.plane(0, 0), plane_n, out.plane(ib, 3));
    }
    return out;
}

} // namespace fmcaf

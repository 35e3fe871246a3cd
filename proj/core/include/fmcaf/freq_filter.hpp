#pragma once

#include <cstdint>
#include <utility>

#include "fmcaf/fft.hpp"
#include "fmcaf/tensor.hpp"

namespace fmcaf {

// Binary per-frequency retention map. Kept conjugate-symmetric so masked
// spectra invert to real images.
struct SpectralMask {
    int h = 0, w = 0;
    std::vector<std::uint8_t> keep;  // {0,1}, row-major

    SpectralMask() = default;
    SpectralMask(int h_, int w_) : h(h_), w(w_), keep(static_cast<std::size_t>(h_) * w_, 0) {}

    std::uint8_t& at(int u, int v) { return keep[static_cast<std::size_t>(u) * w + v]; }
    std::uint8_t at(int u, int v) const { return keep[static_cast<std::size_t>(u) * w + v]; }

    int count() const;
    bool symmetric() const;
};

// Learnable state of the filter stage: one shared mask encoder and one
// blending scalar per modality. alpha_raw is unconstrained storage; every
// use clamps it to [0,1].
struct FilterParams {
    ConvLayer encoder_conv1;  // (8,1,3,3)
    ConvLayer encoder_conv2;  // (1,8,3,3)
    float alpha_raw_rgb = 0.2f;
    float alpha_raw_ir = 0.2f;
};

struct FilterConfig {
    float topk_ratio = 0.25f;  // fraction of frequency positions retained
    float alpha_init = 0.2f;
};

float clamp01(float v);

// (B,4,H,W) with channel order [R,G,B,IR] -> ((B,3,H,W), (B,1,H,W)).
std::pair<Tensor4, Tensor4> split_modalities(const Tensor4& x);

// Channel-averaged amplitude spectrum of one single-batch modality: (1,1,H,W).
Tensor4 amplitude_map(const Tensor4& x_m);

// log(1+A) -> 3x3 conv 1->8 -> relu -> 3x3 conv 8->1, shape preserving.
Tensor4 encode_activations(const Tensor4& amp, const FilterParams& p);

// Keeps the max(1, floor(ratio*H*W)) largest activations (ties to the smaller
// flat index), then symmetrizes with logical OR and forces DC on.
SpectralMask topk_mask(const Tensor4& act, float ratio);

// Zeroes masked-out coefficients; scalar multiply keeps phase intact.
Spectrum apply_spectral_mask(const Spectrum& s, const SpectralMask& m);

// Full spectral chain for one single-batch modality (1,C,H,W) -> (1,C,H,W).
Tensor4 filter_modality(const Tensor4& x_m, const FilterParams& p, const FilterConfig& cfg);

// alpha * filtered + (1 - alpha) * raw, elementwise.
Tensor4 blend(const Tensor4& raw, const Tensor4& filtered, float alpha);

// Per batch element and per modality: filter, then blend with that
// modality's clamped alpha; reassembled in [R,G,B,IR] order.
Tensor4 freq_filter_forward(const Tensor4& x, const FilterParams& p, const FilterConfig& cfg);

} // namespace fmcaf

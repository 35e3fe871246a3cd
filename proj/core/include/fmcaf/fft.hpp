#pragma once

#include "fmcaf/tensor.hpp"

namespace fmcaf {

// Per-channel 2D frequency-domain coefficients, DC at index (0,0), no shift.
// A spectrum of a real image satisfies F(u,v) = conj(F((H-u)%H, (W-v)%W)).
struct Spectrum {
    int c = 0, h = 0, w = 0;
    std::vector<float> re, im;

    Spectrum() = default;
    Spectrum(int c_, int h_, int w_);

    std::size_t index(int ic, int iy, int ix) const {
        return (static_cast<std::size_t>(ic) * h + iy) * w + ix;
    }
};

// Forward transform of a single-batch tensor, channel-wise, unnormalized:
// F(u,v) = sum_{y,x} f(y,x) exp(-2*pi*i*(u*y/H + v*x/W)).
// Radix-2 for power-of-two extents, direct evaluation otherwise.
Spectrum dft2(const Tensor4& x);

// Inverse transform with 1/(H*W) normalization. Returns the real part and,
// via the optional out-param, the largest |imaginary| left over. A residue
// above 1e-3 means the spectrum lost conjugate symmetry upstream and throws.
Tensor4 idft2(const Spectrum& s, float* max_imag_residue = nullptr);

// |F(u,v)| per channel, shaped (1,C,H,W).
Tensor4 amplitude(const Spectrum& s);

} // namespace fmcaf

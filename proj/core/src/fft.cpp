#include "fmcaf/fft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace fmcaf {

namespace {

using Cplx = std::complex<double>;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse.
void fft_pow2(Cplx* a, int n, int sign) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / len;
        const Cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            Cplx w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                const Cplx u = a[i + j];
                const Cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

void dft_direct(const Cplx* in, Cplx* out, int n, int sign) {
    for (int k = 0; k < n; ++k) {
        Cplx acc(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * std::numbers::pi * k * j / n;
            acc += in[j] * Cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
}

void transform_1d(Cplx* a, int n, int sign, std::vector<Cplx>& scratch) {
    if (n == 1) return;
    if (is_pow2(n)) {
        fft_pow2(a, n, sign);
    } else {
        scratch.assign(a, a + n);
        dft_direct(scratch.data(), a, n, sign);
    }
}

// Rows then columns over one H x W plane.
void transform_2d(std::vector<Cplx>& plane, int h, int w, int sign) {
    std::vector<Cplx> scratch;
    for (int y = 0; y < h; ++y)
        transform_1d(plane.data() + static_cast<std::size_t>(y) * w, w, sign, scratch);
    std::vector<Cplx> col(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = plane[static_cast<std::size_t>(y) * w + x];
        transform_1d(col.data(), h, sign, scratch);
        for (int y = 0; y < h; ++y) plane[static_cast<std::size_t>(y) * w + x] = col[y];
    }
}

} // namespace

Spectrum::Spectrum(int c_, int h_, int w_) : c(c_), h(h_), w(w_) {
    re.assign(static_cast<std::size_t>(c) * h * w, 0.0f);
    im.assign(static_cast<std::size_t>(c) * h * w, 0.0f);
}

Spectrum dft2(const Tensor4& x) {
    if (x.b != 1) throw ShapeError("dft2: expects a single-batch tensor");
    if (x.h < 1 || x.w < 1) throw ShapeError("dft2: empty spatial dims");
    Spectrum s(x.c, x.h, x.w);
    const std::size_t n = static_cast<std::size_t>(x.h) * x.w;
    std::vector<Cplx> plane(n);
    for (int ic = 0; ic < x.c; ++ic) {
        const float* ip = x.plane(0, ic);
        for (std::size_t i = 0; i < n; ++i) plane[i] = Cplx(ip[i], 0.0);
        transform_2d(plane, x.h, x.w, -1);
        float* rp = s.re.data() + s.index(ic, 0, 0);
        float* mp = s.im.data() + s.index(ic, 0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            rp[i] = static_cast<float>(plane[i].real());
            mp[i] = static_cast<float>(plane[i].imag());
        }
    }
    return s;
}

Tensor4 idft2(const Spectrum& s, float* max_imag_residue) {
    if (s.c < 1 || s.h < 1 || s.w < 1) throw ShapeError("idft2: empty spectrum");
    Tensor4 out(1, s.c, s.h, s.w);
    const std::size_t n = static_cast<std::size_t>(s.h) * s.w;
    const double norm = 1.0 / (static_cast<double>(s.h) * s.w);
    std::vector<Cplx> plane(n);
    double residue = 0.0;
    for (int ic = 0; ic < s.c; ++ic) {
        const float* rp = s.re.data() + s.index(ic, 0, 0);
        const float* mp = s.im.data() + s.index(ic, 0, 0);
        for (std::size_t i = 0; i < n; ++i) plane[i] = Cplx(rp[i], mp[i]);
        transform_2d(plane, s.h, s.w, +1);
        float* op = out.plane(0, ic);
        for (std::size_t i = 0; i < n; ++i) {
            op[i] = static_cast<float>(plane[i].real() * norm);
            residue = std::max(residue, std::abs(plane[i].imag() * norm));
        }
    }
    if (max_imag_residue) *max_imag_residue = static_cast<float>(residue);
    if (residue > 1e-3)
        throw NumericError("idft2: imaginary residue " + std::to_string(residue) +
                           " exceeds 1e-3; spectrum is not conjugate-symmetric");
    return out;
}

Tensor4 amplitude(const Spectrum& s) {
    Tensor4 out(1, s.c, s.h, s.w);
    for (std::size_t i = 0; i < s.re.size(); ++i) {
        const double re = s.re[i], im = s.im[i];
        out.data[i] = static_cast<float>(std::sqrt(re * re + im * im));
    }
    return out;
}

} // namespace fmcaf

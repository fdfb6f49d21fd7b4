#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "ctxsense/common.hpp"

namespace ctxsense {

// Forward DFT, X_k = sum_n x_n exp(-2*pi*i*n*k/N), no normalization.
// Power-of-two sizes run the iterative radix-2 kernel; everything else goes
// through Bluestein's chirp-z reduction to a padded power-of-two convolution,
// so any window length stays O(N log N).

namespace detail {

inline void fft_radix2_in_place(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const double sign = inverse ? 2.0 : -2.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 3.14159265358979323846 / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= inv;
    }
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline std::vector<std::complex<double>> fft_bluestein(
    const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n - 1);

    // Chirp exp(-i*pi*k^2/n); k^2 reduced mod 2n to keep the phase argument small.
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
        const double ang = -3.14159265358979323846 * static_cast<double>(k2) /
                           static_cast<double>(n);
        chirp[k] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<std::complex<double>> a(m, {0.0, 0.0}), b(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_radix2_in_place(a, false);
    fft_radix2_in_place(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_radix2_in_place(a, true);

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

}  // namespace detail

inline std::vector<std::complex<double>> dft_forward(
    const std::vector<std::complex<double>>& x) {
    if (x.empty()) throw precondition_error("dft_forward: empty input");
    if (detail::is_pow2(x.size())) {
        auto a = x;
        detail::fft_radix2_in_place(a, false);
        return a;
    }
    return detail::fft_bluestein(x);
}

inline std::vector<std::complex<double>> dft_forward(const std::vector<double>& x) {
    std::vector<std::complex<double>> cx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cx[i] = {x[i], 0.0};
    return dft_forward(cx);
}

// One-sided magnitude spectrum |X_k| for k = 0 .. floor(N/2).
inline std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
    const auto spec = dft_forward(x);
    const std::size_t half = spec.size() / 2;
    std::vector<double> mag(half + 1);
    for (std::size_t k = 0; k <= half; ++k) mag[k] = std::abs(spec[k]);
    return mag;
}

}  // namespace ctxsense

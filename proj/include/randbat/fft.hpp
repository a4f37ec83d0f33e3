#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "randbat/bitseq.hpp"

namespace randbat {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT (forward, e^{-2 pi i k/n} convention).
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw Error("fft_pow2: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

}  // namespace detail

/// Forward DFT of arbitrary size: radix-2 directly, Bluestein otherwise.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (detail::is_pow2(n)) {
    detail::fft_pow2(a);
    return;
  }
  // Bluestein chirp-z: X_k = conj(w_k) * IFFT(FFT(a_j w_j) . FFT(b))_k
  const double pi = 3.14159265358979323846;
  const std::size_t m = detail::next_pow2(2 * n - 1);
  std::vector<std::complex<double>> w(n), fa(m), fb(m);
  for (std::size_t j = 0; j < n; ++j) {
    // j^2 mod 2n avoids precision loss in the chirp phase for large j
    std::size_t j2 = (j * j) % (2 * n);
    double ang = pi * static_cast<double>(j2) / static_cast<double>(n);
    w[j] = std::complex<double>(std::cos(ang), -std::sin(ang));
    fa[j] = a[j] * w[j];
  }
  fb[0] = std::complex<double>(1.0, 0.0);
  for (std::size_t j = 1; j < n; ++j) fb[j] = fb[m - j] = std::conj(w[j]);
  detail::fft_pow2(fa);
  detail::fft_pow2(fb);
  for (std::size_t j = 0; j < m; ++j) fa[j] *= fb[j];
  detail::fft_pow2(fa, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * w[k];
}

/// Moduli of the first n/2 DFT bins of the +/-1 mapped sequence,
/// as consumed by the spectral test.
inline std::vector<double> dft_moduli_half(const BitSequence& seq) {
  const std::size_t n = seq.size();
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < n; ++i)
    a[i] = std::complex<double>(2.0 * seq[i] - 1.0, 0.0);
  fft(a);
  std::vector<double> mods(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) mods[k] = std::abs(a[k]);
  return mods;
}

}  // namespace randbat

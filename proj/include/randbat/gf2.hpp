#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "randbat/bitseq.hpp"

namespace randbat {

/// Rank over GF(2) of a matrix given as packed rows (column j = bit j of
/// rows[i][j/64]). Destroys its argument.
inline int gf2_rank(std::vector<std::vector<std::uint64_t>>& rows, int ncols) {
  const int nrows = static_cast<int>(rows.size());
  int rank = 0;
  for (int col = 0; col < ncols && rank < nrows; ++col) {
    const int w = col / 64;
    const std::uint64_t mask = 1ULL << (col % 64);
    int pivot = -1;
    for (int r = rank; r < nrows; ++r) {
      if (rows[r][w] & mask) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < nrows; ++r) {
      if (r != rank && (rows[r][w] & mask)) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) rows[r][k] ^= rows[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

/// Rank of the 32x32 matrix whose rows are consecutive 32-bit groups of
/// `bits` starting at `offset` (row-major fill).
inline int gf2_rank_32x32(const BitSequence& bits, std::size_t offset) {
  std::vector<std::vector<std::uint64_t>> rows(32, std::vector<std::uint64_t>(1, 0));
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      if (bits[offset + 32 * static_cast<std::size_t>(i) + j]) rows[i][0] |= 1ULL << j;
  return gf2_rank(rows, 32);
}

/// Berlekamp-Massey over GF(2): length of the shortest LFSR generating
/// bits[0..n). Word-packed connection polynomial; O(n^2/64).
inline std::size_t berlekamp_massey(const std::uint8_t* bits, std::size_t n) {
  if (n == 0) return 0;
  const std::size_t words = n / 64 + 2;
  // c, b: connection polynomials, bit i = coefficient of x^i
  std::vector<std::uint64_t> c(words, 0), b(words, 0), t(words, 0);
  // rev bit j = s[N-1-j]; shifted left by one each step
  std::vector<std::uint64_t> rev(words, 0);
  c[0] = b[0] = 1;
  std::size_t L = 0;
  std::ptrdiff_t m = -1;

  for (std::size_t N = 0; N < n; ++N) {
    // d = s[N] ^ parity((c >> 1) & rev) over the first L bits
    std::uint64_t acc = 0;
    const std::size_t lim = L / 64 + 1;
    for (std::size_t w = 0; w < lim && w < words; ++w) {
      std::uint64_t cs = c[w] >> 1;
      if (w + 1 < words) cs |= c[w + 1] << 63;
      acc ^= cs & rev[w];
    }
    int d = bits[N] ^ (std::popcount(acc) & 1);

    if (d) {
      const std::size_t shift = N - static_cast<std::size_t>(m);
      if (2 * L <= N) {
        t = c;
        // c ^= b << shift
        const std::size_t ws = shift / 64, bs = shift % 64;
        for (std::size_t w = words; w-- > ws;) {
          std::uint64_t v = b[w - ws] << bs;
          if (bs && w - ws > 0) v |= b[w - ws - 1] >> (64 - bs);
          c[w] ^= v;
        }
        L = N + 1 - L;
        m = static_cast<std::ptrdiff_t>(N);
        b = t;
      } else {
        const std::size_t ws = shift / 64, bs = shift % 64;
        for (std::size_t w = words; w-- > ws;) {
          std::uint64_t v = b[w - ws] << bs;
          if (bs && w - ws > 0) v |= b[w - ws - 1] >> (64 - bs);
          c[w] ^= v;
        }
      }
    }

    // rev = (rev << 1) | s[N]
    std::uint64_t carry = bits[N];
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t nc = rev[w] >> 63;
      rev[w] = (rev[w] << 1) | carry;
      carry = nc;
    }
  }
  return L;
}

inline std::size_t berlekamp_massey(const BitSequence& seq) {
  return berlekamp_massey(seq.data(), seq.size());
}

}  // namespace randbat

#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "randbat/bitseq.hpp"

namespace randbat {

// first 64 fractional bits of pi, the published hex expansion 243F6A88 85A308D3
constexpr std::uint64_t kPiFirst64 = 0x243F6A8885A308D3ULL;

/// Hex digit (0..15) of pi at 1-based fractional position via the
/// Bailey-Borwein-Plouffe digit extraction formula. O(position) per call;
/// used to spot-check the bulk stream at arbitrary offsets.
inline int bbp_pi_hex_digit(std::uint64_t position) {
  const std::uint64_t d = position - 1;  // exponent of the 16^d scaling
  auto mulmod = [](std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
  };
  auto powmod = [&](std::uint64_t e, std::uint64_t m) {
    std::uint64_t result = 1 % m, base = 16 % m;
    while (e > 0) {
      if (e & 1) result = mulmod(result, base, m);
      base = mulmod(base, base, m);
      e >>= 1;
    }
    return result;
  };
  auto series = [&](std::uint64_t j) {
    double s = 0.0;
    for (std::uint64_t k = 0; k <= d; ++k) {
      std::uint64_t den = 8 * k + j;
      s += static_cast<double>(powmod(d - k, den)) / static_cast<double>(den);
      s -= std::floor(s);
    }
    // tail: 16^{d-k} for k > d
    double t = 1.0 / 16.0;
    for (std::uint64_t k = d + 1;; ++k) {
      double term = t / static_cast<double>(8 * k + j);
      if (term < 1e-18) break;
      s += term;
      t /= 16.0;
    }
    return s - std::floor(s);
  };
  double frac = 4.0 * series(1) - 2.0 * series(4) - series(5) - series(6);
  frac -= std::floor(frac);
  return static_cast<int>(frac * 16.0);
}

/// Fractional binary digits of pi. Bulk digits come from MPFR's pi at full
/// precision, verified against the published first 64 bits and cached to a
/// local file; the BBP extractor above provides the independent spot check.
class PiBits {
public:
  explicit PiBits(std::filesystem::path cache_path) : cache_path_(std::move(cache_path)) {}

  /// First `count` fractional binary digits, MSB (most significant fractional
  /// digit) first.
  BitSequence prefix(std::size_t count) {
    ensure(count);
    BitSequence out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(static_cast<std::uint8_t>((bytes_[i / 8] >> (7 - i % 8)) & 1));
    return out;
  }

  std::uint8_t bit(std::size_t index) {
    ensure(index + 1);
    return static_cast<std::uint8_t>((bytes_[index / 8] >> (7 - index % 8)) & 1);
  }

private:
  static constexpr char kMagic[4] = {'R', 'B', 'P', 'I'};

  void ensure(std::size_t count) {
    if (count <= have_bits_) return;
    if (have_bits_ == 0 && load(count)) return;
    compute(count);
    store();
  }

  bool load(std::size_t count) {
    std::ifstream in(cache_path_, std::ios::binary);
    if (!in) return false;
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) return false;
    unsigned char hdr[8];
    in.read(reinterpret_cast<char*>(hdr), 8);
    if (in.gcount() != 8) return false;
    std::uint64_t nbits = 0;
    for (int i = 7; i >= 0; --i) nbits = (nbits << 8) | hdr[i];
    if (nbits < count) return false;
    std::vector<std::uint8_t> buf((nbits + 7) / 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) return false;
    bytes_ = std::move(buf);
    have_bits_ = nbits;
    verify_prefix();
    return true;
  }

  void store() const {
    if (cache_path_.empty()) return;
    std::ofstream out(cache_path_, std::ios::binary);
    if (!out) return;  // cache is best-effort
    out.write(kMagic, 4);
    unsigned char hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>((have_bits_ >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(hdr), 8);
    out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
  }

  void compute(std::size_t count) {
    // round the request up so the cache grows in large steps
    std::size_t nbits = ((count + 65535) / 65536) * 65536;
    mpfr_t x;
    mpfr_init2(x, static_cast<mpfr_prec_t>(nbits + 64));
    mpfr_const_pi(x, MPFR_RNDZ);
    mpfr_sub_ui(x, x, 3, MPFR_RNDZ);
    mpfr_mul_2exp(x, x, static_cast<unsigned long>(nbits), MPFR_RNDZ);
    mpz_t z;
    mpz_init(z);
    mpfr_get_z(z, x, MPFR_RNDZ);
    mpfr_clear(x);
    bytes_.assign((nbits + 7) / 8, 0);
    for (std::size_t i = 0; i < nbits; ++i)
      if (mpz_tstbit(z, static_cast<mp_bitcnt_t>(nbits - 1 - i)))
        bytes_[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
    mpz_clear(z);
    have_bits_ = nbits;
    verify_prefix();
  }

  void verify_prefix() const {
    if (have_bits_ < 64) throw Error("pi digits: fewer than 64 bits available");
    std::uint64_t first = 0;
    for (int i = 0; i < 8; ++i) first = (first << 8) | bytes_[static_cast<std::size_t>(i)];
    if (first != kPiFirst64)
      throw Error("pi digits: prefix does not match the published expansion");
  }

  std::filesystem::path cache_path_;
  std::vector<std::uint8_t> bytes_;
  std::size_t have_bits_ = 0;
};

}  // namespace randbat

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "randbat/bitseq.hpp"
#include "randbat/pi_digits.hpp"

namespace randbat {

/// The internal uniform-deviate engine for the stochastic source models:
/// splitmix64 (Steele/Lea/Flood constants 0x9E3779B97F4A7C15,
/// 0xBF58476D1CE4E5B9, 0x94D049BB133111EB). Not used for the mt19937
/// comparison source, which is the genuine Mersenne Twister.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// uniform deviate in [0, 1), 53 significant bits
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t derive_trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
  SplitMix64 g(seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL);
  return g.next();
}

enum class SourceKind {
  IdealQrng,
  QrngType1,
  QrngType2,
  QrngType3,
  Mt19937,
  OsCsprng,
  PiBinary,
  Biased,
  BiasedTwoStep,
};

inline std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::IdealQrng: return "ideal_qrng";
    case SourceKind::QrngType1: return "qrng_type1";
    case SourceKind::QrngType2: return "qrng_type2";
    case SourceKind::QrngType3: return "qrng_type3";
    case SourceKind::Mt19937: return "mt19937";
    case SourceKind::OsCsprng: return "os_csprng";
    case SourceKind::PiBinary: return "pi_binary";
    case SourceKind::Biased: return "biased";
    case SourceKind::BiasedTwoStep: return "biased_two_step";
  }
  return "?";
}

inline SourceKind source_kind_from_string(std::string_view s) {
  if (s == "ideal_qrng") return SourceKind::IdealQrng;
  if (s == "qrng_type1") return SourceKind::QrngType1;
  if (s == "qrng_type2") return SourceKind::QrngType2;
  if (s == "qrng_type3") return SourceKind::QrngType3;
  if (s == "mt19937") return SourceKind::Mt19937;
  if (s == "os_csprng") return SourceKind::OsCsprng;
  if (s == "pi_binary") return SourceKind::PiBinary;
  if (s == "biased") return SourceKind::Biased;
  if (s == "biased_two_step") return SourceKind::BiasedTwoStep;
  throw Error("unknown source kind: " + std::string(s));
}

/// Parametric description of a generator. `p0` is the bias toward 0s for
/// the biased models and the toward-init-state bias for types 1/3;
/// `stage_bias` is the per-stage bias of type 2; `corr` couples the four
/// type-3 streams through a shared latent draw.
struct SourceSpec {
  SourceKind kind = SourceKind::IdealQrng;
  std::uint64_t seed = 1;  // ignored by pi_binary and os_csprng
  double p0 = 0.52;
  double stage_bias = 0.52;
  double corr = 0.5;
  int qubit_count = 4;

  void validate() const {
    if (p0 < 0.0 || p0 > 1.0) throw Error("p0 out of range");
    if (stage_bias < 0.0 || stage_bias > 1.0) throw Error("stage_bias out of range");
    if (corr < -1.0 || corr > 1.0) throw Error("corr out of range");
    if (kind == SourceKind::QrngType3 && qubit_count != 4)
      throw Error("qrng_type3 supports qubit_count = 4 only");
  }

  int bits_per_shot() const { return kind == SourceKind::QrngType3 ? qubit_count : 1; }

  std::string label() const {
    std::ostringstream os;
    os << to_string(kind);
    switch (kind) {
      case SourceKind::Biased:
      case SourceKind::BiasedTwoStep:
      case SourceKind::QrngType1:
        os << "_p0=" << p0;
        break;
      case SourceKind::QrngType2:
        os << "_b=" << stage_bias;
        break;
      case SourceKind::QrngType3:
        os << "_p0=" << p0 << "_rho=" << corr;
        break;
      default:
        break;
    }
    if (kind != SourceKind::PiBinary && kind != SourceKind::OsCsprng) os << "_seed=" << seed;
    return os.str();
  }
};

struct GenerationJob {
  SourceSpec spec;
  int trials = 128;
  int shots_per_trial = 8192;
};

struct GenerateOptions {
  std::filesystem::path pi_cache = "pi_bits.cache";
};

namespace detail {

template <typename BitFn>
BitSequence fill_trial(std::size_t nbits, BitFn&& next_bit) {
  BitSequence seq;
  seq.reserve(nbits);
  for (std::size_t i = 0; i < nbits; ++i) seq.push_back(next_bit());
  return seq;
}

inline void emit_type3_shot(SplitMix64& eng, const SourceSpec& spec, BitSequence& out) {
  const double couple_p = std::fabs(spec.corr);
  const double shared = eng.next_unit();
  for (int q = 0; q < spec.qubit_count; ++q) {
    bool coupled = couple_p > 0.0 && eng.next_unit() < couple_p;
    double u;
    if (coupled) {
      u = (spec.corr >= 0.0 || q % 2 == 0) ? shared : 1.0 - shared;
    } else {
      u = eng.next_unit();
    }
    // qubits 0-1 follow the basic model, 2-3 the type-1 model
    const double p_zero = q < 2 ? 0.5 : 1.0 - spec.p0;
    out.push_back(u < p_zero ? 0 : 1);
  }
}

}  // namespace detail

/// Deterministic for every kind except os_csprng: same (spec, seed) gives an
/// identical TrialSet bit for bit.
inline TrialSet generate(const GenerationJob& job, const GenerateOptions& opts = {}) {
  job.spec.validate();
  if (job.trials < 1) throw Error("trials must be >= 1");
  if (job.shots_per_trial < 1) throw Error("shots_per_trial must be >= 1");
  const SourceSpec& spec = job.spec;
  const std::size_t trial_bits =
      static_cast<std::size_t>(job.shots_per_trial) * static_cast<std::size_t>(spec.bits_per_shot());
  std::vector<BitSequence> trials;
  trials.reserve(static_cast<std::size_t>(job.trials));

  switch (spec.kind) {
    case SourceKind::IdealQrng:
    case SourceKind::Biased:
    case SourceKind::QrngType1:
    case SourceKind::QrngType2:
    case SourceKind::BiasedTwoStep: {
      for (int t = 0; t < job.trials; ++t) {
        SplitMix64 eng(derive_trial_seed(spec.seed, static_cast<std::uint64_t>(t)));
        trials.push_back(detail::fill_trial(trial_bits, [&]() -> std::uint8_t {
          switch (spec.kind) {
            case SourceKind::IdealQrng:
              return eng.next_unit() < 0.5 ? 0 : 1;
            case SourceKind::Biased:
              return eng.next_unit() < spec.p0 ? 0 : 1;
            case SourceKind::QrngType1:
              // init state is |1>; bias p0 pulls toward 1s
              return eng.next_unit() < 1.0 - spec.p0 ? 0 : 1;
            case SourceKind::QrngType2: {
              std::uint8_t mid = eng.next_unit() < spec.stage_bias ? 0 : 1;
              bool keep = eng.next_unit() < spec.stage_bias;
              return keep ? mid : static_cast<std::uint8_t>(1 - mid);
            }
            case SourceKind::BiasedTwoStep: {
              std::uint8_t pre = eng.next_unit() < spec.p0 ? 0 : 1;
              double u = eng.next_unit();
              // precursor 0 keeps the bias toward 0s, precursor 1 flips it
              if (pre == 0) return u < spec.p0 ? 0 : 1;
              return u < spec.p0 ? 1 : 0;
            }
            default:
              return 0;
          }
        }));
      }
      break;
    }
    case SourceKind::QrngType3: {
      for (int t = 0; t < job.trials; ++t) {
        SplitMix64 eng(derive_trial_seed(spec.seed, static_cast<std::uint64_t>(t)));
        BitSequence seq;
        seq.reserve(trial_bits);
        for (int s = 0; s < job.shots_per_trial; ++s) detail::emit_type3_shot(eng, spec, seq);
        trials.push_back(std::move(seq));
      }
      break;
    }
    case SourceKind::Mt19937: {
      std::mt19937 gen(static_cast<std::uint32_t>(spec.seed));
      std::uint32_t word = 0;
      int avail = 0;
      auto next_bit = [&]() -> std::uint8_t {
        if (avail == 0) {
          word = gen();
          avail = 32;
        }
        std::uint8_t b = static_cast<std::uint8_t>((word >> 31) & 1u);
        word <<= 1;
        --avail;
        return b;
      };
      for (int t = 0; t < job.trials; ++t)
        trials.push_back(detail::fill_trial(trial_bits, next_bit));
      break;
    }
    case SourceKind::OsCsprng: {
      try {
        std::random_device rd;
        std::uint32_t word = 0;
        int avail = 0;
        auto next_bit = [&]() -> std::uint8_t {
          if (avail == 0) {
            word = static_cast<std::uint32_t>(rd());
            avail = 32;
          }
          std::uint8_t b = static_cast<std::uint8_t>((word >> 31) & 1u);
          word <<= 1;
          --avail;
          return b;
        };
        for (int t = 0; t < job.trials; ++t)
          trials.push_back(detail::fill_trial(trial_bits, next_bit));
      } catch (const std::exception& e) {
        throw Error(std::string("entropy source unavailable: ") + e.what());
      }
      break;
    }
    case SourceKind::PiBinary: {
      PiBits pi(opts.pi_cache);
      BitSequence all = pi.prefix(trial_bits * static_cast<std::size_t>(job.trials));
      for (int t = 0; t < job.trials; ++t) {
        std::vector<std::uint8_t> bits(all.data() + static_cast<std::size_t>(t) * trial_bits,
                                       all.data() + static_cast<std::size_t>(t + 1) * trial_bits);
        trials.emplace_back(std::move(bits));
      }
      break;
    }
  }

  TrialSet ts = make_trial_set(std::move(trials), spec.label(), to_string(spec.kind));
  return ts;
}

}  // namespace randbat

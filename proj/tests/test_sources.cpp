#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "randbat/sources.hpp"
#include "randbat/special.hpp"

using namespace randbat;
namespace fs = std::filesystem;

namespace {

fs::path temp_cache(const std::string& name) {
  auto dir = fs::temp_directory_path() / "randbat_sources_tests";
  fs::create_directories(dir);
  return dir / name;
}

// independent MT19937 oracle, written from the published recurrence
struct MtOracle {
  std::uint32_t mt[624];
  int idx = 624;
  explicit MtOracle(std::uint32_t seed) {
    mt[0] = seed;
    for (int i = 1; i < 624; ++i)
      mt[i] = static_cast<std::uint32_t>(1812433253u * (mt[i - 1] ^ (mt[i - 1] >> 30)) +
                                         static_cast<std::uint32_t>(i));
  }
  std::uint32_t next() {
    if (idx >= 624) {
      for (int i = 0; i < 624; ++i) {
        std::uint32_t y = (mt[i] & 0x80000000u) | (mt[(i + 1) % 624] & 0x7FFFFFFFu);
        mt[i] = mt[(i + 397) % 624] ^ (y >> 1);
        if (y & 1u) mt[i] ^= 0x9908B0DFu;
      }
      idx = 0;
    }
    std::uint32_t y = mt[idx++];
    y ^= y >> 11;
    y ^= (y << 7) & 0x9D2C5680u;
    y ^= (y << 15) & 0xEFC60000u;
    y ^= y >> 18;
    return y;
  }
};

double zero_fraction(const BitSequence& seq) {
  return 1.0 - static_cast<double>(seq.count_ones()) / static_cast<double>(seq.size());
}

TrialSet gen(SourceKind kind, std::uint64_t seed, int trials, int shots,
             double p0 = 0.52, double b = 0.52, double rho = 0.5) {
  SourceSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.p0 = p0;
  spec.stage_bias = b;
  spec.corr = rho;
  GenerationJob job{spec, trials, shots};
  GenerateOptions opts;
  opts.pi_cache = temp_cache("pi_bits.cache");
  return generate(job, opts);
}

}  // namespace

TEST_CASE("splitmix64 reference vector") {
  SplitMix64 eng(1234567);
  CHECK(eng.next() == 0x599ed017fb08fc85ULL);
  CHECK(eng.next() == 0x2c73f08458540fa5ULL);
  CHECK(eng.next() == 0x883ebce5a3f27c77ULL);
}

TEST_CASE("mt19937 matches the published recurrence") {
  for (std::uint32_t seed : {5489u, 7u, 123456789u}) {
    std::mt19937 std_gen(seed);
    MtOracle oracle(seed);
    for (int i = 0; i < 1000; ++i) REQUIRE(std_gen() == oracle.next());
  }
}

TEST_CASE("mt19937 source emits MSB-first words") {
  // first output for seed 5489 is 3499211612 = 0xD091BB5C
  auto ts = gen(SourceKind::Mt19937, 5489, 1, 64);
  std::uint32_t first = 0;
  for (int i = 0; i < 32; ++i) first = (first << 1) | ts.trials[0][static_cast<std::size_t>(i)];
  CHECK(first == 3499211612u);
}

TEST_CASE("mt19937 is a sequential stream across trials") {
  auto ts = gen(SourceKind::Mt19937, 9001, 4, 256);
  std::mt19937 ref(9001);
  for (const auto& trial : ts.trials) {
    for (std::size_t i = 0; i < trial.size(); i += 32) {
      std::uint32_t word = ref();
      for (int b = 0; b < 32; ++b)
        REQUIRE(trial[i + static_cast<std::size_t>(b)] ==
                static_cast<std::uint8_t>((word >> (31 - b)) & 1u));
    }
  }
}

TEST_CASE("pi_binary first bits match the published expansion") {
  auto ts = gen(SourceKind::PiBinary, 0, 1, 16);
  CHECK(ts.trials[0].to_string() == "0010010000111111");
}

TEST_CASE("pi_binary stitches identically across block boundaries") {
  auto short_run = gen(SourceKind::PiBinary, 0, 1, 100);
  auto long_run = gen(SourceKind::PiBinary, 99, 4, 100);  // seed ignored
  for (std::size_t i = 0; i < 100; ++i)
    REQUIRE(short_run.trials[0][i] == long_run.trials[0][i]);
  // trial boundaries continue the stream
  BitSequence all = long_run.combined;
  PiBits pi(temp_cache("pi_bits.cache"));
  auto direct = pi.prefix(400);
  for (std::size_t i = 0; i < 400; ++i) REQUIRE(all[i] == direct[i]);
}

TEST_CASE("bbp extractor agrees with the bulk stream") {
  PiBits pi(temp_cache("pi_bits.cache"));
  auto bits = pi.prefix(1 << 20);
  for (std::uint64_t pos : {1ULL, 2ULL, 3ULL, 4ULL, 16ULL, 100ULL, 1000ULL, 5000ULL, 65536ULL,
                            262143ULL}) {
    int nib = 0;
    for (int b = 0; b < 4; ++b) nib = (nib << 1) | bits[(pos - 1) * 4 + static_cast<std::size_t>(b)];
    INFO("hex position " << pos);
    REQUIRE(bbp_pi_hex_digit(pos) == nib);
  }
}

TEST_CASE("bbp extractor first digits") {
  const std::string want = "243F6A8885A308D3";
  for (std::size_t i = 0; i < want.size(); ++i) {
    int d = bbp_pi_hex_digit(i + 1);
    REQUIRE("0123456789ABCDEF"[d] == want[i]);
  }
}

TEST_CASE("generation is deterministic per (spec, seed)") {
  for (auto kind : {SourceKind::IdealQrng, SourceKind::Biased, SourceKind::BiasedTwoStep,
                    SourceKind::QrngType1, SourceKind::QrngType2, SourceKind::QrngType3,
                    SourceKind::Mt19937}) {
    auto a = gen(kind, 42, 3, 128);
    auto b = gen(kind, 42, 3, 128);
    REQUIRE(a.combined == b.combined);
    auto c = gen(kind, 43, 3, 128);
    REQUIRE(a.combined != c.combined);
  }
}

TEST_CASE("trial sizes follow the job") {
  auto ts = gen(SourceKind::Biased, 1, 5, 8192);
  CHECK(ts.trials.size() == 5);
  CHECK(ts.trials[0].size() == 8192);
  CHECK(ts.combined.size() == 5 * 8192);

  auto t3 = gen(SourceKind::QrngType3, 1, 2, 8192);
  CHECK(t3.trials[0].size() == 32768);  // four bits per shot
  CHECK(t3.combined.size() == 65536);
}

TEST_CASE("biased zero fraction stays in the 3-sigma band across seeds") {
  // band: 0.52 +/- 3*sqrt(0.52*0.48/2^20) = 0.52 +/- 0.00146
  const std::size_t n = 1 << 20;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SplitMix64 eng(derive_trial_seed(seed, 0));
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (eng.next_unit() < 0.52) ++zeros;
    double frac = static_cast<double>(zeros) / static_cast<double>(n);
    INFO("seed " << seed);
    REQUIRE(frac > 0.52 - 0.00147);
    REQUIRE(frac < 0.52 + 0.00147);
  }
}

TEST_CASE("two-step marginal shows bias counteraction") {
  // P(final = 0) = 0.52^2 + 0.48^2 = 0.5008
  for (std::uint64_t seed : {3ULL, 11ULL, 29ULL}) {
    auto ts = gen(SourceKind::BiasedTwoStep, seed, 128, 8192);
    double frac = zero_fraction(ts.combined);
    INFO("seed " << seed);
    REQUIRE(std::fabs(frac - 0.5008) < 0.0015);
  }
}

TEST_CASE("qrng_type2 shows the same counteraction with b = 0.52") {
  for (std::uint64_t seed : {5ULL, 17ULL}) {
    auto ts = gen(SourceKind::QrngType2, seed, 128, 8192);
    REQUIRE(std::fabs(zero_fraction(ts.combined) - 0.5008) < 0.0015);
  }
}

TEST_CASE("qrng_type1 is biased toward ones") {
  auto ts = gen(SourceKind::QrngType1, 8, 128, 8192);
  double ones = 1.0 - zero_fraction(ts.combined);
  CHECK(std::fabs(ones - 0.52) < 0.0015);
}

TEST_CASE("qrng_type3 per-qubit streams: independence at rho=0, coupling at rho=0.5") {
  const int shots = 1 << 17;
  auto run_pair_chi2 = [&](double rho, std::uint64_t seed, int qa, int qb) {
    auto ts = gen(SourceKind::QrngType3, seed, 1, shots, 0.52, 0.52, rho);
    const auto& bits = ts.trials[0];
    // 2x2 contingency of (qa, qb) across shots
    double table[2][2] = {{0, 0}, {0, 0}};
    for (int s = 0; s < shots; ++s)
      table[bits[static_cast<std::size_t>(4 * s + qa)]][bits[static_cast<std::size_t>(4 * s + qb)]] += 1.0;
    double rowsum[2] = {table[0][0] + table[0][1], table[1][0] + table[1][1]};
    double colsum[2] = {table[0][0] + table[1][0], table[0][1] + table[1][1]};
    double chi2 = 0.0;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        double expect = rowsum[r] * colsum[c] / shots;
        chi2 += (table[r][c] - expect) * (table[r][c] - expect) / expect;
      }
    return igamc(0.5, chi2 / 2.0);  // 1 degree of freedom
  };

  for (std::uint64_t seed : {2ULL, 4ULL}) {
    for (auto [qa, qb] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {2, 3}, {1, 3}}) {
      INFO("seed " << seed << " pair " << qa << "," << qb);
      REQUIRE(run_pair_chi2(0.0, seed, qa, qb) > 0.001);
      REQUIRE(run_pair_chi2(0.5, seed, qa, qb) < 1e-6);
    }
  }
}

TEST_CASE("type3 marginals survive the coupling") {
  auto ts = gen(SourceKind::QrngType3, 12, 1, 1 << 17, 0.52, 0.52, 0.5);
  const auto& bits = ts.trials[0];
  const int shots = 1 << 17;
  for (int q = 0; q < 4; ++q) {
    double ones = 0;
    for (int s = 0; s < shots; ++s) ones += bits[static_cast<std::size_t>(4 * s + q)];
    double frac = ones / shots;
    double want = q < 2 ? 0.5 : 0.52;
    INFO("qubit " << q);
    REQUIRE(std::fabs(frac - want) < 0.005);
  }
}

TEST_CASE("spec validation") {
  SourceSpec spec;
  spec.kind = SourceKind::Biased;
  spec.p0 = 1.5;
  CHECK_THROWS_WITH(spec.validate(), Catch::Matchers::ContainsSubstring("p0 out of range"));
  spec.p0 = 0.5;
  spec.corr = -2.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.corr = 0.0;
  spec.kind = SourceKind::QrngType3;
  spec.qubit_count = 5;
  CHECK_THROWS_AS(spec.validate(), Error);

  GenerationJob job;
  job.trials = 0;
  CHECK_THROWS_AS(generate(job), Error);
}

TEST_CASE("source kind names round trip") {
  for (auto kind : {SourceKind::IdealQrng, SourceKind::QrngType1, SourceKind::QrngType2,
                    SourceKind::QrngType3, SourceKind::Mt19937, SourceKind::OsCsprng,
                    SourceKind::PiBinary, SourceKind::Biased, SourceKind::BiasedTwoStep}) {
    CHECK(source_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(source_kind_from_string("nope"), Error);
}

TEST_CASE("os_csprng produces roughly balanced bits") {
  auto ts = gen(SourceKind::OsCsprng, 0, 4, 8192);
  double frac = zero_fraction(ts.combined);
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);
}

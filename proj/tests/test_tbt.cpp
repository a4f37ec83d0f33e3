#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "randbat/sources.hpp"
#include "randbat/subseq_criteria.hpp"

using namespace randbat;

namespace {

// greedy prefer-one de Bruijn sequence; first 256 bits form the cyclic core
std::vector<std::uint8_t> de_bruijn_core_8() {
  const int m = 8;
  std::vector<std::uint8_t> seq(m, 0);
  std::set<std::vector<std::uint8_t>> seen;
  seen.insert(seq);
  while (true) {
    std::vector<std::uint8_t> w(seq.end() - (m - 1), seq.end());
    w.push_back(1);
    if (!seen.count(w)) {
      seq.push_back(1);
      seen.insert(w);
      continue;
    }
    w.back() = 0;
    if (!seen.count(w)) {
      seq.push_back(0);
      seen.insert(w);
      continue;
    }
    break;
  }
  seq.resize(256);
  return seq;
}

// brute-force oracle: set of length-m substrings
int unique_oracle(const BitSequence& seq, int m) {
  std::set<std::string> subs;
  std::string s = seq.to_string();
  for (std::size_t i = 0; i + static_cast<std::size_t>(m) <= s.size(); ++i)
    subs.insert(s.substr(i, static_cast<std::size_t>(m)));
  return static_cast<int>(subs.size());
}

BitSequence ideal_bits(std::uint64_t seed, std::size_t n) {
  SplitMix64 eng(seed);
  BitSequence seq;
  seq.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seq.push_back(eng.next_unit() < 0.5 ? 0 : 1);
  return seq;
}

}  // namespace

TEST_CASE("all-zeros block has a single unique window") {
  auto out = tbt_test(BitSequence(std::vector<std::uint8_t>(2048, 0)));
  REQUIRE(out.unique_counts.size() == 1);
  CHECK(out.unique_counts[0] == 1);
  CHECK(out.mean_unique == 1.0);
  CHECK(out.verdict == Verdict::SNR);
  CHECK(out.critical_value == 150);
}

TEST_CASE("repeated de Bruijn core saturates the window count") {
  auto core = de_bruijn_core_8();
  BitSequence block;
  for (int rep = 0; rep < 8; ++rep)
    for (auto b : core) block.push_back(b);
  REQUIRE(block.size() == 2048);
  auto out = tbt_test(block);
  CHECK(out.unique_counts[0] == 256);
  CHECK(out.verdict == Verdict::SR);
  CHECK(unique_oracle(block, 8) == 256);
}

TEST_CASE("a mean of exactly 150 is SNR") {
  // prefix of the greedy de Bruijn walk padded with zeros lands exactly on
  // the critical value
  const int m = 8;
  std::vector<std::uint8_t> greedy(m, 0);
  std::set<std::vector<std::uint8_t>> seen;
  seen.insert(greedy);
  while (greedy.size() < 512) {
    std::vector<std::uint8_t> w(greedy.end() - (m - 1), greedy.end());
    w.push_back(1);
    if (!seen.count(w)) {
      greedy.push_back(1);
      seen.insert(w);
      continue;
    }
    w.back() = 0;
    if (!seen.count(w)) {
      greedy.push_back(0);
      seen.insert(w);
      continue;
    }
    break;
  }
  std::vector<std::uint8_t> bits(greedy.begin(), greedy.begin() + 150);
  bits.resize(2048, 0);
  auto block = BitSequence(bits);
  REQUIRE(unique_oracle(block, 8) == 150);
  auto out = tbt_test(block);
  CHECK(out.mean_unique == 150.0);
  CHECK(out.verdict == Verdict::SNR);
}

TEST_CASE("8192-bit trials average four blocks") {
  auto out = tbt_test(ideal_bits(5, 8192));
  CHECK(out.unique_counts.size() == 4);
  double sum = 0.0;
  for (int u : out.unique_counts) sum += u;
  CHECK(out.mean_unique == Catch::Approx(sum / 4.0));
}

TEST_CASE("length and window validation") {
  CHECK_THROWS_WITH(tbt_test(BitSequence(std::vector<std::uint8_t>(10000, 0))),
                    Catch::Matchers::ContainsSubstring("length not multiple of 2048"));
  CHECK_THROWS_AS(tbt_test(ideal_bits(1, 2048), 7), Error);
  CHECK_THROWS_AS(tbt_test(ideal_bits(1, 2048), 15), Error);
}

TEST_CASE("unique count is invariant under global bit flip") {
  for (std::uint64_t seed = 60; seed < 66; ++seed) {
    auto seq = ideal_bits(seed, 2048);
    BitSequence flipped;
    for (auto b : seq) flipped.push_back(static_cast<std::uint8_t>(1 - b));
    REQUIRE(tbt_test(seq).unique_counts[0] == tbt_test(flipped).unique_counts[0]);
  }
}

TEST_CASE("windowed kernel equals the brute-force oracle") {
  for (std::uint64_t seed = 70; seed < 80; ++seed) {
    auto seq = ideal_bits(seed, 2048);
    REQUIRE(tbt_test(seq).unique_counts[0] == unique_oracle(seq, 8));
  }
  // structured inputs too
  BitSequence period3;
  for (int i = 0; i < 2048; ++i) period3.push_back(static_cast<std::uint8_t>(i % 3 == 0));
  CHECK(tbt_test(period3).unique_counts[0] == unique_oracle(period3, 8));
}

TEST_CASE("seeded ideal source stays near the saturation mean") {
  // 100 blocks; expected unique windows per block is about 255.9
  auto seq = ideal_bits(321, 204800);
  auto out = tbt_test(seq);
  REQUIRE(out.unique_counts.size() == 100);
  CHECK(out.mean_unique >= 250.0);
  CHECK(out.mean_unique <= 256.0);
  CHECK(out.verdict == Verdict::SR);
}

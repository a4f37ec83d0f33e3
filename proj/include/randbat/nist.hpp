#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "randbat/bitseq.hpp"
#include "randbat/fft.hpp"
#include "randbat/gf2.hpp"
#include "randbat/special.hpp"
#include "randbat/templates.hpp"

namespace randbat {

/// P-values below this decision point mean SNR (strict inequality:
/// exactly 0.01 still passes).
constexpr double kDecisionPoint = 0.01;

enum class Verdict { SR, SNR };

inline std::string to_string(Verdict v) { return v == Verdict::SR ? "SR" : "SNR"; }

enum class DftVariant { Corrected, Original };

inline std::string to_string(DftVariant v) {
  return v == DftVariant::Corrected ? "corrected" : "original";
}

struct NistParams {
  int test_id = 0;
  int block_len = 0;     // tests 2, 10; 0 = auto (largest allowed)
  int template_len = 0;  // tests 7, 8; 0 = auto (9)
  int serial_len = 0;    // tests 11, 12; 0 = auto (largest allowed)
  DftVariant dft_variant = DftVariant::Corrected;
};

struct TestOutcome {
  int test_id = 0;
  std::vector<double> pvalues;
  double strict_pvalue = 1.0;
  Verdict verdict = Verdict::SR;
  NistParams params_used;
  bool applicable = true;
  std::string reason;
};

inline const char* nist_test_name(int test_id) {
  switch (test_id) {
    case 1: return "monobit";
    case 2: return "block_frequency";
    case 3: return "runs";
    case 4: return "longest_run_of_ones";
    case 5: return "matrix_rank";
    case 6: return "dft";
    case 7: return "non_overlapping_templates";
    case 8: return "overlapping_templates";
    case 9: return "universal";
    case 10: return "linear_complexity";
    case 11: return "serial";
    case 12: return "approximate_entropy";
    case 13: return "cumulative_sums";
    case 14: return "random_excursions";
    case 15: return "random_excursions_variant";
    case 16: return "borel_normality";
    case 17: return "bayesian_criteria";
    case 18: return "topological_binary";
    default: return "unknown";
  }
}

/// Minimum of a nonempty list; the strict multi-P-value rule reduces a
/// test's P-values with this before comparing against the decision point.
inline double strict_reduce(const std::vector<double>& pvalues) {
  if (pvalues.empty()) throw Error("strict_reduce: empty P-value list");
  return *std::min_element(pvalues.begin(), pvalues.end());
}

/// Recommended minimum sequence length per test; drives which tests the
/// battery runs at a given level.
inline std::size_t nist_min_length(int test_id) {
  switch (test_id) {
    case 1: return 1;
    case 2: return 100;
    case 3: return 100;
    case 4: return 128;
    case 5: return 38912;
    case 6: return 1000;
    case 7: return 1000000;
    case 8: return 1000000;
    case 9: return 387840;
    case 10: return 1000000;
    case 11: return 100;
    case 12: return 128;
    case 13: return 100;
    case 14: return 1000000;
    case 15: return 1000000;
    default: throw Error("nist_min_length: test_id out of range");
  }
}

inline std::set<int> applicable_tests(std::size_t n) {
  std::set<int> out;
  for (int t = 1; t <= 15; ++t)
    if (n >= nist_min_length(t)) out.insert(t);
  return out;
}

/// Largest allowed block parameter for the parameterized tests (2, 10, 11,
/// 12), resolved deterministically from the sequence length.
inline NistParams resolve_max_params(int test_id, std::size_t n) {
  NistParams p;
  p.test_id = test_id;
  if (n < nist_min_length(test_id))
    throw Error(std::string("resolve_max_params: sequence below minimum length for ") +
                nist_test_name(test_id));
  const int log2n = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
  switch (test_id) {
    case 2:
      // M <= floor(n/100) keeps at least 100 blocks; floor for strictness
      p.block_len = std::max<int>(20, static_cast<int>(n / 100));
      break;
    case 10: {
      // largest M in [500, 5000] with at least 200 blocks
      int m = static_cast<int>(std::min<std::size_t>(5000, n / 200));
      if (m < 500) throw Error("resolve_max_params: sequence below minimum length for linear_complexity");
      p.block_len = m;
      break;
    }
    case 11:
      p.serial_len = log2n - 3;  // strict bound is m < floor(log2 n) - 2
      break;
    case 12:
      p.serial_len = log2n - 6;  // strict bound is m < floor(log2 n) - 5
      break;
    default:
      throw Error("resolve_max_params: test has no block parameter");
  }
  return p;
}

namespace detail {

inline TestOutcome not_applicable(NistParams params, std::string reason) {
  TestOutcome out;
  out.test_id = params.test_id;
  out.params_used = params;
  out.applicable = false;
  out.reason = std::move(reason);
  out.strict_pvalue = 1.0;
  out.verdict = Verdict::SR;
  return out;
}

inline TestOutcome finish(NistParams params, std::vector<double> pvalues) {
  TestOutcome out;
  out.test_id = params.test_id;
  out.params_used = params;
  out.pvalues = std::move(pvalues);
  out.strict_pvalue = strict_reduce(out.pvalues);
  out.verdict = out.strict_pvalue < kDecisionPoint ? Verdict::SNR : Verdict::SR;
  return out;
}

// ---- test 1: monobit ----
inline TestOutcome monobit(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 1) return not_applicable(p, "empty sequence");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += 2.0 * seq[i] - 1.0;
  double s_obs = std::fabs(sum) / std::sqrt(static_cast<double>(n));
  return finish(p, {std::erfc(s_obs / std::sqrt(2.0))});
}

// ---- test 2: frequency within a block ----
inline TestOutcome block_frequency(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.block_len == 0) {
    if (n < nist_min_length(2)) return not_applicable(p, "sequence shorter than test minimum");
    p.block_len = resolve_max_params(2, n).block_len;
  }
  const std::size_t M = static_cast<std::size_t>(p.block_len);
  const std::size_t N = n / M;
  if (N == 0) return not_applicable(p, "sequence shorter than one block");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < M; ++j) ones += seq[i * M + j];
    double pi = static_cast<double>(ones) / static_cast<double>(M);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(M);
  return finish(p, {igamc(static_cast<double>(N) / 2.0, chi2 / 2.0)});
}

// ---- test 3: runs ----
inline TestOutcome runs(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 2) return not_applicable(p, "sequence shorter than test minimum");
  double pi = static_cast<double>(seq.count_ones()) / static_cast<double>(n);
  double tau = 2.0 / std::sqrt(static_cast<double>(n));
  if (std::fabs(pi - 0.5) >= tau) {
    // frequency precondition failed: maximally non-random by this test
    return finish(p, {0.0});
  }
  std::size_t v = 1;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (seq[i] != seq[i + 1]) ++v;
  double product = pi * (1.0 - pi);
  if (product == 0.0) return finish(p, {0.0});
  double arg = std::fabs(static_cast<double>(v) - 2.0 * static_cast<double>(n) * product) /
               (2.0 * std::sqrt(2.0 * static_cast<double>(n)) * product);
  return finish(p, {std::erfc(arg)});
}

// ---- test 4: longest run of ones in a block ----
inline TestOutcome longest_run(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 128) return not_applicable(p, "sequence shorter than test minimum");
  std::size_t M;
  int K;
  std::vector<double> pi;
  std::vector<int> lower;  // class c holds longest-run values <= lower[c] (last class open)
  if (n < 6272) {
    M = 8, K = 3;
    pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
    lower = {1, 2, 3};
  } else if (n < 750000) {
    M = 128, K = 5;
    pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
    lower = {4, 5, 6, 7, 8};
  } else {
    M = 10000, K = 6;
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    lower = {10, 11, 12, 13, 14, 15};
  }
  p.block_len = static_cast<int>(M);
  const std::size_t N = n / M;
  std::vector<std::size_t> nu(static_cast<std::size_t>(K) + 1, 0);
  for (std::size_t i = 0; i < N; ++i) {
    int run = 0, longest = 0;
    for (std::size_t j = i * M; j < (i + 1) * M; ++j) {
      run = seq[j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    int cls = K;
    for (int c = 0; c <= K - 1; ++c) {
      if (longest <= lower[static_cast<std::size_t>(c)]) {
        cls = c;
        break;
      }
    }
    ++nu[static_cast<std::size_t>(cls)];
  }
  double chi2 = 0.0;
  for (int c = 0; c <= K; ++c) {
    double expect = static_cast<double>(N) * pi[static_cast<std::size_t>(c)];
    double dv = static_cast<double>(nu[static_cast<std::size_t>(c)]) - expect;
    chi2 += dv * dv / expect;
  }
  return finish(p, {igamc(K / 2.0, chi2 / 2.0)});
}

// ---- test 5: binary matrix rank ----
inline TestOutcome matrix_rank(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  const std::size_t N = n / 1024;
  if (N == 0) return not_applicable(p, "sequence shorter than one 32x32 matrix");
  // rank distribution of a random 32x32 matrix over GF(2)
  auto rank_prob = [](int r) {
    double prob = std::pow(2.0, static_cast<double>(r) * (64 - r) - 1024);
    for (int i = 0; i < r; ++i) {
      double t = 1.0 - std::pow(2.0, static_cast<double>(i) - 32);
      prob *= t * t / (1.0 - std::pow(2.0, static_cast<double>(i) - r));
    }
    return prob;
  };
  const double p32 = rank_prob(32);
  const double p31 = rank_prob(31);
  const double p30 = 1.0 - p32 - p31;
  std::size_t f32 = 0, f31 = 0;
  for (std::size_t k = 0; k < N; ++k) {
    int r = gf2_rank_32x32(seq, k * 1024);
    if (r == 32) ++f32;
    else if (r == 31) ++f31;
  }
  const double f30 = static_cast<double>(N - f32 - f31);
  const double Nd = static_cast<double>(N);
  double chi2 = (static_cast<double>(f32) - Nd * p32) * (static_cast<double>(f32) - Nd * p32) / (Nd * p32) +
                (static_cast<double>(f31) - Nd * p31) * (static_cast<double>(f31) - Nd * p31) / (Nd * p31) +
                (f30 - Nd * p30) * (f30 - Nd * p30) / (Nd * p30);
  return finish(p, {std::exp(-chi2 / 2.0)});
}

// ---- test 6: discrete Fourier transform (spectral) ----
inline TestOutcome dft_test(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 8) return not_applicable(p, "sequence shorter than test minimum");
  auto mods = dft_moduli_half(seq);
  const double nd = static_cast<double>(n);
  double threshold, denom;
  if (p.dft_variant == DftVariant::Corrected) {
    threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
    denom = std::sqrt(nd * 0.95 * 0.05 / 4.0);
  } else {
    threshold = std::sqrt(3.0 * nd);
    denom = std::sqrt(nd * 0.95 * 0.05 / 2.0);
  }
  double n1 = 0.0;
  for (double m : mods)
    if (m < threshold) n1 += 1.0;
  const double n0 = 0.95 * nd / 2.0;
  double d = (n1 - n0) / denom;
  return finish(p, {std::erfc(std::fabs(d) / std::sqrt(2.0))});
}

// P-value for one template over N blocks of M bits (non-overlapping scan).
inline double nonoverlap_template_pvalue(const BitSequence& seq, std::uint32_t tmpl, int m,
                                         std::size_t N) {
  const std::size_t M = seq.size() / N;
  const double lambda = static_cast<double>(M - static_cast<std::size_t>(m) + 1) /
                        std::pow(2.0, static_cast<double>(m));
  const double var = static_cast<double>(M) *
                     (1.0 / std::pow(2.0, m) - (2.0 * m - 1.0) / std::pow(2.0, 2.0 * m));
  const std::uint32_t mask = (m == 32) ? 0xFFFFFFFFu : ((1u << m) - 1u);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t base = i * M;
    std::size_t W = 0;
    std::size_t j = 0;
    // maintain the current window value while sliding one bit at a time
    std::uint32_t window = 0;
    for (int k = 0; k < m - 1; ++k) window = (window << 1) | seq[base + static_cast<std::size_t>(k)];
    while (j + static_cast<std::size_t>(m) <= M) {
      window = ((window << 1) | seq[base + j + static_cast<std::size_t>(m) - 1]) & mask;
      if (window == tmpl) {
        ++W;
        if (j + 2 * static_cast<std::size_t>(m) - 1 < M) {
          // skip ahead m bits and rebuild the window
          window = 0;
          for (int k = 0; k < m - 1; ++k)
            window = (window << 1) | seq[base + j + static_cast<std::size_t>(m) + static_cast<std::size_t>(k)];
        }
        j += static_cast<std::size_t>(m);
      } else {
        ++j;
      }
    }
    double dv = static_cast<double>(W) - lambda;
    chi2 += dv * dv / var;
  }
  return igamc(static_cast<double>(N) / 2.0, chi2 / 2.0);
}

// ---- test 7: non-overlapping template matching ----
inline TestOutcome non_overlapping_templates(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.template_len == 0) p.template_len = 9;
  const int m = p.template_len;
  constexpr std::size_t N = 8;
  if (n / N < static_cast<std::size_t>(m) + 1)
    return not_applicable(p, "sequence shorter than test minimum");
  const auto templates = aperiodic_templates(m);
  std::vector<double> pvalues;
  pvalues.reserve(templates.size());
  for (std::uint32_t t : templates)
    pvalues.push_back(nonoverlap_template_pvalue(seq, t, m, N));
  return finish(p, std::move(pvalues));
}

// ---- test 8: overlapping template matching ----
inline TestOutcome overlapping_templates(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.template_len == 0) p.template_len = 9;
  const int m = p.template_len;
  constexpr std::size_t M = 1032;
  constexpr int K = 5;
  const std::size_t N = n / M;
  if (N == 0) return not_applicable(p, "sequence shorter than one block");
  const double lambda = static_cast<double>(M - static_cast<std::size_t>(m) + 1) /
                        std::pow(2.0, static_cast<double>(m));
  const double eta = lambda / 2.0;
  // P(u occurrences), compound Poisson approximation
  auto pr = [&](int u) {
    if (u == 0) return std::exp(-eta);
    double sum = 0.0;
    for (int l = 1; l <= u; ++l)
      sum += std::exp(-eta - u * std::log(2.0) + l * std::log(eta) - std::lgamma(l + 1.0) +
                      std::lgamma(static_cast<double>(u)) - std::lgamma(static_cast<double>(l)) -
                      std::lgamma(static_cast<double>(u - l + 1)));
    return sum;
  };
  std::array<double, K + 1> pi{};
  double sum = 0.0;
  for (int u = 0; u < K; ++u) {
    pi[static_cast<std::size_t>(u)] = pr(u);
    sum += pi[static_cast<std::size_t>(u)];
  }
  pi[K] = 1.0 - sum;

  std::array<std::size_t, K + 1> nu{};
  const std::uint32_t mask = (1u << m) - 1u;
  const std::uint32_t target = mask;  // all-ones template
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t base = i * M;
    std::uint32_t window = 0;
    for (int k = 0; k < m - 1; ++k) window = (window << 1) | seq[base + static_cast<std::size_t>(k)];
    int W = 0;
    for (std::size_t j = 0; j + static_cast<std::size_t>(m) <= M; ++j) {
      window = ((window << 1) | seq[base + j + static_cast<std::size_t>(m) - 1]) & mask;
      if (window == target) ++W;
    }
    ++nu[static_cast<std::size_t>(std::min(W, K))];
  }
  double chi2 = 0.0;
  for (int c = 0; c <= K; ++c) {
    double expect = static_cast<double>(N) * pi[static_cast<std::size_t>(c)];
    double dv = static_cast<double>(nu[static_cast<std::size_t>(c)]) - expect;
    chi2 += dv * dv / expect;
  }
  return finish(p, {igamc(K / 2.0, chi2 / 2.0)});
}

// ---- test 9: Maurer's universal statistical test ----
inline TestOutcome universal(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 387840) return not_applicable(p, "sequence shorter than test minimum");
  int L = 6;
  if (n >= 904960) L = 7;
  if (n >= 2068480) L = 8;
  if (n >= 4654080) L = 9;
  if (n >= 10342400) L = 10;
  if (n >= 22753280) L = 11;
  if (n >= 49643520) L = 12;
  if (n >= 107560960) L = 13;
  if (n >= 231669760) L = 14;
  if (n >= 496435200) L = 15;
  if (n >= 1059061760) L = 16;
  p.block_len = L;
  static const double expected[17] = {0, 0, 0, 0, 0, 0,
                                      5.2177052, 6.1962507, 7.1836656, 8.1764248, 9.1723243,
                                      10.170032, 11.168765, 12.168070, 13.167693, 14.167488,
                                      15.167379};
  static const double variance[17] = {0, 0, 0, 0, 0, 0,
                                      2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401,
                                      3.410, 3.416, 3.419, 3.421};
  const std::size_t Q = 10 * (std::size_t{1} << L);
  const std::size_t K = n / static_cast<std::size_t>(L) - Q;
  std::vector<std::size_t> table(std::size_t{1} << L, 0);
  auto block_value = [&](std::size_t blk) {
    std::size_t v = 0;
    for (int j = 0; j < L; ++j) v = (v << 1) | seq[blk * static_cast<std::size_t>(L) + static_cast<std::size_t>(j)];
    return v;
  };
  for (std::size_t i = 1; i <= Q; ++i) table[block_value(i - 1)] = i;
  double sum = 0.0;
  const double inv_log2 = 1.0 / std::log(2.0);
  for (std::size_t i = Q + 1; i <= Q + K; ++i) {
    std::size_t v = block_value(i - 1);
    sum += std::log(static_cast<double>(i - table[v])) * inv_log2;
    table[v] = i;
  }
  const double phi = sum / static_cast<double>(K);
  const double c = 0.7 - 0.8 / L +
                   (4.0 + 32.0 / L) * std::pow(static_cast<double>(K), -3.0 / L) / 15.0;
  const double sigma = c * std::sqrt(variance[L] / static_cast<double>(K));
  const double arg = std::fabs(phi - expected[L]) / (std::sqrt(2.0) * sigma);
  return finish(p, {std::erfc(arg)});
}

// ---- test 10: linear complexity ----
inline TestOutcome linear_complexity(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.block_len == 0) {
    if (n < nist_min_length(10)) return not_applicable(p, "sequence shorter than test minimum");
    p.block_len = resolve_max_params(10, n).block_len;
  }
  const int M = p.block_len;
  if (M < 500 || M > 5000) throw Error("linear_complexity: block length must be in [500, 5000]");
  const std::size_t N = n / static_cast<std::size_t>(M);
  if (N == 0) return not_applicable(p, "sequence shorter than one block");
  static const double pi[7] = {0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833};
  const bool even = (M % 2) == 0;
  const double mu = M / 2.0 + (9.0 + (even ? -1.0 : 1.0)) / 36.0 -
                    (M / 3.0 + 2.0 / 9.0) / std::pow(2.0, static_cast<double>(M));
  std::array<std::size_t, 7> nu{};
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t L = berlekamp_massey(seq.data() + i * static_cast<std::size_t>(M),
                                     static_cast<std::size_t>(M));
    double T = (even ? 1.0 : -1.0) * (static_cast<double>(L) - mu) + 2.0 / 9.0;
    int cls;
    if (T <= -2.5) cls = 0;
    else if (T <= -1.5) cls = 1;
    else if (T <= -0.5) cls = 2;
    else if (T <= 0.5) cls = 3;
    else if (T <= 1.5) cls = 4;
    else if (T <= 2.5) cls = 5;
    else cls = 6;
    ++nu[static_cast<std::size_t>(cls)];
  }
  double chi2 = 0.0;
  for (int c = 0; c < 7; ++c) {
    double expect = static_cast<double>(N) * pi[c];
    double dv = static_cast<double>(nu[static_cast<std::size_t>(c)]) - expect;
    chi2 += dv * dv / expect;
  }
  return finish(p, {igamc(3.0, chi2 / 2.0)});
}

// Overlapping m-bit pattern counts with wraparound; shared by serial/apen.
inline std::vector<std::size_t> pattern_counts(const BitSequence& seq, int m) {
  const std::size_t n = seq.size();
  std::vector<std::size_t> counts(std::size_t{1} << m, 0);
  const std::size_t mask = (std::size_t{1} << m) - 1;
  std::size_t window = 0;
  for (int k = 0; k < m - 1; ++k) window = (window << 1) | seq[static_cast<std::size_t>(k) % n];
  for (std::size_t i = 0; i < n; ++i) {
    window = ((window << 1) | seq[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    ++counts[window];
  }
  return counts;
}

inline double psi_sq(const BitSequence& seq, int m) {
  if (m <= 0) return 0.0;
  const double n = static_cast<double>(seq.size());
  auto counts = pattern_counts(seq, m);
  double sum = 0.0;
  for (std::size_t c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  return sum * std::pow(2.0, static_cast<double>(m)) / n - n;
}

// ---- test 11: serial ----
inline TestOutcome serial(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.serial_len == 0) {
    if (n < nist_min_length(11)) return not_applicable(p, "sequence shorter than test minimum");
    p.serial_len = resolve_max_params(11, n).serial_len;
  }
  const int m = p.serial_len;
  if (m < 2) return not_applicable(p, "resolved pattern length below 2");
  if (n < static_cast<std::size_t>(m)) return not_applicable(p, "sequence shorter than pattern");
  const double psim0 = psi_sq(seq, m);
  const double psim1 = psi_sq(seq, m - 1);
  const double psim2 = psi_sq(seq, m - 2);
  const double del1 = psim0 - psim1;
  const double del2 = psim0 - 2.0 * psim1 + psim2;
  const double p1 = igamc(std::pow(2.0, m - 2), del1 / 2.0);
  const double p2 = igamc(std::pow(2.0, m - 3), del2 / 2.0);
  return finish(p, {p1, p2});
}

// ---- test 12: approximate entropy ----
inline TestOutcome approximate_entropy(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (p.serial_len == 0) {
    if (n < nist_min_length(12)) return not_applicable(p, "sequence shorter than test minimum");
    p.serial_len = resolve_max_params(12, n).serial_len;
  }
  const int m = p.serial_len;
  if (m < 1) return not_applicable(p, "resolved block length below 1");
  if (n < static_cast<std::size_t>(m) + 1) return not_applicable(p, "sequence shorter than block");
  auto phi = [&](int mm) {
    if (mm == 0) return 0.0;
    auto counts = pattern_counts(seq, mm);
    double s = 0.0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      double ci = static_cast<double>(c) / static_cast<double>(n);
      s += ci * std::log(ci);
    }
    return s;
  };
  const double apen = phi(m) - phi(m + 1);
  const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - apen);
  return finish(p, {igamc(std::pow(2.0, m - 1), chi2 / 2.0)});
}

// ---- test 13: cumulative sums (13.1 forward, 13.2 backward) ----
inline TestOutcome cumulative_sums(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 2) return not_applicable(p, "sequence shorter than test minimum");
  const double nd = static_cast<double>(n);
  auto one_mode = [&](bool forward) {
    long s = 0, z = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint8_t b = forward ? seq[i] : seq[n - 1 - i];
      s += 2 * static_cast<int>(b) - 1;
      z = std::max(z, std::labs(s));
    }
    const double zd = static_cast<double>(z);
    const double sq = std::sqrt(nd);
    double sum1 = 0.0;
    long start = static_cast<long>(std::floor((-nd / zd + 1.0) / 4.0));
    long finish = static_cast<long>(std::floor((nd / zd - 1.0) / 4.0));
    for (long k = start; k <= finish; ++k)
      sum1 += normal_cdf((4.0 * k + 1.0) * zd / sq) - normal_cdf((4.0 * k - 1.0) * zd / sq);
    double sum2 = 0.0;
    start = static_cast<long>(std::floor((-nd / zd - 3.0) / 4.0));
    for (long k = start; k <= finish; ++k)
      sum2 += normal_cdf((4.0 * k + 3.0) * zd / sq) - normal_cdf((4.0 * k + 1.0) * zd / sq);
    return 1.0 - sum1 + sum2;
  };
  return finish(p, {one_mode(true), one_mode(false)});
}

struct ExcursionWalk {
  std::vector<long> walk;      // leading 0, the partial sums, appended 0 if needed
  std::vector<std::size_t> zeros;  // positions of zeros within walk
  std::size_t cycles = 0;
};

inline ExcursionWalk excursion_walk(const BitSequence& seq) {
  ExcursionWalk w;
  w.walk.reserve(seq.size() + 2);
  w.walk.push_back(0);
  long s = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    s += 2 * static_cast<int>(seq[i]) - 1;
    w.walk.push_back(s);
  }
  if (s != 0) w.walk.push_back(0);
  for (std::size_t i = 0; i < w.walk.size(); ++i)
    if (w.walk[i] == 0) w.zeros.push_back(i);
  w.cycles = w.zeros.size() - 1;
  return w;
}

// ---- test 14: random excursions ----
inline TestOutcome random_excursions(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 2) return not_applicable(p, "sequence shorter than test minimum");
  auto w = excursion_walk(seq);
  const std::size_t J = w.cycles;
  const std::size_t constraint =
      std::max<std::size_t>(500, static_cast<std::size_t>(0.005 * std::sqrt(static_cast<double>(n))));
  if (J < constraint)
    return not_applicable(p, "insufficient cycles (J=" + std::to_string(J) + ", need " +
                                 std::to_string(constraint) + ")");
  auto pi_k = [](int x, int k) {
    double ax = std::fabs(static_cast<double>(x));
    if (k == 0) return 1.0 - 1.0 / (2.0 * ax);
    if (k <= 4)
      return (1.0 / (4.0 * ax * ax)) * std::pow(1.0 - 1.0 / (2.0 * ax), k - 1);
    return (1.0 / (2.0 * ax)) * std::pow(1.0 - 1.0 / (2.0 * ax), 4);
  };
  static const int states[8] = {-4, -3, -2, -1, 1, 2, 3, 4};
  // nu[k][state]: cycles with exactly k visits (k capped at 5)
  std::array<std::array<std::size_t, 8>, 6> nu{};
  for (std::size_t c = 0; c < J; ++c) {
    std::array<std::size_t, 8> visits{};
    for (std::size_t i = w.zeros[c] + 1; i < w.zeros[c + 1]; ++i) {
      long v = w.walk[i];
      if (v >= -4 && v <= 4 && v != 0) {
        int idx = v < 0 ? static_cast<int>(v) + 4 : static_cast<int>(v) + 3;
        ++visits[static_cast<std::size_t>(idx)];
      }
    }
    for (int s = 0; s < 8; ++s)
      ++nu[std::min<std::size_t>(visits[static_cast<std::size_t>(s)], 5)][static_cast<std::size_t>(s)];
  }
  std::vector<double> pvalues(8);
  for (int s = 0; s < 8; ++s) {
    double chi2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      double expect = static_cast<double>(J) * pi_k(states[s], k);
      double dv = static_cast<double>(nu[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]) - expect;
      chi2 += dv * dv / expect;
    }
    pvalues[static_cast<std::size_t>(s)] = igamc(2.5, chi2 / 2.0);
  }
  return finish(p, std::move(pvalues));
}

// ---- test 15: random excursions variant ----
inline TestOutcome random_excursions_variant(const BitSequence& seq, NistParams p) {
  const std::size_t n = seq.size();
  if (n < 2) return not_applicable(p, "sequence shorter than test minimum");
  auto w = excursion_walk(seq);
  const std::size_t J = w.cycles;
  const std::size_t constraint =
      std::max<std::size_t>(500, static_cast<std::size_t>(0.005 * std::sqrt(static_cast<double>(n))));
  if (J < constraint)
    return not_applicable(p, "insufficient cycles (J=" + std::to_string(J) + ", need " +
                                 std::to_string(constraint) + ")");
  std::vector<double> pvalues;
  pvalues.reserve(18);
  for (int x = -9; x <= 9; ++x) {
    if (x == 0) continue;
    std::size_t xi = 0;
    for (std::size_t i = 1; i < w.walk.size(); ++i)
      if (w.walk[i] == x) ++xi;
    double arg = std::fabs(static_cast<double>(xi) - static_cast<double>(J)) /
                 std::sqrt(2.0 * static_cast<double>(J) * (4.0 * std::fabs(static_cast<double>(x)) - 2.0));
    pvalues.push_back(std::erfc(arg));
  }
  return finish(p, std::move(pvalues));
}

}  // namespace detail

/// Runs one of tests 1..15 on `seq`. Auto parameters resolve to the largest
/// allowed values; explicit parameters run whenever the statistic is
/// computable (the battery separately gates tests on recommended minimum
/// lengths via applicable_tests).
inline TestOutcome run_nist_test(const BitSequence& seq, NistParams params) {
  using namespace detail;
  switch (params.test_id) {
    case 1: return monobit(seq, params);
    case 2: return block_frequency(seq, params);
    case 3: return runs(seq, params);
    case 4: return longest_run(seq, params);
    case 5: return matrix_rank(seq, params);
    case 6: return dft_test(seq, params);
    case 7: return non_overlapping_templates(seq, params);
    case 8: return overlapping_templates(seq, params);
    case 9: return universal(seq, params);
    case 10: return linear_complexity(seq, params);
    case 11: return serial(seq, params);
    case 12: return approximate_entropy(seq, params);
    case 13: return cumulative_sums(seq, params);
    case 14: return random_excursions(seq, params);
    case 15: return random_excursions_variant(seq, params);
    default: throw Error("run_nist_test: test_id must be in 1..15");
  }
}

inline TestOutcome run_nist_test(const BitSequence& seq, int test_id) {
  NistParams p;
  p.test_id = test_id;
  return run_nist_test(seq, p);
}

}  // namespace randbat

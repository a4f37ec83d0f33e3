#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "randbat/bitseq.hpp"
#include "randbat/nist.hpp"

namespace randbat {

/// Outcome of the LHS/RHS bound tests (16: Borel normality, 17: Bayesian
/// criteria). For test 16 `lhs` holds one value per subsequence (2^i
/// entries, pattern order MSB-first ascending); for test 17 a single
/// aggregate per i.
struct LhsRhsOutcome {
  struct PerI {
    int i = 0;
    std::vector<double> lhs;
    double rhs = 0.0;
  };
  int test_id = 0;
  std::vector<PerI> per_i;
  Verdict verdict = Verdict::SR;
  int i_max = 1;
  std::size_t violations = 0;
};

/// Largest subsequence length examined: floor(log2(log2 n)), at least 1.
inline int subseq_i_max(std::size_t n) {
  if (n < 4) return 1;
  double l2 = std::log2(static_cast<double>(n));
  int v = static_cast<int>(std::floor(std::log2(l2)));
  return std::max(1, v);
}

namespace detail {

// counts of each i-bit pattern over the floor(n/i) non-overlapping blocks
inline std::vector<std::size_t> block_counts(const BitSequence& seq, int i) {
  std::vector<std::size_t> counts(std::size_t{1} << i, 0);
  const std::size_t nblocks = seq.size() / static_cast<std::size_t>(i);
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t v = 0;
    for (int j = 0; j < i; ++j)
      v = (v << 1) | seq[b * static_cast<std::size_t>(i) + static_cast<std::size_t>(j)];
    ++counts[v];
  }
  return counts;
}

}  // namespace detail

/// Test 16. For every pattern s of each length i: lhs(s) is the observed
/// non-overlapping block frequency minus 2^-i; the sequence is SR when every
/// |lhs| stays within rhs = sqrt(log2(n)/n).
inline LhsRhsOutcome borel_test(const BitSequence& seq, int i_max_override = 0) {
  const std::size_t n = seq.size();
  if (n < 32) throw Error("borel_test: sequence shorter than 32 bits");
  LhsRhsOutcome out;
  out.test_id = 16;
  out.i_max = i_max_override > 0 ? i_max_override : subseq_i_max(n);
  const double rhs = std::sqrt(std::log2(static_cast<double>(n)) / static_cast<double>(n));
  for (int i = 1; i <= out.i_max; ++i) {
    auto counts = detail::block_counts(seq, i);
    const double nblocks = static_cast<double>(n / static_cast<std::size_t>(i));
    LhsRhsOutcome::PerI rec;
    rec.i = i;
    rec.rhs = rhs;
    rec.lhs.reserve(counts.size());
    const double uniform = std::pow(2.0, -i);
    for (std::size_t c : counts) {
      double lhs = static_cast<double>(c) / nblocks - uniform;
      rec.lhs.push_back(lhs);
      if (std::fabs(lhs) > rhs) ++out.violations;
    }
    out.per_i.push_back(std::move(rec));
  }
  out.verdict = out.violations > 0 ? Verdict::SNR : Verdict::SR;
  return out;
}

/// Test 17. lhs(i) is the log Bayes factor of a symmetric Dirichlet(1)
/// multinomial model over the exact-uniform model for the non-overlapping
/// block counts; rhs(i) = 0. SR when lhs(i) < rhs(i) for every i. This is a
/// reconstruction of the criterion (the underlying reference formulas are
/// not restated by the battery's sources); positive lhs means the counts
/// favor a biased model.
inline LhsRhsOutcome bayesian_test(const BitSequence& seq, int i_max_override = 0) {
  const std::size_t n = seq.size();
  if (n < 32) throw Error("bayesian_test: sequence shorter than 32 bits");
  LhsRhsOutcome out;
  out.test_id = 17;
  out.i_max = i_max_override > 0 ? i_max_override : subseq_i_max(n);
  for (int i = 1; i <= out.i_max; ++i) {
    auto counts = detail::block_counts(seq, i);
    const long double K = static_cast<long double>(counts.size());
    std::size_t total = 0;
    // extended precision: the lgamma terms reach ~1e7 and cancel almost
    // completely, so double would lose the small final value
    long double sum_lg = 0.0L;
    for (std::size_t c : counts) {
      total += c;
      sum_lg += std::lgamma(static_cast<long double>(c) + 1.0L);
    }
    const long double N = static_cast<long double>(total);
    // log Dirichlet(1) marginal minus log uniform likelihood
    double lhs = static_cast<double>(std::lgamma(K) + sum_lg - std::lgamma(N + K) +
                                     N * std::log(K));
    LhsRhsOutcome::PerI rec;
    rec.i = i;
    rec.rhs = 0.0;
    rec.lhs.push_back(lhs);
    if (lhs >= rec.rhs) ++out.violations;
    out.per_i.push_back(std::move(rec));
  }
  out.verdict = out.violations > 0 ? Verdict::SNR : Verdict::SR;
  return out;
}

/// Outcome of test 18, the topological binary test.
struct TbtOutcome {
  int m = 8;
  std::size_t required_len = 2048;
  std::vector<int> unique_counts;  // one per 2048-bit block
  double mean_unique = 0.0;
  int critical_value = 150;
  Verdict verdict = Verdict::SR;
};

/// Number of distinct overlapping m-bit windows in a 2048-bit block.
inline int tbt_unique_windows(const BitSequence& seq, std::size_t offset, std::size_t len, int m) {
  std::vector<bool> seen(std::size_t{1} << m, false);
  const std::uint32_t mask = (1u << m) - 1u;
  std::uint32_t window = 0;
  for (int k = 0; k < m - 1; ++k) window = (window << 1) | seq[offset + static_cast<std::size_t>(k)];
  int unique = 0;
  for (std::size_t j = 0; j + static_cast<std::size_t>(m) <= len; ++j) {
    window = ((window << 1) | seq[offset + j + static_cast<std::size_t>(m) - 1]) & mask;
    if (!seen[window]) {
      seen[window] = true;
      ++unique;
    }
  }
  return unique;
}

/// Test 18 for m = 8: partition into 2048-bit blocks, count distinct
/// overlapping 8-bit windows per block, compare the mean to the critical
/// value 150. SR requires the mean to exceed it strictly.
inline TbtOutcome tbt_test(const BitSequence& trial, int m = 8) {
  if (m != 8) throw Error("tbt_test: only m = 8 is supported (critical value known)");
  constexpr std::size_t kBlock = 2048;
  if (trial.size() == 0 || trial.size() % kBlock != 0)
    throw Error("tbt_test: length not multiple of 2048");
  TbtOutcome out;
  out.m = m;
  out.required_len = kBlock;
  out.critical_value = 150;
  const std::size_t nblocks = trial.size() / kBlock;
  double sum = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    int u = tbt_unique_windows(trial, b * kBlock, kBlock, m);
    out.unique_counts.push_back(u);
    sum += u;
  }
  out.mean_unique = sum / static_cast<double>(nblocks);
  out.verdict = out.mean_unique > out.critical_value ? Verdict::SR : Verdict::SNR;
  return out;
}

}  // namespace randbat

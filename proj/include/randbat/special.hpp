#pragma once

#include <cmath>
#include <stdexcept>

#include "randbat/bitseq.hpp"

namespace randbat {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
/// Series for x < a+1, continued fraction (modified Lentz) otherwise.
inline double igamc(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error("igamc: domain error");
  if (x == 0.0) return 1.0;

  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kFpMin = 1e-300;

  if (x < a + 1.0) {
    // lower series: P(a,x) = e^{-x} x^a / Gamma(a) * sum_n x^n / (aetc)
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * kEps) {
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
      }
    }
    throw Error("igamc: series did not converge");
  }

  // upper continued fraction
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw Error("igamc: continued fraction did not converge");
}

/// Regularized lower incomplete gamma P(a, x).
inline double igam(double a, double x) { return 1.0 - igamc(a, x); }

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace randbat

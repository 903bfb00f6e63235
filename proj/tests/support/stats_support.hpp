#pragma once

// Statistical helpers for randomized tests: chi-square goodness-of-fit
// p-values via the regularized incomplete gamma function (series expansion
// for small arguments, continued fraction otherwise).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace test_support {

inline double gamma_series_p(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_cf_q(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
  return gamma_cf_q(a, x);
}

/// P(chi2 >= stat) with df degrees of freedom.
inline double chi_square_pvalue(double stat, double df) { return gamma_q(df / 2.0, stat / 2.0); }

/// Chi-square statistic of observed counts against expected probabilities.
/// Bins with expected count below min_expected are pooled into the last
/// usable bin. Returns {stat, degrees of freedom}.
struct ChiSquare {
  double stat;
  double df;
};

inline ChiSquare chi_square_stat(const std::vector<std::uint64_t>& observed,
                                 const std::vector<double>& probs, double total,
                                 double min_expected = 5.0) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_stat: size mismatch");
  double stat = 0.0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int bins = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double expected = probs[i] * total;
    if (expected < min_expected) {
      pooled_obs += double(observed[i]);
      pooled_exp += expected;
      continue;
    }
    const double diff = double(observed[i]) - expected;
    stat += diff * diff / expected;
    ++bins;
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++bins;
  }
  if (bins < 2) throw std::invalid_argument("chi_square_stat: too few usable bins");
  return {stat, double(bins - 1)};
}

/// Convenience: p-value of observed counts against expected probabilities.
inline double chi_square_test(const std::vector<std::uint64_t>& observed,
                              const std::vector<double>& probs, double total) {
  auto [stat, df] = chi_square_stat(observed, probs, total);
  return chi_square_pvalue(stat, df);
}

}  // namespace test_support

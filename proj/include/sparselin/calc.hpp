#pragma once

// Closed-form sample bounds and time proxies for the two attacks, evaluated
// in log2 space so that astronomically large values stay representable. Raw
// values accompany every entry that fits in a double.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "instance.hpp"

namespace sparselin {

/// Inputs for the sample-time tradeoff calculator. Either fix the lift order
/// l directly, or give a time budget exponent: a budget of 2^{delta n}
/// operations pins l through the crossover rule l ~ delta n / (log q + log n).
struct TradeoffQuery {
  u32 n = 0;
  u32 k = 0;
  u32 q = 0;
  NoiseSpec noise;
  u32 l = 0;                       // 0 derives l from the time budget
  double time_budget_delta = 0.0;  // exponent delta in the 2^{delta n} budget
  double d = 0.0;  // flip-noise margin exponent (mu <= (q-1)/q - n^{-d}); 0 drops the n^{2d} factor
  double eps = 0.5;    // tolerance in the reduced-time proxy
  double alpha = 1.0;  // constant inside the sample-bound formulas

  void validate() const {
    if (n < 1 || k < 1 || k > n) throw parameter_error("TradeoffQuery: need 1 <= k <= n");
    if (q < 2) throw parameter_error("TradeoffQuery: modulus must be at least 2");
    noise.validate(q);
    if (l == 0 && !(time_budget_delta > 0.0))
      throw parameter_error("TradeoffQuery: give l or a positive time budget exponent");
    if (l > 0 && (2 * u64(l) < k || l > n))
      throw parameter_error("TradeoffQuery: need k/2 <= l <= n");
    if (!(alpha > 0.0)) throw parameter_error("TradeoffQuery: alpha must be positive");
    if (!(eps > 0.0)) throw parameter_error("TradeoffQuery: eps must be positive");
    if (d < 0.0) throw parameter_error("TradeoffQuery: d must be nonnegative");
  }
};

/// One bound: always the log2 value; the raw value whenever it is finite in
/// a double.
struct BoundEntry {
  double log2_value = 0.0;
  std::optional<double> value;
};

inline BoundEntry make_bound(double log2_value) {
  BoundEntry e;
  e.log2_value = log2_value;
  if (std::isfinite(log2_value) && log2_value < 1023.0) e.value = std::exp2(log2_value);
  return e;
}

struct BoundTable {
  u32 l_used = 0;  // the l the bounds were evaluated at
  double rho = 0.0;
  double crossover_l_ln = 0.0;    // delta n / (ln q + ln n)
  double crossover_l_log2 = 0.0;  // delta n / (log2 q + log2 n)

  BoundEntry spectral_small_q;  // (l ln(qn) / rho^2) (alpha q n / l)^{k/2}
  BoundEntry spectral_large_q;  // (l ln(qn) / rho^2) (alpha n / l)^k
  BoundEntry cover_lwe_small_q;  // l ln(qn) (alpha q n / l)^{k/2}
  BoundEntry cover_lwe_large_q;  // l ln(qn) (alpha n / l)^k
  BoundEntry cover_lpn_small_q;  // n^{2d} l ln(qn) (alpha q n / l)^{k/2}
  BoundEntry cover_lpn_large_q;  // n^{2d} l ln(qn) (alpha n / l)^k
  BoundEntry time_spectral;      // C(n,l) q^l
  BoundEntry time_cover_sqrt;    // sqrt(C(n,l) q^l) (n/l)^k
  BoundEntry time_cover_eps;     // (C(n,l) q^l)^{1/2+eps} (n/l)^k
  BoundEntry dense_minor_samples;  // l^2 (n/l)^k / (e^k n l^{1/l})
};

/// Evaluates every closed-form bound at the query's l (or at the l the time
/// budget pins down). The time budget reading of the crossover rule is
/// base-2, matching the 2^{delta n} budget; the natural-log variant of the
/// same rule is reported alongside.
inline BoundTable calc_bounds(const TradeoffQuery& query) {
  query.validate();
  const double n = double(query.n);
  const double k = double(query.k);
  const double q = double(query.q);

  BoundTable table;
  u32 l_used = query.l;
  double delta = query.time_budget_delta;
  if (l_used == 0) {
    const double raw = delta * n / (std::log2(q) + std::log2(n));
    const u32 lo = std::max<u32>(1, (query.k + 1) / 2);
    l_used = static_cast<u32>(std::clamp(std::round(raw), double(lo), n));
  }
  const double l = double(l_used);
  const double log2_graph = log2_binomial(n, l) + l * std::log2(q);
  if (!(delta > 0.0)) delta = log2_graph / n;  // the budget the chosen l consumes
  table.l_used = l_used;
  table.crossover_l_ln = delta * n / (std::log(q) + std::log(n));
  table.crossover_l_log2 = delta * n / (std::log2(q) + std::log2(n));
  table.rho = rho_of(query.q, query.noise);

  constexpr double log2e = 1.4426950408889634;
  const double log2_prefix = std::log2(l * std::log(q * n));
  const double log2_small = log2_prefix + (k / 2.0) * std::log2(query.alpha * q * n / l);
  const double log2_large = log2_prefix + k * std::log2(query.alpha * n / l);
  const double log2_rho2 = table.rho > 0.0 ? 2.0 * std::log2(table.rho)
                                           : -std::numeric_limits<double>::infinity();
  const double log2_margin = 2.0 * query.d * std::log2(n);

  table.spectral_small_q = make_bound(log2_small - log2_rho2);
  table.spectral_large_q = make_bound(log2_large - log2_rho2);
  table.cover_lwe_small_q = make_bound(log2_small);
  table.cover_lwe_large_q = make_bound(log2_large);
  table.cover_lpn_small_q = make_bound(log2_margin + log2_small);
  table.cover_lpn_large_q = make_bound(log2_margin + log2_large);

  const double log2_ratio = k * std::log2(n / l);
  table.time_spectral = make_bound(log2_graph);
  table.time_cover_sqrt = make_bound(0.5 * log2_graph + log2_ratio);
  table.time_cover_eps = make_bound((0.5 + query.eps) * log2_graph + log2_ratio);

  table.dense_minor_samples = make_bound(2.0 * std::log2(l) + log2_ratio - k * log2e -
                                         std::log2(n) - std::log2(l) / l);
  return table;
}

}  // namespace sparselin

#pragma once

// Arithmetic over Z_q and the q-th roots of unity, noise samplers, and the
// noise bias rho = E[omega_q^e].
//
// Conventions:
//  - ZqElement is a residue in {0, ..., q-1}; the modulus q is carried by
//    context, not by the value.
//  - Phase represents omega_q^exponent, a point on the unit circle.
//  - All samplers draw from an explicitly passed Rng; no hidden state.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "common.hpp"

namespace sparselin {

using ZqElement = u32;

/// A q-th root of unity omega_q^exponent.
struct Phase {
  ZqElement exponent = 0;

  friend bool operator==(const Phase& a, const Phase& b) { return a.exponent == b.exponent; }
};

inline Phase conjugate(Phase p, u32 q) { return Phase{neg_mod(p.exponent, q)}; }

inline Phase phase_mul(Phase a, Phase b, u32 q) { return Phase{add_mod(a.exponent, b.exponent, q)}; }

/// p raised to an integer power s (exponent arithmetic mod q).
inline Phase phase_pow(Phase p, u64 s, u32 q) {
  return Phase{static_cast<ZqElement>(u64(p.exponent) * (s % q) % q)};
}

/// Realizes omega_q^s = exp(2*pi*i*s/q). Unit magnitude by construction;
/// phase_to_complex(conjugate(p, q), q) is the complex conjugate.
inline std::complex<double> phase_to_complex(Phase p, u32 q) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(p.exponent) / static_cast<double>(q);
  return {std::cos(angle), std::sin(angle)};
}

/// Precomputed table of all q roots of unity, indexed by exponent.
inline std::vector<std::complex<double>> phase_table(u32 q) {
  std::vector<std::complex<double>> table(q);
  for (u32 s = 0; s < q; ++s) table[s] = phase_to_complex(Phase{s}, q);
  return table;
}

// ===== Noise specification ===================================================

struct NoiseSpec {
  enum class Kind { gaussian, lpn, uniform, noiseless };

  Kind kind = Kind::noiseless;
  double r = 0.0;   // gaussian width, > 0
  double mu = 0.0;  // lpn flip probability, in [0, (q-1)/q]

  static NoiseSpec gaussian(double r) { return {Kind::gaussian, r, 0.0}; }
  static NoiseSpec lpn(double mu) { return {Kind::lpn, 0.0, mu}; }
  static NoiseSpec uniform() { return {Kind::uniform, 0.0, 0.0}; }
  static NoiseSpec noiseless() { return {Kind::noiseless, 0.0, 0.0}; }

  void validate(u32 q) const {
    if (q < 2) throw parameter_error("NoiseSpec: modulus must be at least 2");
    switch (kind) {
      case Kind::gaussian:
        if (!(r > 0.0)) throw parameter_error("NoiseSpec: gaussian width must be positive");
        break;
      case Kind::lpn:
        if (!(mu >= 0.0) || mu > double(q - 1) / double(q))
          throw parameter_error("NoiseSpec: lpn rate must lie in [0, (q-1)/q]");
        break;
      default:
        break;
    }
  }

  const char* name() const {
    switch (kind) {
      case Kind::gaussian: return "gaussian";
      case Kind::lpn: return "lpn";
      case Kind::uniform: return "uniform";
      default: return "noiseless";
    }
  }
};

// ===== Discrete Gaussian on Z_q =============================================
//
// The mass at residue j is proportional to sum over x = j (mod q) of
// exp(-pi x^2 / r^2). The integer series is truncated at
// |x| <= max(50, ceil(10 r)); the tail beyond ten widths carries a relative
// mass below 1e-130, so the truncated masses are exact at double precision.

inline int gaussian_truncation(double r) {
  return std::max(50, static_cast<int>(std::ceil(10.0 * r)));
}

/// Normalized residue masses of the width-r discrete Gaussian folded mod q.
inline std::vector<double> gaussian_zq_masses(u32 q, double r) {
  if (q < 2) throw parameter_error("gaussian_zq_masses: modulus must be at least 2");
  if (!(r > 0.0)) throw parameter_error("gaussian_zq_masses: width must be positive");
  const int bound = gaussian_truncation(r);
  std::vector<double> mass(q, 0.0);
  const double pi = std::numbers::pi;
  for (int x = -bound; x <= bound; ++x) {
    const double w = std::exp(-pi * double(x) * double(x) / (r * r));
    const u32 j = static_cast<u32>(((x % i64(q)) + i64(q)) % i64(q));
    mass[j] += w;
  }
  double total = 0.0;
  for (double w : mass) total += w;
  for (double& w : mass) w /= total;
  return mass;
}

/// Inverse-CDF sampler for the discrete Gaussian on Z_q. Builds the CDF once;
/// each draw costs one uniform and a short scan (q is small at the scales the
/// toolkit targets).
class GaussianZqSampler {
 public:
  GaussianZqSampler(u32 q, double r) : q_(q) {
    const auto mass = gaussian_zq_masses(q, r);
    cdf_.resize(q);
    double acc = 0.0;
    for (u32 j = 0; j < q; ++j) {
      acc += mass[j];
      cdf_[j] = acc;
    }
    cdf_[q - 1] = 1.0;  // absorb rounding so the last bucket is reachable
  }

  ZqElement operator()(Rng& rng) const {
    const double u = uniform_real01(rng);
    u32 lo = 0, hi = q_ - 1;
    while (lo < hi) {
      const u32 mid = (lo + hi) / 2;
      if (cdf_[mid] < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  u32 q_;
  std::vector<double> cdf_;
};

/// One draw from the discrete Gaussian on Z_q with width r.
inline ZqElement sample_gaussian_zq(u32 q, double r, Rng& rng) {
  return GaussianZqSampler(q, r)(rng);
}

/// One draw from the q-ary error distribution that returns 0 with
/// probability 1-mu and each nonzero residue with probability mu/(q-1).
inline ZqElement sample_lpn_noise(u32 q, double mu, Rng& rng) {
  if (q < 2) throw parameter_error("sample_lpn_noise: modulus must be at least 2");
  if (!(mu >= 0.0 && mu <= 1.0)) throw parameter_error("sample_lpn_noise: mu must lie in [0,1]");
  if (uniform_real01(rng) >= mu) return 0;
  return 1 + static_cast<ZqElement>(uniform_below(rng, q - 1));
}

/// One draw from the declared noise distribution.
inline ZqElement sample_noise(u32 q, const NoiseSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case NoiseSpec::Kind::gaussian: return sample_gaussian_zq(q, spec.r, rng);
    case NoiseSpec::Kind::lpn: return sample_lpn_noise(q, spec.mu, rng);
    case NoiseSpec::Kind::uniform: return static_cast<ZqElement>(uniform_below(rng, q));
    default: return 0;
  }
}

// ===== Noise bias rho ========================================================

/// rho for the width-r discrete Gaussian, by direct summation of
/// sum_x cos(2 pi x / q) exp(-pi x^2/r^2) / sum_x exp(-pi x^2/r^2).
inline double rho_gaussian_series(u32 q, double r) {
  if (q < 2) throw parameter_error("rho_gaussian: modulus must be at least 2");
  if (!(r > 0.0)) throw parameter_error("rho_gaussian: width must be positive");
  const int bound = std::max(60, gaussian_truncation(r));
  const double pi = std::numbers::pi;
  double num = 1.0, den = 1.0;  // x = 0 term
  for (int x = 1; x <= bound; ++x) {
    const double w = std::exp(-pi * double(x) * double(x) / (r * r));
    num += 2.0 * std::cos(2.0 * pi * double(x) / double(q)) * w;
    den += 2.0 * w;
  }
  return num / den;
}

/// rho for the width-r discrete Gaussian via the dual (Poisson-summed) series
///   sum_y exp(-pi r^2 (y - 1/q)^2) / sum_y exp(-pi r^2 y^2),
/// which converges in a handful of terms once r >= 1.
inline double rho_gaussian_poisson(u32 q, double r) {
  if (q < 2) throw parameter_error("rho_gaussian: modulus must be at least 2");
  if (!(r > 0.0)) throw parameter_error("rho_gaussian: width must be positive");
  const double pi = std::numbers::pi;
  const int bound = std::max(8, static_cast<int>(std::ceil(10.0 / r)) + 2);
  double num = 0.0, den = 0.0;
  for (int y = -bound; y <= bound; ++y) {
    const double dy = double(y) - 1.0 / double(q);
    num += std::exp(-pi * r * r * dy * dy);
    den += std::exp(-pi * r * r * double(y) * double(y));
  }
  return num / den;
}

/// Noise bias of the width-r discrete Gaussian on Z_q. Uses the dual series
/// when r >= 1 and the direct series otherwise; the two agree to double
/// precision on the overlap. Always at least exp(-pi r^2 / q^2).
inline double rho_gaussian(u32 q, double r) {
  return r >= 1.0 ? rho_gaussian_poisson(q, r) : rho_gaussian_series(q, r);
}

/// Noise bias 1 - q*mu/(q-1) of the q-ary error distribution.
inline double rho_lpn(u32 q, double mu) {
  if (q < 2) throw parameter_error("rho_lpn: modulus must be at least 2");
  if (!(mu >= 0.0) || mu > double(q - 1) / double(q))
    throw parameter_error("rho_lpn: mu must lie in [0, (q-1)/q]");
  return 1.0 - double(q) * mu / double(q - 1);
}

/// Noise bias of a declared noise distribution (1 for noiseless, 0 for
/// uniform).
inline double rho_of(u32 q, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseSpec::Kind::gaussian: return rho_gaussian(q, spec.r);
    case NoiseSpec::Kind::lpn: return rho_lpn(q, spec.mu);
    case NoiseSpec::Kind::uniform: return 0.0;
    default: return 1.0;
  }
}

}  // namespace sparselin

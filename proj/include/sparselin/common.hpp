#pragma once

// Shared plumbing: error taxonomy, deterministic randomness helpers, and
// checked combinatorial counts used across the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace sparselin {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// ===== Error taxonomy ========================================================
//
// parameter_error: a caller-supplied value violates a precondition (maps to
//   CLI exit code 2).
// modulus_error:   a composite modulus where a prime is required (exit 2).
// scale_error:     the requested computation exceeds a configured size cap
//   (maps to CLI exit code 3).
// empty_graph_error: an operation that needs at least one edge was given an
//   edgeless instance.
// io_error:        file I/O failure, annotated with the path.

struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct modulus_error : parameter_error {
  using parameter_error::parameter_error;
};

struct scale_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct empty_graph_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dead_end_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===== Deterministic randomness =============================================
//
// All randomness flows from explicitly passed Rng objects. Streams for
// parallel or per-trial work are derived from a master seed with splitmix64
// so that identical seeds reproduce identical outputs bit for bit. Bounded
// draws are implemented here (not with std distributions) so the byte stream
// does not depend on the standard library implementation.

class Rng {
 public:
  explicit Rng(u64 seed) : state_(seed) {
    // Warm up so that small seeds do not produce correlated first draws.
    for (int i = 0; i < 4; ++i) next();
  }

  u64 next() {
    // splitmix64 step: passes statistical test batteries and is trivially
    // reproducible across platforms.
    u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  u64 state_;
};

inline u64 splitmix64(u64 x) {
  u64 z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a stream id.
inline u64 derive_seed(u64 seed, u64 stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

inline Rng derive_rng(u64 seed, u64 stream) { return Rng(derive_seed(seed, stream)); }

/// Unbiased uniform draw from {0, ..., bound-1}; bound must be positive.
inline u64 uniform_below(Rng& rng, u64 bound) {
  if (bound == 0) throw parameter_error("uniform_below: bound must be positive");
  if ((bound & (bound - 1)) == 0) return rng.next() & (bound - 1);
  // Rejection from the largest multiple of bound below 2^64.
  const u64 limit = std::numeric_limits<u64>::max() - std::numeric_limits<u64>::max() % bound;
  u64 x;
  do {
    x = rng.next();
  } while (x >= limit);
  return x % bound;
}

/// Uniform double in [0,1) with 53 random mantissa bits.
inline double uniform_real01(Rng& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

// ===== Residue arithmetic ====================================================

inline u32 add_mod(u32 a, u32 b, u32 q) { return static_cast<u32>((u64(a) + b) % q); }
inline u32 sub_mod(u32 a, u32 b, u32 q) { return static_cast<u32>((u64(a) + q - b % q) % q); }
inline u32 mul_mod(u32 a, u32 b, u32 q) { return static_cast<u32>(u64(a) * b % q); }
inline u32 neg_mod(u32 a, u32 q) { return a == 0 ? 0 : q - a; }

/// Centered representative of a residue, in [-floor(q/2), floor(q/2)].
inline i64 centered(u32 v, u32 q) {
  i64 x = static_cast<i64>(v % q);
  if (x > i64(q) / 2) x -= q;
  return x;
}

/// Centered representative of an arbitrary signed value mod q.
inline i64 centered_mod(i64 v, u32 q) {
  i64 x = v % i64(q);
  if (x < 0) x += q;
  return centered(static_cast<u32>(x), q);
}

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (u64 d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

// ===== Checked combinatorial counts =========================================

/// a*b, or nullopt on u64 overflow.
inline std::optional<u64> checked_mul(u64 a, u64 b) {
  if (a != 0 && b > std::numeric_limits<u64>::max() / a) return std::nullopt;
  return a * b;
}

inline std::optional<u64> checked_add(u64 a, u64 b) {
  if (b > std::numeric_limits<u64>::max() - a) return std::nullopt;
  return a + b;
}

/// C(n,k) as an exact u64, or nullopt if it overflows.
inline std::optional<u64> binomial(u64 n, u64 k) {
  if (k > n) return u64{0};
  if (k > n - k) k = n - k;
  u64 result = 1;
  for (u64 i = 1; i <= k; ++i) {
    // result * (n-k+i) / i stays integral at every step.
    u64 num = n - k + i;
    u64 g = std::gcd(result, i);
    u64 r2 = result / g;
    u64 i2 = i / g;
    u64 g2 = std::gcd(num, i2);
    num /= g2;
    i2 /= g2;
    if (i2 != 1) return std::nullopt;  // cannot happen, defensive
    auto prod = checked_mul(r2, num);
    if (!prod) return std::nullopt;
    result = *prod;
  }
  return result;
}

/// base^exp as an exact u64, or nullopt on overflow.
inline std::optional<u64> checked_pow(u64 base, u32 exp) {
  u64 result = 1;
  for (u32 i = 0; i < exp; ++i) {
    auto prod = checked_mul(result, base);
    if (!prod) return std::nullopt;
    result = *prod;
  }
  return result;
}

/// log2 of C(n,k), accurate to ~1e-13 relative, valid for huge n.
inline double log2_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  constexpr double ln2 = 0.6931471805599453;
  return (std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)) / ln2;
}

}  // namespace sparselin

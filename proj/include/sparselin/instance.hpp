#pragma once

// Sparse linear instances over Z_q in two equivalent views: additive rows
// (A, beta) and products of roots of unity (scopes, phases). Covers planted
// generation (secret + noise) and uniformly random right-hand sides.

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ring.hpp"

namespace sparselin {

// ===== Domain types ==========================================================

/// A k-sparse coefficient vector: (index, coefficient) pairs with strictly
/// increasing 1-based indices. Coefficients may be zero; a stored zero
/// coefficient still claims its index as part of the scope.
struct Scope {
  std::vector<std::pair<u32, ZqElement>> pairs;

  friend bool operator==(const Scope& a, const Scope& b) { return a.pairs == b.pairs; }
  friend bool operator<(const Scope& a, const Scope& b) { return a.pairs < b.pairs; }
};

/// Coefficient of index j in a scope; 0 when the index is absent.
inline ZqElement coeff_of(const Scope& s, u32 j) {
  for (const auto& [idx, c] : s.pairs)
    if (idx == j) return c;
  return 0;
}

struct Constraint {
  Scope scope;
  Phase rhs;
};

/// Tunable constants shared by the attacks. Defaults target desk-scale runs;
/// every value can be overridden per experiment.
struct Tunables {
  double alpha = 1.0;      // constant inside the sample-bound formulas
  double delta = 0.0;      // random-side margin; 0 means rho/4
  double gamma = 0.0;      // planted-side margin; 0 means rho/4
  double eps = 0.5;        // exponent used by the cover-attack budgets
  double beta_walk = 0.5;  // degree fraction below which a vertex is bad
  double eps_walk = 0.5;   // goodness slack: a walk is (1/(1-eps), beta)-good
  double c_T = 3.0;        // walk length T = ceil(c_T * ln N) unless overridden
  u32 T_override = 0;      // walk length override; 0 means use c_T
  double C1 = 1.0;         // walk budget L = ceil(C1 * sqrt(N log N))
  u64 L_cap = 1'000'000;   // hard cap on walks per collision search
  u64 R_cap = 1'000'000;   // hard cap on collision-search rounds
  u64 S_cap = 1'000;       // hard cap on equipartition rounds
  double c_floor = 0.1;    // calibrated shattered-subset floor fraction
  double a_lwe = 4.0;      // threshold constant for the bounded-noise test
  double C_anti = 1.3;     // anti-concentration constant (strict mode only)
  u64 min_covers = 30;     // calibrated minimum cover count for the phase test
  u64 dense_cap = 2000;        // max N for dense reference paths
  u64 spectral_cap = 5'000'000;  // max N for the iterative attack
  u64 coo_cap = 4'000'000;       // max cached edge records before streaming
  u64 cover_budget = 100'000'000;  // candidate cap for exhaustive cover search
  u32 walk_retries = 10;   // collision-search retries per cover request
  u32 power_iters = 2000;  // power iteration cap per restart
  double power_tol = 1e-9;  // relative-change stopping tolerance
  u32 power_restarts = 3;  // independent restarts, max estimate wins
  bool strict_constants = false;  // raw asymptotic thresholds instead of calibrated
};

/// Verdict of a distinguishing attack. `fail` is reported only by the cover
/// attacks when their search loops exhaust without meeting preconditions.
enum class Verdict { planted, random, fail };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::planted: return "planted";
    case Verdict::random: return "random";
    default: return "fail";
  }
}

struct AttackParams {
  u32 n = 0, k = 0, q = 0;
  u32 m = 0;
  u32 l = 0;
  NoiseSpec noise;
  Tunables constants;
  u64 seed = 1;

  void validate() const {
    if (n == 0 || k == 0 || k > n) throw parameter_error("params: need 1 <= k <= n");
    if (q < 2) throw parameter_error("params: modulus must be at least 2");
    if (m == 0) throw parameter_error("params: need at least one constraint");
    if (l == 0 || 2 * l < k || l > n) throw parameter_error("params: need k/2 <= l <= n");
    noise.validate(q);
  }
};

struct GroundTruth {
  std::vector<ZqElement> secret;        // z in Z_q^n
  NoiseSpec noise_spec;                 // distribution the noise was drawn from
  std::vector<ZqElement> noise_values;  // e in Z_q^m
};

enum class Mode { planted, random };

struct LinInstance {
  AttackParams params;
  Mode mode = Mode::random;
  std::vector<Constraint> constraints;
  std::optional<GroundTruth> ground_truth;
};

inline const char* mode_name(Mode m) { return m == Mode::planted ? "planted" : "random"; }

// ===== Generation ============================================================

/// Number of distinct scopes: C(n,k) * q^k, or nullopt when it overflows u64
/// (treated as unbounded by the duplicate check).
inline std::optional<u64> scope_count_total(u32 n, u32 k, u32 q) {
  auto sets = binomial(n, k);
  if (!sets) return std::nullopt;
  auto coeffs = checked_pow(q, k);
  if (!coeffs) return std::nullopt;
  return checked_mul(*sets, *coeffs);
}

/// Uniformly random k-subset of {1..n}, each chosen index carrying an
/// independent uniform coefficient in Z_q (zero allowed).
inline Scope sample_coeff_vector(u32 n, u32 k, u32 q, Rng& rng) {
  if (k == 0 || k > n) throw parameter_error("sample_coeff_vector: need 1 <= k <= n");
  if (q < 2) throw parameter_error("sample_coeff_vector: modulus must be at least 2");
  // Floyd's subset sampling: uniform over C(n,k) subsets.
  std::set<u32> picked;
  for (u32 j = n - k + 1; j <= n; ++j) {
    u32 t = 1 + static_cast<u32>(uniform_below(rng, j));
    picked.insert(picked.count(t) ? j : t);
  }
  Scope s;
  s.pairs.reserve(k);
  for (u32 idx : picked) s.pairs.emplace_back(idx, static_cast<ZqElement>(uniform_below(rng, q)));
  return s;
}

/// Product of x_j^{a_j} over the scope, for an assignment given as a vector
/// of exponents: returns the phase with exponent sum a_j * z_j mod q.
inline Phase evaluate_scope(const std::vector<ZqElement>& z, const Scope& s, u32 q) {
  u64 acc = 0;
  for (const auto& [idx, c] : s.pairs) acc += u64(c) * z.at(idx - 1);
  return Phase{static_cast<ZqElement>(acc % q)};
}

/// Generates an instance. Planted mode samples a uniform secret z, k-sparse
/// scopes, noise per the declared spec, and sets each right-hand side to
/// <a_i, z> + e_i; ground truth is retained. Random mode draws uniform
/// right-hand sides and keeps no ground truth. Scopes are pairwise distinct
/// in both modes (collisions are resampled), so m may not exceed the number
/// of distinct scopes.
inline LinInstance generate(const AttackParams& params, Mode mode, Rng& rng) {
  params.validate();
  const u32 n = params.n, k = params.k, q = params.q, m = params.m;
  if (auto total = scope_count_total(n, k, q); total && *total < m)
    throw parameter_error("generate: m exceeds the number of distinct scopes");

  LinInstance inst;
  inst.params = params;
  inst.mode = mode;
  inst.constraints.reserve(m);

  std::optional<GaussianZqSampler> gaussian;
  if (mode == Mode::planted && params.noise.kind == NoiseSpec::Kind::gaussian)
    gaussian.emplace(q, params.noise.r);

  std::vector<ZqElement> z;
  if (mode == Mode::planted) {
    z.resize(n);
    for (auto& zi : z) zi = static_cast<ZqElement>(uniform_below(rng, q));
    inst.ground_truth = GroundTruth{z, params.noise, {}};
    inst.ground_truth->noise_values.reserve(m);
  }

  std::set<Scope> seen;
  for (u32 i = 0; i < m; ++i) {
    Scope s;
    do {
      s = sample_coeff_vector(n, k, q, rng);
    } while (!seen.insert(s).second);

    Phase rhs;
    if (mode == Mode::planted) {
      const ZqElement e = gaussian ? (*gaussian)(rng) : sample_noise(q, params.noise, rng);
      inst.ground_truth->noise_values.push_back(e);
      rhs = Phase{add_mod(evaluate_scope(z, s, q).exponent, e, q)};
    } else {
      rhs = Phase{static_cast<ZqElement>(uniform_below(rng, q))};
    }
    inst.constraints.push_back({std::move(s), rhs});
  }
  return inst;
}

// ===== Views =================================================================

/// The matrix form: sparse rows of A plus the right-hand-side vector beta.
struct AdditiveView {
  std::vector<Scope> rows;       // row i holds scope i's coefficients
  std::vector<ZqElement> beta;   // beta_i = rhs_i.exponent
};

inline AdditiveView additive_view(const LinInstance& inst) {
  AdditiveView v;
  v.rows.reserve(inst.constraints.size());
  v.beta.reserve(inst.constraints.size());
  for (const auto& c : inst.constraints) {
    v.rows.push_back(c.scope);
    v.beta.push_back(c.rhs.exponent);
  }
  return v;
}

/// Rebuilds the constraint list from the matrix form; inverse of
/// additive_view on the constraint list.
inline std::vector<Constraint> constraints_from_additive(const AdditiveView& v) {
  if (v.rows.size() != v.beta.size())
    throw parameter_error("constraints_from_additive: row/beta length mismatch");
  std::vector<Constraint> out;
  out.reserve(v.rows.size());
  for (size_t i = 0; i < v.rows.size(); ++i) out.push_back({v.rows[i], Phase{v.beta[i]}});
  return out;
}

// ===== Serialization =========================================================
//
// Line-oriented UTF-8 text:
//   header            n k q m mode
//   m constraint rows idx1:coeff1 idx2:coeff2 ... | beta
//   optional          secret: z1 ... zn
//   optional          noise: e1 ... em
// The optional lines appear for planted instances generated with ground
// truth retained. The walk length l and the noise specification are attack
// parameters, not instance data, and are supplied at attack time.

inline void write_instance(const LinInstance& inst, std::ostream& os, bool keep_ground_truth = true) {
  const auto& p = inst.params;
  os << p.n << ' ' << p.k << ' ' << p.q << ' ' << inst.constraints.size() << ' '
     << mode_name(inst.mode) << '\n';
  for (const auto& c : inst.constraints) {
    bool first = true;
    for (const auto& [idx, coeff] : c.scope.pairs) {
      if (!first) os << ' ';
      os << idx << ':' << coeff;
      first = false;
    }
    os << " | " << c.rhs.exponent << '\n';
  }
  if (inst.ground_truth && keep_ground_truth) {
    os << "secret:";
    for (ZqElement zi : inst.ground_truth->secret) os << ' ' << zi;
    os << '\n';
    os << "noise:";
    for (ZqElement e : inst.ground_truth->noise_values) os << ' ' << e;
    os << '\n';
  }
}

inline void write_instance_file(const LinInstance& inst, const std::string& path,
                                bool keep_ground_truth = true) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  write_instance(inst, os, keep_ground_truth);
  if (!os) throw io_error("write failed: " + path);
}

inline LinInstance read_instance(std::istream& is) {
  LinInstance inst;
  std::string mode_word;
  u64 m = 0;
  if (!(is >> inst.params.n >> inst.params.k >> inst.params.q >> m >> mode_word))
    throw io_error("instance parse error: bad header line");
  if (mode_word != "planted" && mode_word != "random")
    throw io_error("instance parse error: mode must be planted or random");
  inst.mode = mode_word == "planted" ? Mode::planted : Mode::random;
  const u32 q = inst.params.q;
  if (q < 2) throw io_error("instance parse error: modulus must be at least 2");
  inst.params.m = static_cast<u32>(m);
  std::string line;
  std::getline(is, line);  // consume the rest of the header line

  inst.constraints.reserve(m);
  for (u64 i = 0; i < m; ++i) {
    if (!std::getline(is, line)) throw io_error("instance parse error: missing constraint row");
    const auto bar = line.find('|');
    if (bar == std::string::npos) throw io_error("instance parse error: constraint row lacks '|'");
    Constraint c;
    std::istringstream lhs(line.substr(0, bar));
    std::string tok;
    while (lhs >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw io_error("instance parse error: bad index:coeff token");
      const u32 idx = static_cast<u32>(std::stoul(tok.substr(0, colon)));
      const u32 coeff = static_cast<u32>(std::stoul(tok.substr(colon + 1)));
      if (idx == 0 || idx > inst.params.n || coeff >= q)
        throw io_error("instance parse error: index or coefficient out of range");
      if (!c.scope.pairs.empty() && c.scope.pairs.back().first >= idx)
        throw io_error("instance parse error: scope indices must be strictly increasing");
      c.scope.pairs.emplace_back(idx, coeff);
    }
    if (c.scope.pairs.size() != inst.params.k)
      throw io_error("instance parse error: scope size differs from k");
    std::istringstream rhs(line.substr(bar + 1));
    u32 beta;
    if (!(rhs >> beta) || beta >= q) throw io_error("instance parse error: bad right-hand side");
    c.rhs = Phase{beta};
    inst.constraints.push_back(std::move(c));
  }

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "secret:") {
      GroundTruth gt = inst.ground_truth.value_or(GroundTruth{});
      gt.secret.clear();
      u32 v;
      while (ls >> v) {
        if (v >= q) throw io_error("instance parse error: secret entry out of range");
        gt.secret.push_back(v);
      }
      if (gt.secret.size() != inst.params.n)
        throw io_error("instance parse error: secret length differs from n");
      inst.ground_truth = std::move(gt);
    } else if (tag == "noise:") {
      GroundTruth gt = inst.ground_truth.value_or(GroundTruth{});
      gt.noise_values.clear();
      u32 v;
      while (ls >> v) {
        if (v >= q) throw io_error("instance parse error: noise entry out of range");
        gt.noise_values.push_back(v);
      }
      if (gt.noise_values.size() != inst.constraints.size())
        throw io_error("instance parse error: noise length differs from m");
      inst.ground_truth = std::move(gt);
    } else {
      throw io_error("instance parse error: unknown trailing line");
    }
  }
  if (mode_word == "planted" && inst.ground_truth) {
    // Ground truth sanity: every row must satisfy rhs = <a, z> + e.
    const auto& gt = *inst.ground_truth;
    if (!gt.secret.empty() && !gt.noise_values.empty()) {
      for (size_t i = 0; i < inst.constraints.size(); ++i) {
        const auto& c = inst.constraints[i];
        const ZqElement expect = add_mod(evaluate_scope(gt.secret, c.scope, q).exponent,
                                         gt.noise_values[i], q);
        if (expect != c.rhs.exponent)
          throw io_error("instance parse error: ground truth does not match row " + std::to_string(i));
      }
    }
  }
  return inst;
}

inline LinInstance read_instance_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open for reading: " + path);
  return read_instance(is);
}

}  // namespace sparselin

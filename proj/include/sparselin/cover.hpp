#pragma once

// The q-ary cover attack: random walks on the lifted constraint graph,
// collision search for closed walks built from two good walks meeting at the
// same endpoint, extraction of sparse covers (vectors c with c^T A = 0 mod q)
// from closed walks, and the two distinguishing tests. Over a prime modulus
// a cover turns noisy right-hand sides into a short noise combination c^T e;
// bounded noise keeps |c^T e| small (the LWE test) and sparse flip noise
// biases a product statistic (the LPN test).

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "kikuchi.hpp"

namespace sparselin {

// ===== Walk length ===========================================================

/// Default half-walk length: the override when set, else ceil(c_T * ln N).
inline u32 walk_length(const AttackParams& params) {
  if (params.constants.T_override > 0) return params.constants.T_override;
  const double log_n = log2_binomial(params.n, params.l) * 0.6931471805599453 +
                       double(params.l) * std::log(double(params.q));
  return static_cast<u32>(std::max(1.0, std::ceil(params.constants.c_T * log_n)));
}

// ===== Walks =================================================================

struct Walk {
  std::vector<KikuchiVertex> vertices;  // w_0 ... w_T
  std::vector<KikuchiEdge> edges;       // edge t connects vertices[t] -> vertices[t+1]
  std::vector<u64> tail_degrees;        // out-degree of each step's tail, when recorded

  u32 length() const { return static_cast<u32>(edges.size()); }
  bool closed() const {
    return !vertices.empty() && vertices.front() == vertices.back();
  }
};

/// T uniform out-steps from w0. Returns nothing if a dead end interrupts the
/// walk; the caller decides whether to redraw.
inline std::optional<Walk> sample_walk(const KikuchiVertex& w0, u32 T, const GraphView& view,
                                       Rng& rng) {
  Walk w;
  w.vertices.reserve(T + 1);
  w.edges.reserve(T);
  w.tail_degrees.reserve(T);
  w.vertices.push_back(w0);
  for (u32 t = 0; t < T; ++t) {
    u64 degree = 0;
    try {
      KikuchiEdge e = uniform_out_step(w.vertices.back(), view, rng, &degree);
      w.tail_degrees.push_back(degree);
      w.vertices.push_back(e.head);
      w.edges.push_back(std::move(e));
    } catch (const dead_end_error&) {
      return std::nullopt;
    }
  }
  return w;
}

inline std::optional<Walk> sample_walk(const KikuchiVertex& w0, u32 T, const LinInstance& inst,
                                       Rng& rng) {
  GraphView view(inst);
  return sample_walk(w0, T, view, rng);
}

/// A walk is (gamma, beta)-good when fewer than gamma*beta*T of its step
/// tails have out-degree below beta times the average degree. Degrees are
/// recomputed from the instance, not read from the walk record.
inline bool is_good_walk(const Walk& w, double beta, double gamma, const GraphView& view) {
  if (!(beta > 0.0 && beta <= 1.0)) throw parameter_error("is_good_walk: need beta in (0,1]");
  if (!(gamma >= 1.0)) throw parameter_error("is_good_walk: need gamma >= 1");
  const double cutoff = beta * view.delta();
  u64 bad = 0;
  for (u32 t = 0; t < w.length(); ++t)
    if (double(view.out_degree(w.vertices[t])) < cutoff) ++bad;
  return double(bad) < gamma * beta * double(w.length());
}

inline bool is_good_walk(const Walk& w, double beta, double gamma, const LinInstance& inst) {
  GraphView view(inst);
  return is_good_walk(w, beta, gamma, view);
}

/// w_first followed by w_second reversed: the reverse half traverses twin
/// edges, so labels conjugate. Both walks must share their start vertex and
/// their final vertex; the result is closed. Tail degrees are not carried
/// over (the composition is not a sampled walk).
inline Walk compose_closed_walk(const Walk& w_first, const Walk& w_second, u32 q) {
  if (w_first.vertices.empty() || w_second.vertices.empty() ||
      !(w_first.vertices.front() == w_second.vertices.front()) ||
      !(w_first.vertices.back() == w_second.vertices.back()))
    throw parameter_error("compose_closed_walk: walks must share start and end");
  Walk out;
  out.vertices = w_first.vertices;
  out.edges = w_first.edges;
  for (u32 t = w_second.length(); t-- > 0;) {
    out.edges.push_back(twin(w_second.edges[t], q));
    out.vertices.push_back(w_second.vertices[t]);
  }
  return out;
}

// ===== Collision search (two good walks meeting at one endpoint) ============

struct WalkSearchStats {
  u64 walks_drawn = 0;  // completed walks (aborted draws not included)
  u64 aborts = 0;       // dead-end abandonments
};

/// Draws up to L = min(cap, ceil(C1*sqrt(N*ln N))) walks of length T from one
/// degree-proportionally sampled start vertex, stopping at the first pair of
/// distinct good walks that share a final vertex and returning their closed
/// composition. Returns nothing when the budget runs out; the caller retries
/// with a fresh invocation (and therefore a fresh start vertex).
inline std::optional<Walk> find_good_closed_walk(const GraphView& view, u32 T, double beta,
                                                 double eps, Rng& rng,
                                                 WalkSearchStats* stats = nullptr) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw parameter_error("find_good_closed_walk: need eps in [0,1)");
  const double gamma = 1.0 / (1.0 - eps);
  const Tunables& c = view.instance().params.constants;
  const double log_n = view.log_vertex_count();
  const double n_real = std::exp(log_n);
  double l_real = std::ceil(c.C1 * std::sqrt(std::max(1.0, n_real * std::max(log_n, 1.0))));
  const u64 L = l_real >= double(c.L_cap) ? c.L_cap : std::max<u64>(1, u64(l_real));
  const u64 abort_budget = checked_mul(u64(c.walk_retries), L).value_or(~0ULL);

  const KikuchiVertex w0 = sample_vertex_nu(view.instance(), rng);
  std::map<KikuchiVertex, std::vector<Walk>> by_endpoint;
  WalkSearchStats local;
  for (u64 i = 0; i < L; ++i) {
    std::optional<Walk> w;
    while (!(w = sample_walk(w0, T, view, rng))) {
      ++local.aborts;
      if (local.aborts > abort_budget) {
        if (stats) *stats = local;
        return std::nullopt;
      }
    }
    ++local.walks_drawn;
    if (!is_good_walk(*w, beta, gamma, view)) continue;
    auto& bucket = by_endpoint[w->vertices.back()];
    for (const Walk& other : bucket) {
      if (other.edges == w->edges) continue;  // identical walks compose to a trivial loop
      if (stats) *stats = local;
      return compose_closed_walk(*w, other, view.q());
    }
    bucket.push_back(std::move(*w));
  }
  if (stats) *stats = local;
  return std::nullopt;
}

inline std::optional<Walk> find_good_closed_walk(const LinInstance& inst, u32 T, double beta,
                                                 double eps, Rng& rng,
                                                 WalkSearchStats* stats = nullptr) {
  GraphView view(inst);
  return find_good_closed_walk(view, T, beta, eps, rng, stats);
}

// ===== Covers ================================================================

/// Sparse vector over the constraints with entries in Z_q \ {0}, sorted by
/// constraint id. A cover satisfies c^T A = 0 mod q, so c^T beta depends on
/// the noise alone.
struct QaryCover {
  std::vector<std::pair<u32, ZqElement>> counts;

  friend bool operator==(const QaryCover& a, const QaryCover& b) { return a.counts == b.counts; }
  friend bool operator<(const QaryCover& a, const QaryCover& b) { return a.counts < b.counts; }
};

/// Support size (number of distinct constraints involved).
inline u64 support_size(const QaryCover& c) { return c.counts.size(); }

/// l1 weight of the centered representative of c.
inline u64 l1_weight(const QaryCover& c, u32 q) {
  u64 w = 0;
  for (const auto& [i, v] : c.counts) w += static_cast<u64>(std::abs(centered(v, q)));
  return w;
}

/// Per-color tally of a closed walk: +1 for forward steps, +(q-1) for
/// reverse steps, reduced mod q, zeros dropped.
inline QaryCover extract_cover(const Walk& w, u32 q) {
  if (!w.closed()) throw parameter_error("extract_cover: walk is not closed");
  std::map<u32, u64> tally;
  for (const auto& e : w.edges) tally[e.color] += e.forward ? 1 : q - 1;
  QaryCover c;
  for (const auto& [color, count] : tally) {
    const auto v = static_cast<ZqElement>(count % q);
    if (v != 0) c.counts.emplace_back(color, v);
  }
  return c;
}

/// Colors that occur exactly once across the walk's edges. Any such color
/// keeps coefficient 1 or q-1 in the extracted cover, witnessing
/// nontriviality.
inline std::set<u32> singleton_colors(const Walk& w) {
  std::map<u32, u32> freq;
  for (const auto& e : w.edges) ++freq[e.color];
  std::set<u32> singles;
  for (const auto& [color, f] : freq)
    if (f == 1) singles.insert(color);
  return singles;
}

/// Checks c^T A = 0 mod q coordinate by coordinate.
inline bool cover_is_valid(const QaryCover& c, const LinInstance& inst) {
  const u32 q = inst.params.q;
  std::map<u32, u64> acc;
  for (const auto& [i, v] : c.counts) {
    if (i >= inst.constraints.size()) return false;
    for (const auto& [idx, a] : inst.constraints[i].scope.pairs)
      acc[idx] = (acc[idx] + u64(v) * a) % q;
  }
  for (const auto& [idx, total] : acc)
    if (total % q != 0) return false;
  return true;
}

// ===== Distinct nontrivial covers (repeated collision search) ===============

struct CoverSearchResult {
  std::vector<QaryCover> covers;
  u64 rounds = 0;          // collision searches attempted
  u64 walks = 0;           // total completed walks
  u64 aborts = 0;          // total dead-end abandonments
  u64 search_failures = 0; // collision searches that exhausted their budget
};

/// Runs up to R = min(cap, ceil(100*N^eps)) collision searches with the
/// fixed constants beta = eps' = 0.5, keeping each closed walk whose
/// singleton color set is nonempty and not contained in any previously kept
/// walk's color set. Extracted covers are validated, deduplicated, and each
/// has l1 weight at most 2T. Requires the average degree to exceed T.
inline CoverSearchResult find_distinct_nontrivial_covers(const GraphView& view, u32 T, double eps,
                                                         Rng& rng, u64 max_covers = 0) {
  if (T == 0) throw parameter_error("find_distinct_nontrivial_covers: need T >= 1");
  if (!(eps > 0.0)) throw parameter_error("find_distinct_nontrivial_covers: need eps > 0");
  if (view.delta() <= double(T))
    throw parameter_error(
        "find_distinct_nontrivial_covers: average degree must exceed the walk length "
        "(too few constraints for this walk length)");
  const Tunables& c = view.instance().params.constants;
  const double r_real = std::ceil(100.0 * std::exp(eps * view.log_vertex_count()));
  const u64 R = r_real >= double(c.R_cap) ? c.R_cap : std::max<u64>(1, u64(r_real));

  CoverSearchResult out;
  std::vector<std::set<u32>> kept_color_sets;
  std::set<QaryCover> seen;
  for (u64 r = 0; r < R; ++r) {
    ++out.rounds;
    WalkSearchStats stats;
    auto walk = find_good_closed_walk(view, T, 0.5, 0.5, rng, &stats);
    out.walks += stats.walks_drawn;
    out.aborts += stats.aborts;
    if (!walk) {
      ++out.search_failures;
      continue;
    }
    const std::set<u32> singles = singleton_colors(*walk);
    if (singles.empty()) continue;
    std::set<u32> colors;
    for (const auto& e : walk->edges) colors.insert(e.color);
    bool contained = false;
    for (const auto& prev : kept_color_sets) {
      if (std::includes(prev.begin(), prev.end(), singles.begin(), singles.end())) {
        contained = true;
        break;
      }
    }
    if (contained) continue;
    kept_color_sets.push_back(colors);

    QaryCover cover = extract_cover(*walk, view.q());
    if (!cover_is_valid(cover, view.instance()))
      throw std::logic_error("find_distinct_nontrivial_covers: extracted cover is invalid");
    if (cover.counts.empty() || l1_weight(cover, view.q()) > 2 * u64(T))
      throw std::logic_error("find_distinct_nontrivial_covers: cover violates the weight bound");
    if (seen.insert(cover).second) {
      out.covers.push_back(std::move(cover));
      if (max_covers > 0 && out.covers.size() >= max_covers) break;
    }
  }
  return out;
}

inline CoverSearchResult find_distinct_nontrivial_covers(const LinInstance& inst, u32 T,
                                                         double eps, Rng& rng,
                                                         u64 max_covers = 0) {
  GraphView view(inst);
  return find_distinct_nontrivial_covers(view, T, eps, rng, max_covers);
}

// ===== Equipartitions and shattering =========================================

struct Equipartition {
  std::vector<u32> block_of;  // constraint id -> block id
  u32 blocks = 0;
};

/// Random partition of [m] into `blocks` blocks with sizes differing by at
/// most one: shuffle, then deal round-robin.
inline Equipartition sample_equipartition(u64 m, u32 blocks, Rng& rng) {
  if (blocks == 0) throw parameter_error("sample_equipartition: need at least one block");
  std::vector<u32> order(m);
  for (u64 i = 0; i < m; ++i) order[i] = static_cast<u32>(i);
  for (u64 i = m; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  Equipartition pi;
  pi.blocks = blocks;
  pi.block_of.assign(m, 0);
  for (u64 p = 0; p < m; ++p) pi.block_of[order[p]] = static_cast<u32>(p % blocks);
  return pi;
}

/// True iff no block contains two support elements of the cover.
inline bool shatter_check(const QaryCover& c, const Equipartition& pi) {
  std::set<u32> used;
  for (const auto& [i, v] : c.counts) {
    if (i >= pi.block_of.size()) throw parameter_error("shatter_check: cover index out of range");
    if (!used.insert(pi.block_of[i]).second) return false;
  }
  return true;
}

// ===== Distinguishers ========================================================

struct CoverReport {
  u64 covers_found = 0;    // covers supplied / usable
  double statistic = 0.0;  // |c^T beta| (bounded-noise test) or |Psi| (phase test)
  double threshold = 0.0;
  Verdict verdict = Verdict::random;
  double cover_weight = 0.0;  // l1 weight of the decisive cover (bounded-noise test)
  double psi_real = 0.0;      // complex phase statistic, real part
  double psi_imag = 0.0;      //   and imaginary part
  u64 shattered = 0;          // size of the shattered sub-collection
  u64 rounds = 0;             // equipartition rounds consumed
};

/// Bounded-noise test: over a prime modulus, lift everything to centered
/// representatives; a cover makes c^T beta = c^T e, whose magnitude stays
/// below a*B*sqrt(w)*w for noise of width B while a random instance leaves
/// it uniform. The cover minimizing statistic/threshold decides.
inline CoverReport lwe_cover_distinguish(const LinInstance& inst,
                                         const std::vector<QaryCover>& covers, double B,
                                         double a) {
  const u32 q = inst.params.q;
  if (!is_prime(q)) throw modulus_error("lwe_cover_distinguish: modulus must be prime");
  if (covers.empty()) throw parameter_error("lwe_cover_distinguish: no covers supplied");
  if (!(B > 0.0) || !(a > 0.0))
    throw parameter_error("lwe_cover_distinguish: need positive noise bound and constant");

  CoverReport report;
  report.covers_found = covers.size();
  double best_ratio = std::numeric_limits<double>::infinity();
  for (const QaryCover& c : covers) {
    i64 dot = 0;
    for (const auto& [i, v] : c.counts) {
      if (i >= inst.constraints.size())
        throw parameter_error("lwe_cover_distinguish: cover index out of range");
      dot += centered(v, q) * centered(inst.constraints[i].rhs.exponent, q);
    }
    const double stat = double(std::abs(centered_mod(dot, q)));
    const double w = double(l1_weight(c, q));
    const double thr = a * B * std::sqrt(w) * w;
    const double ratio = thr > 0.0 ? stat / thr : std::numeric_limits<double>::infinity();
    if (ratio < best_ratio) {
      best_ratio = ratio;
      report.statistic = stat;
      report.threshold = thr;
      report.cover_weight = w;
    }
  }
  report.verdict = report.statistic <= report.threshold ? Verdict::planted : Verdict::random;
  return report;
}

/// Phase test for sparse flip noise (Algorithm 3): find an equipartition of
/// the constraints into 2T blocks that shatters enough covers, then compare
/// |Psi| = |sum over shattered covers of prod_{i in supp} zeta_i
/// omega^{beta_i c_i}| against a threshold. Planted instances bias each
/// cover's phase toward +1 (expectation (rho/2)^{|supp|} per cover), random
/// ones leave Psi centered at zero.
inline CoverReport lpn_cover_distinguish(const LinInstance& inst,
                                         const std::vector<QaryCover>& covers, u32 T, double eps,
                                         Rng& rng) {
  const u32 q = inst.params.q;
  if (!is_prime(q)) throw modulus_error("lpn_cover_distinguish: modulus must be prime");
  if (T == 0) throw parameter_error("lpn_cover_distinguish: need T >= 1");
  if (!(eps > 0.0)) throw parameter_error("lpn_cover_distinguish: need eps > 0");
  const Tunables& c = inst.params.constants;
  if (covers.size() < c.min_covers)
    throw parameter_error("lpn_cover_distinguish: not enough covers for the phase test");

  const double log_n = log2_binomial(inst.params.n, inst.params.l) * 0.6931471805599453 +
                       double(inst.params.l) * std::log(double(inst.params.q));
  const double n_eps = std::exp(eps * log_n);
  u64 floor_count;
  if (c.strict_constants) {
    floor_count = std::max<u64>(1, u64(std::ceil(n_eps * std::pow(0.1, double(T)))));
  } else {
    floor_count = std::max<u64>(1, u64(std::ceil(c.c_floor * double(covers.size()))));
  }

  const double s_real = std::ceil(10.0 * std::exp(4.0 * double(T)));
  const u64 S = s_real >= double(c.S_cap) ? c.S_cap : std::max<u64>(1, u64(s_real));

  CoverReport report;
  report.covers_found = covers.size();
  std::vector<const QaryCover*> shattered;
  bool found = false;
  for (u64 s = 0; s < S; ++s) {
    ++report.rounds;
    Equipartition pi = sample_equipartition(inst.constraints.size(), 2 * T, rng);
    shattered.clear();
    for (const QaryCover& cv : covers)
      if (shatter_check(cv, pi)) shattered.push_back(&cv);
    if (shattered.size() >= floor_count) {
      shattered.resize(floor_count);
      found = true;
      break;
    }
  }
  if (!found) {
    report.verdict = Verdict::fail;
    return report;
  }
  report.shattered = shattered.size();

  // Independent uniform weights, drawn for every constraint in index order
  // so the byte stream is independent of which covers shattered.
  std::vector<double> zeta(inst.constraints.size());
  for (auto& z : zeta) z = uniform_real01(rng);

  std::complex<double> psi{0.0, 0.0};
  for (const QaryCover* cv : shattered) {
    double weight = 1.0;
    u64 phase_exp = 0;
    for (const auto& [i, v] : cv->counts) {
      weight *= zeta[i];
      phase_exp = (phase_exp + u64(inst.constraints[i].rhs.exponent) * v) % q;
    }
    psi += weight * phase_to_complex(Phase{static_cast<ZqElement>(phase_exp)}, q);
  }
  report.psi_real = psi.real();
  report.psi_imag = psi.imag();
  report.statistic = std::abs(psi);

  if (c.strict_constants) {
    report.threshold = std::pow(std::exp(log_n), 0.6 * eps);
  } else {
    const double rho = rho_of(q, inst.params.noise);
    double expected = 0.0;
    for (const QaryCover* cv : shattered)
      expected += std::pow(rho / 2.0, double(support_size(*cv)));
    report.threshold = 0.5 * expected;
  }
  report.verdict = report.statistic >= report.threshold ? Verdict::planted : Verdict::random;
  return report;
}

}  // namespace sparselin

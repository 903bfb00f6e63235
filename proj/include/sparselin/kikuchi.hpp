#pragma once

// The lifted constraint graph K_l(I): vertices are l-subsets of {1..n} whose
// indices carry exponent residues in {0..q-1}; each k-sparse constraint
// contributes edges between vertices whose coefficient difference matches the
// constraint's scope. A residue of 0 is a stored value, distinct from an
// absent index, so the vertex count is N = C(n,l) * q^l.
//
// Edges come in twin pairs: a forward edge tail -> head labeled with the
// constraint's right-hand side, plus the reverse edge head -> tail carrying
// the conjugated label. The adjacency operator is therefore Hermitian. The
// graph is never materialized globally on the attack paths; edges are
// enumerated per vertex on demand.

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "instance.hpp"

namespace sparselin {

// ===== Vertices and edges ====================================================

/// An l-subset of {1..n} with an exponent residue per index, sorted by index.
struct KikuchiVertex {
  std::vector<std::pair<u32, ZqElement>> pairs;

  friend bool operator==(const KikuchiVertex& a, const KikuchiVertex& b) { return a.pairs == b.pairs; }
  friend bool operator!=(const KikuchiVertex& a, const KikuchiVertex& b) { return !(a == b); }
  friend bool operator<(const KikuchiVertex& a, const KikuchiVertex& b) { return a.pairs < b.pairs; }
};

/// Exponent of index j in a vertex; 0 when absent (callers that care about
/// presence must check membership separately).
inline ZqElement coeff_of(const KikuchiVertex& t, u32 j) {
  for (const auto& [idx, e] : t.pairs)
    if (idx == j) return e;
  return 0;
}

inline bool contains_index(const KikuchiVertex& t, u32 j) {
  for (const auto& [idx, e] : t.pairs)
    if (idx == j) return true;
  return false;
}

struct KikuchiEdge {
  KikuchiVertex tail;
  KikuchiVertex head;
  Phase label;       // rhs for forward edges, conjugate(rhs) for reverse ones
  u32 color = 0;     // generating constraint id, 0-based
  bool forward = true;

  friend bool operator==(const KikuchiEdge& a, const KikuchiEdge& b) {
    return a.tail == b.tail && a.head == b.head && a.label == b.label && a.color == b.color &&
           a.forward == b.forward;
  }
};

/// The twin of an edge: orientation flipped, label conjugated, same color.
inline KikuchiEdge twin(const KikuchiEdge& e, u32 q) {
  return {e.head, e.tail, conjugate(e.label, q), e.color, !e.forward};
}

// ===== Exact edge count per constraint ======================================

/// Number of directed edges (both orientations) one k-sparse constraint
/// contributes:
///   2 * sum_r C(k,r) q^r C(k-r,(k-r)/2) C(n-k, l-(k+r)/2) q^{l-(k+r)/2},
/// where any binomial with a fractional, negative, or oversized lower index
/// is zero. Identical for every scope of the same size. Throws scale_error
/// on u64 overflow.
inline u64 theta(u32 n, u32 l, u32 k, u32 q) {
  if (k == 0 || k > n) throw parameter_error("theta: need 1 <= k <= n");
  if (2 * l < k || l > n) throw parameter_error("theta: need k/2 <= l <= n");
  if (q < 2) throw parameter_error("theta: modulus must be at least 2");
  unsigned __int128 sum = 0;
  for (u32 r = 0; r <= k; ++r) {
    if ((k - r) % 2 != 0) continue;
    const u32 half = (k - r) / 2;
    if (l < (k + r) / 2 + ((k + r) % 2)) continue;  // l - (k+r)/2 < 0 (k+r is even here)
    const u32 outside = l - (k + r) / 2;
    if (outside > n - k) continue;
    auto c1 = binomial(k, r);
    auto c2 = binomial(k - r, half);
    auto c3 = binomial(n - k, outside);
    auto p1 = checked_pow(q, r);
    auto p2 = checked_pow(q, outside);
    if (!c1 || !c2 || !c3 || !p1 || !p2) throw scale_error("theta: term overflows");
    unsigned __int128 term = static_cast<unsigned __int128>(*c1) * *p1;
    term *= *c2;
    term *= *c3;
    term *= *p2;
    sum += term;
  }
  sum *= 2;
  if (sum > std::numeric_limits<u64>::max()) throw scale_error("theta: count overflows");
  return static_cast<u64>(sum);
}

/// Vertex count N = C(n,l) * q^l, or nullopt when it overflows u64.
inline std::optional<u64> vertex_count(u32 n, u32 l, u32 q) {
  auto sets = binomial(n, l);
  if (!sets) return std::nullopt;
  auto exps = checked_pow(q, l);
  if (!exps) return std::nullopt;
  return checked_mul(*sets, *exps);
}

// ===== Coefficient difference between vertices ==============================

/// The map j -> coeff_head(j) - coeff_tail(j) mod q over the union of the
/// two supports, sorted by index and including explicit zeros. For every
/// edge, this map agrees with the generating scope's coefficients on the
/// support union.
inline std::vector<std::pair<u32, ZqElement>> scope_between(const KikuchiVertex& tail,
                                                            const KikuchiVertex& head, u32 q) {
  std::vector<std::pair<u32, ZqElement>> diff;
  size_t a = 0, b = 0;
  while (a < tail.pairs.size() || b < head.pairs.size()) {
    if (b == head.pairs.size() || (a < tail.pairs.size() && tail.pairs[a].first < head.pairs[b].first)) {
      diff.emplace_back(tail.pairs[a].first, neg_mod(tail.pairs[a].second, q));
      ++a;
    } else if (a == tail.pairs.size() || head.pairs[b].first < tail.pairs[a].first) {
      diff.emplace_back(head.pairs[b].first, head.pairs[b].second % q);
      ++b;
    } else {
      diff.emplace_back(tail.pairs[a].first, sub_mod(head.pairs[b].second, tail.pairs[a].second, q));
      ++a;
      ++b;
    }
  }
  return diff;
}

// ===== Per-vertex edge enumeration ==========================================

namespace detail {

// Enumerates the heads reachable from `tail` along one orientation of a
// scope. For each scope index exactly one of three membership cases holds:
//   drop: the index sits in the tail with exponent -a and is absent from the
//         head;
//   add:  the index is absent from the tail and joins the head with
//         exponent a;
//   keep: the index sits in the tail with any exponent e and stays in the
//         head with exponent e + a.
// Indices absent from the tail can only "add", so the number of dropped
// indices is forced to match them; the enumeration runs over the drop-subset
// choices. Outside the scope, head and tail are identical. Heads are
// pairwise distinct for a fixed tail and orientation (drop leaves the index
// absent while keep-with-exponent-0 leaves it present).
template <class Fn>
void for_each_head(const KikuchiVertex& tail,
                   const std::vector<std::pair<u32, ZqElement>>& scope_pairs, u32 q, Fn&& fn) {
  const u32 k = static_cast<u32>(scope_pairs.size());
  u32 absent = 0;
  // Scope indices present in the tail, with eligibility to be dropped.
  struct InTail {
    u32 idx;
    ZqElement coeff;     // scope coefficient a
    ZqElement exponent;  // tail exponent e
    bool droppable;      // e == -a
  };
  std::vector<InTail> present;
  present.reserve(k);
  std::vector<std::pair<u32, ZqElement>> added;  // forced adds (index, a)
  added.reserve(k);
  for (const auto& [idx, a] : scope_pairs) {
    bool found = false;
    for (const auto& [tidx, e] : tail.pairs) {
      if (tidx == idx) {
        present.push_back({idx, a, e, e == neg_mod(a, q)});
        found = true;
        break;
      }
    }
    if (!found) {
      added.emplace_back(idx, a);
      ++absent;
    }
  }
  std::vector<u32> droppable_pos;
  for (u32 p = 0; p < present.size(); ++p)
    if (present[p].droppable) droppable_pos.push_back(p);
  if (absent > droppable_pos.size()) return;  // cannot balance adds with drops

  // Iterate over all drop subsets of the required size.
  std::vector<u32> choose(absent);
  for (u32 i = 0; i < absent; ++i) choose[i] = i;
  std::vector<bool> dropped(present.size());
  while (true) {
    std::fill(dropped.begin(), dropped.end(), false);
    for (u32 i = 0; i < absent; ++i) dropped[droppable_pos[choose[i]]] = true;

    KikuchiVertex head;
    head.pairs.reserve(tail.pairs.size());
    size_t pi = 0;
    auto next_add = added.begin();
    auto emit = [&](u32 idx, ZqElement e) {
      while (next_add != added.end() && next_add->first < idx) {
        head.pairs.emplace_back(next_add->first, next_add->second);
        ++next_add;
      }
      head.pairs.emplace_back(idx, e);
    };
    for (const auto& [tidx, e] : tail.pairs) {
      if (pi < present.size() && present[pi].idx == tidx) {
        if (!dropped[pi]) emit(tidx, add_mod(e, present[pi].coeff, q));
        ++pi;
      } else {
        emit(tidx, e);
      }
    }
    while (next_add != added.end()) {
      head.pairs.emplace_back(next_add->first, next_add->second);
      ++next_add;
    }
    fn(std::move(head));

    if (absent == 0) break;
    // Next combination in lexicographic order.
    i64 pos = i64(absent) - 1;
    while (pos >= 0 && choose[pos] == droppable_pos.size() - absent + pos) --pos;
    if (pos < 0) break;
    ++choose[pos];
    for (u32 i = static_cast<u32>(pos) + 1; i < absent; ++i) choose[i] = choose[i - 1] + 1;
  }
}

inline std::vector<std::pair<u32, ZqElement>> negated_scope(const Scope& s, u32 q) {
  auto pairs = s.pairs;
  for (auto& [idx, a] : pairs) a = neg_mod(a, q);
  return pairs;
}

}  // namespace detail

/// All edges with tail `t` generated by constraint `c` (color `color`), in
/// both orientations: forward edges labeled with the right-hand side, and
/// reverse edges (twins of forward edges into `t`) labeled with its
/// conjugate.
inline std::vector<KikuchiEdge> out_edges(const KikuchiVertex& t, const Constraint& c, u32 q,
                                          u32 color = 0) {
  std::vector<KikuchiEdge> edges;
  detail::for_each_head(t, c.scope.pairs, q, [&](KikuchiVertex&& head) {
    edges.push_back({t, std::move(head), c.rhs, color, true});
  });
  const auto neg = detail::negated_scope(c.scope, q);
  detail::for_each_head(t, neg, q, [&](KikuchiVertex&& head) {
    edges.push_back({t, std::move(head), conjugate(c.rhs, q), color, false});
  });
  return edges;
}

/// Total out-degree of a vertex across all constraints of the instance.
inline u64 out_degree(const KikuchiVertex& t, const LinInstance& inst) {
  u64 deg = 0;
  const u32 q = inst.params.q;
  for (const auto& c : inst.constraints) {
    detail::for_each_head(t, c.scope.pairs, q, [&](KikuchiVertex&&) { ++deg; });
    detail::for_each_head(t, detail::negated_scope(c.scope, q), q, [&](KikuchiVertex&&) { ++deg; });
  }
  return deg;
}

// ===== Canonical vertex codec ================================================
//
// rank = colex_rank(indices) * q^l + sum_j exponent_j * q^j, where the
// exponent of the j-th smallest index occupies base-q digit j and the sorted
// index set {i_1 < ... < i_l} has colexicographic rank sum_j C(i_j - 1, j).
// Serialized vertex ranks are stable under this convention.

inline u64 vertex_rank(const KikuchiVertex& t, u32 q) {
  const u32 l = static_cast<u32>(t.pairs.size());
  u64 set_rank = 0;
  for (u32 j = 1; j <= l; ++j) {
    auto b = binomial(t.pairs[j - 1].first - 1, j);
    if (!b) throw scale_error("vertex_rank: overflow");
    set_rank += *b;
  }
  u64 rank = set_rank;
  for (u32 j = l; j-- > 0;) rank = rank * q + t.pairs[j].second;
  return rank;
}

inline KikuchiVertex vertex_unrank(u64 rank, u32 n, u32 l, u32 q) {
  std::vector<ZqElement> exps(l);
  for (u32 j = 0; j < l; ++j) {
    exps[j] = static_cast<ZqElement>(rank % q);
    rank /= q;
  }
  KikuchiVertex t;
  t.pairs.resize(l);
  u64 remaining = rank;
  u32 hi = n;
  for (u32 j = l; j >= 1; --j) {
    // Largest v with C(v, j) <= remaining determines the j-th smallest index.
    u32 v = j - 1;
    u64 best = 0;
    for (u32 cand = j - 1; cand < hi; ++cand) {
      auto b = binomial(cand, j);
      if (b && *b <= remaining) {
        v = cand;
        best = *b;
      } else if (b && *b > remaining) {
        break;
      }
    }
    t.pairs[j - 1] = {v + 1, exps[j - 1]};
    remaining -= best;
    hi = v;
  }
  return t;
}

// ===== Instance-wide graph view =============================================

/// Precomputed per-instance context for edge enumeration: the exact
/// per-constraint edge count, vertex count, average degree, and an inverted
/// index from variable to touching constraints (a constraint has edges at a
/// vertex only when their supports intersect).
class GraphView {
 public:
  explicit GraphView(const LinInstance& inst)
      : inst_(&inst),
        n_(inst.params.n),
        k_(inst.params.k),
        q_(inst.params.q),
        l_(inst.params.l),
        theta_(theta(n_, l_, k_, q_)),
        vertex_count_(vertex_count(n_, l_, q_)) {
    const double log2N = log2_binomial(n_, l_) + double(l_) * std::log2(double(q_));
    log_n_ = log2N * 0.6931471805599453;
    delta_ = static_cast<double>(inst.constraints.size()) * static_cast<double>(theta_) /
             std::exp2(log2N);
    touching_.assign(n_ + 1, {});
    for (u32 i = 0; i < inst.constraints.size(); ++i)
      for (const auto& [idx, a] : inst.constraints[i].scope.pairs) touching_[idx].push_back(i);
    stamp_.assign(inst.constraints.size(), 0);
  }

  const LinInstance& instance() const { return *inst_; }
  u32 n() const { return n_; }
  u32 k() const { return k_; }
  u32 q() const { return q_; }
  u32 l() const { return l_; }
  u64 theta_per_constraint() const { return theta_; }
  std::optional<u64> N() const { return vertex_count_; }
  double delta() const { return delta_; }
  double log_vertex_count() const { return log_n_; }

  /// Applies fn to every out-edge of t (both orientations, all constraints).
  template <class Fn>
  void for_each_out_edge(const KikuchiVertex& t, Fn&& fn) const {
    ++round_;
    for (const auto& [idx, e] : t.pairs) {
      for (u32 ci : touching_[idx]) {
        if (stamp_[ci] == round_) continue;
        stamp_[ci] = round_;
        const auto& c = (*inst_).constraints[ci];
        detail::for_each_head(t, c.scope.pairs, q_, [&](KikuchiVertex&& head) {
          fn(KikuchiEdge{t, std::move(head), c.rhs, ci, true});
        });
        detail::for_each_head(t, detail::negated_scope(c.scope, q_), q_, [&](KikuchiVertex&& head) {
          fn(KikuchiEdge{t, std::move(head), conjugate(c.rhs, q_), ci, false});
        });
      }
    }
  }

  u64 out_degree(const KikuchiVertex& t) const {
    u64 deg = 0;
    for_each_out_edge(t, [&](const KikuchiEdge&) { ++deg; });
    return deg;
  }

 private:
  const LinInstance* inst_;
  u32 n_, k_, q_, l_;
  u64 theta_;
  std::optional<u64> vertex_count_;
  double delta_ = 0.0;
  double log_n_ = 0.0;
  std::vector<std::vector<u32>> touching_;
  mutable std::vector<u64> stamp_;
  mutable u64 round_ = 0;
};

// ===== Degree-proportional vertex sampling ==================================

namespace detail {

// One orientation of one constraint, decomposed by membership pattern: the
// tally of tails with a given (drop-set, add-set, keep-set) partition is
// q^{|keep|} * C(n-k, outside) * q^{outside}. Summed over all balanced
// partitions this equals half the per-constraint edge count, which makes
// exact degree-proportional sampling possible without enumerating edges.
struct TailFamily {
  std::vector<u8> cases;  // per scope position: 0 drop, 1 add, 2 keep
  u64 weight;
};

inline std::vector<TailFamily> tail_families(u32 n, u32 l, u32 k, u32 q) {
  std::vector<TailFamily> families;
  std::vector<u8> cases(k, 0);
  while (true) {
    u32 drops = 0, adds = 0, keeps = 0;
    for (u8 c : cases) (c == 0 ? drops : c == 1 ? adds : keeps)++;
    if (drops == adds && drops + keeps <= l) {
      const u32 outside = l - drops - keeps;
      if (outside <= n - k) {
        auto sets = binomial(n - k, outside);
        auto pk = checked_pow(q, keeps);
        auto po = checked_pow(q, outside);
        if (sets && pk && po) {
          auto w = checked_mul(*sets, *pk);
          if (w) w = checked_mul(*w, *po);
          if (w && *w > 0) families.push_back({cases, *w});
        }
      }
    }
    u32 pos = 0;
    while (pos < k && cases[pos] == 2) cases[pos++] = 0;
    if (pos == k) break;
    ++cases[pos];
  }
  return families;
}

}  // namespace detail

/// Samples a vertex with probability proportional to its out-degree:
/// uniform constraint, then a uniform edge among the edges that constraint
/// generates, returning the edge's tail. Exact because every constraint
/// contributes the same number of edges.
inline KikuchiVertex sample_vertex_nu(const LinInstance& inst, Rng& rng) {
  if (inst.constraints.empty()) throw empty_graph_error("sample_vertex_nu: instance has no edges");
  const u32 n = inst.params.n, k = inst.params.k, q = inst.params.q, l = inst.params.l;
  const u32 ci = static_cast<u32>(uniform_below(rng, inst.constraints.size()));
  const bool forward = uniform_below(rng, 2) == 0;
  auto pairs = forward ? inst.constraints[ci].scope.pairs
                       : detail::negated_scope(inst.constraints[ci].scope, q);

  static thread_local std::vector<detail::TailFamily> families_cache;
  static thread_local u64 cache_key = 0;
  const u64 key = (u64(n) << 48) ^ (u64(l) << 32) ^ (u64(k) << 16) ^ q;
  if (cache_key != key) {
    families_cache = detail::tail_families(n, l, k, q);
    cache_key = key;
  }
  u64 total = 0;
  for (const auto& f : families_cache) total += f.weight;
  u64 pick = uniform_below(rng, total);
  const detail::TailFamily* fam = nullptr;
  for (const auto& f : families_cache) {
    if (pick < f.weight) {
      fam = &f;
      break;
    }
    pick -= f.weight;
  }

  // Build the tail: dropped indices carry exponent -a, kept indices a free
  // exponent; fill up to size l with uniform outside indices and exponents.
  KikuchiVertex tail;
  tail.pairs.reserve(l);
  std::vector<bool> in_scope(n + 1, false);
  for (const auto& [idx, a] : pairs) in_scope[idx] = true;
  u32 outside = l;
  for (u32 p = 0; p < k; ++p) {
    const auto [idx, a] = pairs[p];
    if (fam->cases[p] == 0) {
      tail.pairs.emplace_back(idx, neg_mod(a, q));
      --outside;
    } else if (fam->cases[p] == 2) {
      tail.pairs.emplace_back(idx, static_cast<ZqElement>(uniform_below(rng, q)));
      --outside;
    }
  }
  // Uniform (n-k choose outside) subset of the complement via Floyd's method.
  std::vector<u32> complement;
  complement.reserve(n - k);
  for (u32 j = 1; j <= n; ++j)
    if (!in_scope[j]) complement.push_back(j);
  const u32 csz = static_cast<u32>(complement.size());
  std::set<u32> picked;
  for (u32 j = csz - outside + 1; j <= csz; ++j) {
    u32 slot = 1 + static_cast<u32>(uniform_below(rng, j));
    picked.insert(picked.count(slot) ? j : slot);
  }
  for (u32 pos : picked)
    tail.pairs.emplace_back(complement[pos - 1], static_cast<ZqElement>(uniform_below(rng, q)));
  std::sort(tail.pairs.begin(), tail.pairs.end());
  return tail;
}

/// Uniformly random outgoing edge of t (single-pass reservoir over the
/// out-edge multiset). Reports the out-degree through degree_out when given.
/// Throws dead_end_error on a vertex with no outgoing edges.
inline KikuchiEdge uniform_out_step(const KikuchiVertex& t, const GraphView& view, Rng& rng,
                                    u64* degree_out = nullptr) {
  u64 seen = 0;
  KikuchiEdge chosen;
  view.for_each_out_edge(t, [&](KikuchiEdge&& e) {
    ++seen;
    if (uniform_below(rng, seen) == 0) chosen = std::move(e);
  });
  if (degree_out) *degree_out = seen;
  if (seen == 0) throw dead_end_error("uniform_out_step: vertex has no outgoing edges");
  return chosen;
}

}  // namespace sparselin

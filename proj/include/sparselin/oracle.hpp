#pragma once

// Brute-force ground-truth implementations used only in tests and
// calibration: dense spectral norms via a full Hermitian eigensolve,
// exhaustive edge counts via an independent pair predicate, and exhaustive
// small cover search. Never on the attack path.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <vector>

#include "cover.hpp"
#include "kikuchi.hpp"

namespace sparselin {

using DenseHermitian = Eigen::MatrixXcd;

/// All N vertices in rank order. Refuses when N exceeds cap.
inline std::vector<KikuchiVertex> enumerate_vertices(u32 n, u32 l, u32 q, u64 cap) {
  auto count = vertex_count(n, l, q);
  if (!count || *count > cap) throw scale_error("enumerate_vertices: vertex count exceeds cap");
  std::vector<KikuchiVertex> vertices;
  vertices.reserve(static_cast<size_t>(*count));
  for (u64 r = 0; r < *count; ++r) vertices.push_back(vertex_unrank(r, n, l, q));
  return vertices;
}

/// Materializes the full adjacency matrix by sweeping out_edges over every
/// vertex rank. Hermitian by construction: each directed edge contributes
/// its label's unit-circle value at (tail, head), and twin edges carry
/// conjugated labels.
inline DenseHermitian materialize_dense(const LinInstance& inst, u64 cap) {
  const u32 n = inst.params.n, l = inst.params.l, q = inst.params.q;
  auto count = vertex_count(n, l, q);
  if (!count || *count > cap) throw scale_error("materialize_dense: vertex count exceeds cap");
  const auto N = static_cast<Eigen::Index>(*count);
  DenseHermitian A = DenseHermitian::Zero(N, N);
  GraphView view(inst);
  for (u64 r = 0; r < *count; ++r) {
    const KikuchiVertex tail = vertex_unrank(r, n, l, q);
    view.for_each_out_edge(tail, [&](const KikuchiEdge& e) {
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(vertex_rank(e.head, q))) +=
          phase_to_complex(e.label, q);
    });
  }
  return A;
}

/// Exact spectral norm (largest absolute eigenvalue) of the adjacency
/// matrix, by dense Hermitian eigensolve. Refuses when N exceeds the cap.
inline double dense_spectral_norm(const LinInstance& inst, u64 cap = 2000) {
  if (inst.constraints.empty()) {
    auto count = vertex_count(inst.params.n, inst.params.l, inst.params.q);
    if (!count || *count > cap) throw scale_error("dense_spectral_norm: vertex count exceeds cap");
    return 0.0;
  }
  DenseHermitian A = materialize_dense(inst, cap);
  Eigen::SelfAdjointEigenSolver<DenseHermitian> solver(A, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Spectral norm of an already materialized Hermitian matrix.
inline double dense_spectral_norm_of(const DenseHermitian& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<DenseHermitian> solver(A, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Independent forward-edge predicate, deliberately not sharing code with
/// the per-vertex enumerator: head - tail must realize the scope's
/// coefficients. For each scope index (i, a) exactly one of
///   both present with head exponent = tail exponent + a,
///   tail-only with tail exponent = -a,
///   head-only with head exponent = a
/// must hold, and outside the scope the vertices must agree exactly.
inline bool pair_matches_scope(const KikuchiVertex& tail, const KikuchiVertex& head,
                               const std::vector<std::pair<u32, ZqElement>>& scope_pairs, u32 q) {
  auto scope_coeff = [&](u32 idx) -> const ZqElement* {
    for (const auto& [j, a] : scope_pairs)
      if (j == idx) return &a;
    return nullptr;
  };
  size_t ti = 0, hi = 0;
  while (ti < tail.pairs.size() || hi < head.pairs.size()) {
    u32 idx;
    bool in_tail = false, in_head = false;
    ZqElement te = 0, he = 0;
    if (hi == head.pairs.size() ||
        (ti < tail.pairs.size() && tail.pairs[ti].first < head.pairs[hi].first)) {
      idx = tail.pairs[ti].first;
      in_tail = true;
      te = tail.pairs[ti].second;
      ++ti;
    } else if (ti == tail.pairs.size() || head.pairs[hi].first < tail.pairs[ti].first) {
      idx = head.pairs[hi].first;
      in_head = true;
      he = head.pairs[hi].second;
      ++hi;
    } else {
      idx = tail.pairs[ti].first;
      in_tail = in_head = true;
      te = tail.pairs[ti].second;
      he = head.pairs[hi].second;
      ++ti;
      ++hi;
    }
    const ZqElement* a = scope_coeff(idx);
    if (!a) {
      if (!(in_tail && in_head && te == he)) return false;
    } else if (in_tail && in_head) {
      if (he != add_mod(te, *a, q)) return false;
    } else if (in_tail) {
      if (te != neg_mod(*a, q)) return false;
    } else {
      if (he != *a % q) return false;
    }
  }
  // Scope indices absent from both vertices cannot be realized.
  for (const auto& [idx, a] : scope_pairs)
    if (!contains_index(tail, idx) && !contains_index(head, idx)) return false;
  return true;
}

/// Counts the directed edges one scope generates by testing all ordered
/// vertex pairs against the forward predicate for the scope and for its
/// negation (the reverse orientation). Cross-validates theta.
inline u64 brute_force_edge_count(const Scope& scope, u32 n, u32 l, u32 q, u64 cap = 2000) {
  const auto vertices = enumerate_vertices(n, l, q, cap);
  auto neg = scope.pairs;
  for (auto& [idx, a] : neg) a = neg_mod(a, q);
  u64 count = 0;
  for (const auto& u : vertices)
    for (const auto& v : vertices) {
      if (pair_matches_scope(u, v, scope.pairs, q)) ++count;
      if (pair_matches_scope(u, v, neg, q)) ++count;
    }
  return count;
}

/// Exhaustive search for covers of support size at most max_support with
/// entries in Z_q \ {0}: enumerates every support subset and every nonzero
/// coefficient assignment, keeping those with c^T A = 0 mod q. The work is
/// sum_{s<=w} C(m,s) (q-1)^s assignments; refuses beyond the configured
/// budget. Tests only: exponential in max_support.
inline std::vector<QaryCover> brute_force_cover_search(const LinInstance& inst, u32 max_support) {
  const u32 q = inst.params.q;
  const u64 m = inst.constraints.size();
  double work = 0.0;
  for (u32 s = 1; s <= max_support && s <= m; ++s)
    work += std::exp(log2_binomial(double(m), double(s)) * 0.6931471805599453 +
                     double(s) * std::log(double(q - 1)));
  if (work > double(inst.params.constants.cover_budget))
    throw scale_error("brute_force_cover_search: assignment count exceeds the budget");

  std::vector<QaryCover> found;
  std::vector<u32> support;
  std::vector<ZqElement> coeffs;
  auto emit_if_valid = [&]() {
    QaryCover c;
    for (u32 p = 0; p < support.size(); ++p) c.counts.emplace_back(support[p], coeffs[p]);
    if (cover_is_valid(c, inst)) found.push_back(std::move(c));
  };
  auto assign = [&](auto&& self, u32 pos) -> void {
    if (pos == support.size()) {
      emit_if_valid();
      return;
    }
    for (ZqElement v = 1; v < q; ++v) {
      coeffs[pos] = v;
      self(self, pos + 1);
    }
  };
  auto choose = [&](auto&& self, u32 next, u32 remaining) -> void {
    if (remaining == 0) {
      coeffs.assign(support.size(), 0);
      assign(assign, 0);
      return;
    }
    for (u32 i = next; i + remaining <= m; ++i) {
      support.push_back(i);
      self(self, i + 1, remaining - 1);
      support.pop_back();
    }
  };
  for (u32 s = 1; s <= max_support && s <= m; ++s) choose(choose, 0, s);
  return found;
}

}  // namespace sparselin

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "sparselin/oracle.hpp"

using namespace sparselin;

namespace {

LinInstance make_instance(u32 n, u32 k, u32 q, u32 m, u32 l, u64 seed, Mode mode = Mode::random,
                          NoiseSpec noise = NoiseSpec::uniform()) {
  AttackParams p;
  p.n = n;
  p.k = k;
  p.q = q;
  p.m = m;
  p.l = l;
  p.noise = noise;
  p.seed = seed;
  Rng rng(seed);
  return generate(p, mode, rng);
}

Scope make_scope(std::initializer_list<std::pair<u32, ZqElement>> pairs) {
  Scope s;
  s.pairs.assign(pairs.begin(), pairs.end());
  return s;
}

}  // namespace

TEST_CASE("pair predicate: membership cases") {
  const u32 q = 5;
  auto s = make_scope({{1, 2}, {3, 4}});
  // keep/keep: exponents shift by the coefficients.
  CHECK(pair_matches_scope({{{1, 1}, {3, 0}}}, {{{1, 3}, {3, 4}}}, s.pairs, q));
  CHECK_FALSE(pair_matches_scope({{{1, 1}, {3, 0}}}, {{{1, 3}, {3, 3}}}, s.pairs, q));
  // leave/join: tail holds the negated coefficient, head holds the coefficient.
  CHECK(pair_matches_scope({{{1, 3}, {2, 0}}}, {{{2, 0}, {3, 4}}}, s.pairs, q));
  CHECK_FALSE(pair_matches_scope({{{1, 2}, {2, 0}}}, {{{2, 0}, {3, 4}}}, s.pairs, q));
  CHECK_FALSE(pair_matches_scope({{{1, 3}, {2, 0}}}, {{{2, 0}, {3, 3}}}, s.pairs, q));
  // Untouched index must agree exactly.
  CHECK_FALSE(pair_matches_scope({{{1, 3}, {2, 1}}}, {{{2, 0}, {3, 4}}}, s.pairs, q));
  // A scope index absent from both endpoints cannot be realized.
  CHECK_FALSE(pair_matches_scope({{{1, 3}, {2, 0}}}, {{{1, 0}, {2, 0}}}, s.pairs, q));
  // Zero coefficient: presence must match on both sides, or a single side
  // holds exponent zero.
  auto z = make_scope({{1, 0}, {2, 3}});
  CHECK(pair_matches_scope({{{1, 4}, {2, 2}}}, {{{1, 4}, {2, 0}}}, z.pairs, q));
  CHECK(pair_matches_scope({{{1, 0}, {2, 2}}}, {{{2, 0}, {3, 1}}}, z.pairs, q) == false);
}

TEST_CASE("brute-force edge count equals the closed form across a grid") {
  Rng rng(9);
  for (u32 q = 2; q <= 3; ++q)
    for (u32 n = 2; n <= 6; ++n)
      for (u32 k = 1; k <= std::min(n, 3u); ++k)
        for (u32 l = (k + 1) / 2; l <= std::min(n, 3u); ++l) {
          const auto expected = theta(n, l, k, q);
          for (int rep = 0; rep < 2; ++rep) {
            Scope s = sample_coeff_vector(n, k, q, rng);
            CHECK(brute_force_edge_count(s, n, l, q) == expected);
          }
        }
}

TEST_CASE("edge count at the largest grid point and scope independence") {
  // All scopes of a small shape give the same (even) count.
  const u32 n = 4, k = 2, l = 1, q = 2;
  const u64 expected = theta(n, l, k, q);
  std::set<u64> counts;
  for (u32 i = 1; i <= n; ++i)
    for (u32 j = i + 1; j <= n; ++j)
      for (ZqElement a = 0; a < q; ++a)
        for (ZqElement b = 0; b < q; ++b) {
          Scope s = make_scope({{i, a}, {j, b}});
          counts.insert(brute_force_edge_count(s, n, l, q));
        }
  REQUIRE(counts.size() == 1);
  CHECK(*counts.begin() == expected);
  CHECK(expected % 2 == 0);
}

TEST_CASE("enumeration and pair predicate agree edge for edge") {
  // The per-vertex enumerator and the independent predicate must produce
  // identical directed edge sets, not merely equal counts.
  for (auto [n, k, q, l] : {std::tuple<u32, u32, u32, u32>{5, 2, 3, 2}, {6, 3, 2, 2}, {4, 1, 5, 1}}) {
    LinInstance inst = make_instance(n, k, q, 3, l, 50 + n);
    const auto vertices = enumerate_vertices(n, l, q, 2000);
    for (const auto& c : inst.constraints) {
      auto neg = c.scope.pairs;
      for (auto& [idx, a] : neg) a = neg_mod(a, q);
      // Predicate route: ordered pairs.
      std::set<std::tuple<u64, u64, bool>> predicate_edges;
      for (const auto& u : vertices)
        for (const auto& v : vertices) {
          if (pair_matches_scope(u, v, c.scope.pairs, q))
            predicate_edges.insert({vertex_rank(u, q), vertex_rank(v, q), true});
          if (pair_matches_scope(u, v, neg, q))
            predicate_edges.insert({vertex_rank(u, q), vertex_rank(v, q), false});
        }
      // Enumeration route.
      std::set<std::tuple<u64, u64, bool>> enumerated;
      for (const auto& u : vertices)
        for (const auto& e : out_edges(u, c, q, 0))
          enumerated.insert({vertex_rank(e.tail, q), vertex_rank(e.head, q), e.forward});
      CHECK(predicate_edges == enumerated);
    }
  }
}

TEST_CASE("dense adjacency is Hermitian") {
  LinInstance inst = make_instance(6, 2, 3, 10, 2, 77);
  DenseHermitian A = materialize_dense(inst, 2000);
  REQUIRE(A.rows() == 135);
  double max_dev = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      max_dev = std::max(max_dev, std::abs(A(i, j) - std::conj(A(j, i))));
  CHECK(max_dev <= 1e-12);
}

TEST_CASE("dense spectral norm basics") {
  // No constraints: zero matrix.
  LinInstance empty;
  empty.params.n = 4;
  empty.params.k = 2;
  empty.params.q = 3;
  empty.params.m = 1;
  empty.params.l = 1;
  CHECK(dense_spectral_norm(empty) == 0.0);

  // Literal 2x2 Hermitian toy with a unit off-diagonal phase.
  DenseHermitian toy(2, 2);
  const auto b = phase_to_complex(Phase{1}, 3);
  toy << 0.0, b, std::conj(b), 0.0;
  CHECK(dense_spectral_norm_of(toy) == Catch::Approx(1.0).epsilon(1e-12));

  // Doubled edges at q=2 on the two-vertex toy graph: norm 2.
  LinInstance pairND;
  pairND.params.n = 1;
  pairND.params.k = 1;
  pairND.params.q = 2;
  pairND.params.m = 1;
  pairND.params.l = 1;
  Constraint c;
  c.scope.pairs = {{1, 1}};
  c.rhs = Phase{1};
  pairND.constraints = {c};
  CHECK(dense_spectral_norm(pairND) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dense norm refuses oversized graphs") {
  LinInstance inst = make_instance(12, 2, 3, 5, 2, 123);  // N = 594
  CHECK_THROWS_AS(dense_spectral_norm(inst, 100), scale_error);
  CHECK_NOTHROW(dense_spectral_norm(inst, 600));
}

TEST_CASE("planted noiseless instances reach the average degree") {
  // With no noise the planted vector certifies a Rayleigh quotient of delta,
  // so the top eigenvalue is at least the average degree.
  LinInstance inst = make_instance(10, 2, 3, 200, 1, 2027, Mode::planted, NoiseSpec::noiseless());
  GraphView view(inst);
  const double delta = view.delta();
  REQUIRE(delta >= 20.0);
  const double norm = dense_spectral_norm(inst, 2000);
  CHECK(norm >= delta * 0.9);
  CHECK(norm >= delta - 1e-9);  // exact witness: the lifted secret vector
}

TEST_CASE("random instances stay near two sqrt of the average degree") {
  LinInstance planted =
      make_instance(10, 2, 3, 200, 1, 2028, Mode::planted, NoiseSpec::noiseless());
  LinInstance random = make_instance(10, 2, 3, 200, 1, 2028, Mode::random);
  const double dp = dense_spectral_norm(planted, 2000);
  const double dr = dense_spectral_norm(random, 2000);
  GraphView view(planted);
  // The planted norm is separated from the random norm at this degree.
  CHECK(dp >= view.delta() - 1e-9);
  CHECK(dr <= 0.5 * view.delta());
}

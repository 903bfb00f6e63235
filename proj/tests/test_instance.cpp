#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "sparselin/instance.hpp"

using namespace sparselin;

namespace {

AttackParams desk_params(u32 n, u32 k, u32 q, u32 m, u32 l, NoiseSpec noise) {
  AttackParams p;
  p.n = n;
  p.k = k;
  p.q = q;
  p.m = m;
  p.l = l;
  p.noise = noise;
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(desk_params(8, 2, 3, 10, 1, NoiseSpec::noiseless()).validate());
  CHECK_THROWS_AS(desk_params(8, 0, 3, 10, 1, NoiseSpec::noiseless()).validate(), parameter_error);
  CHECK_THROWS_AS(desk_params(8, 9, 3, 10, 4, NoiseSpec::noiseless()).validate(), parameter_error);
  CHECK_THROWS_AS(desk_params(8, 2, 1, 10, 1, NoiseSpec::noiseless()).validate(), parameter_error);
  CHECK_THROWS_AS(desk_params(8, 2, 3, 0, 1, NoiseSpec::noiseless()).validate(), parameter_error);
  // l must satisfy k/2 <= l <= n.
  CHECK_THROWS_AS(desk_params(8, 3, 3, 10, 1, NoiseSpec::noiseless()).validate(), parameter_error);
  CHECK_NOTHROW(desk_params(8, 3, 3, 10, 2, NoiseSpec::noiseless()).validate());
  CHECK_THROWS_AS(desk_params(8, 2, 3, 10, 9, NoiseSpec::noiseless()).validate(), parameter_error);
  // Noise spec validated against the modulus.
  CHECK_THROWS_AS(desk_params(8, 2, 3, 10, 1, NoiseSpec::lpn(0.9)).validate(), parameter_error);
}

TEST_CASE("scope_count_total") {
  CHECK(scope_count_total(4, 2, 3) == u64{54});  // C(4,2) * 9
  CHECK(scope_count_total(12, 2, 3) == u64{594});
  CHECK_FALSE(scope_count_total(300, 150, 7).has_value());
}

TEST_CASE("sample_coeff_vector produces sorted k-subsets with arbitrary coefficients") {
  Rng rng(11);
  std::map<std::vector<u32>, int> support_counts;
  bool saw_zero_coeff = false;
  for (int i = 0; i < 6000; ++i) {
    Scope s = sample_coeff_vector(4, 2, 3, rng);
    REQUIRE(s.pairs.size() == 2);
    REQUIRE(s.pairs[0].first < s.pairs[1].first);
    std::vector<u32> supp;
    for (auto& [idx, a] : s.pairs) {
      REQUIRE(idx >= 1);
      REQUIRE(idx <= 4);
      REQUIRE(a < 3);
      if (a == 0) saw_zero_coeff = true;
      supp.push_back(idx);
    }
    ++support_counts[supp];
  }
  CHECK(support_counts.size() == 6);  // all C(4,2) supports reached
  CHECK(saw_zero_coeff);              // zero coefficients are legal
  for (auto& [supp, count] : support_counts) CHECK(count > 6000 / 6 / 2);
}

TEST_CASE("evaluate_scope computes the inner product") {
  Scope s;
  s.pairs = {{1, 3}, {2, 4}};
  std::vector<ZqElement> z = {1, 2};
  CHECK(evaluate_scope(z, s, 5) == Phase{1});  // 3*1 + 4*2 = 11 = 1 mod 5
  Scope t;
  t.pairs = {{2, 1}};
  CHECK(evaluate_scope(z, t, 5) == Phase{2});
  std::vector<ZqElement> zero(2, 0);
  CHECK(evaluate_scope(zero, s, 5) == Phase{0});
}

TEST_CASE("generate planted: right-hand sides are consistent with the ground truth") {
  auto p = desk_params(10, 3, 7, 40, 2, NoiseSpec::gaussian(1.0));
  p.seed = 99;
  Rng rng(p.seed);
  LinInstance inst = generate(p, Mode::planted, rng);
  REQUIRE(inst.constraints.size() == 40);
  REQUIRE(inst.mode == Mode::planted);
  REQUIRE(inst.ground_truth.has_value());
  const auto& gt = *inst.ground_truth;
  REQUIRE(gt.secret.size() == 10);
  REQUIRE(gt.noise_values.size() == 40);
  for (size_t i = 0; i < inst.constraints.size(); ++i) {
    const auto& c = inst.constraints[i];
    Phase expect = phase_mul(evaluate_scope(gt.secret, c.scope, 7), Phase{gt.noise_values[i]}, 7);
    CHECK(c.rhs == expect);
  }
}

TEST_CASE("generate noiseless planted has zero noise values") {
  auto p = desk_params(8, 2, 3, 20, 1, NoiseSpec::noiseless());
  Rng rng(5);
  LinInstance inst = generate(p, Mode::planted, rng);
  for (ZqElement e : inst.ground_truth->noise_values) CHECK(e == 0);
}

TEST_CASE("generate uses distinct scopes") {
  auto p = desk_params(5, 2, 2, 40, 1, NoiseSpec::noiseless());  // total = C(5,2)*4 = 40
  Rng rng(3);
  LinInstance inst = generate(p, Mode::planted, rng);
  std::set<Scope> seen;
  for (const auto& c : inst.constraints) seen.insert(c.scope);
  CHECK(seen.size() == inst.constraints.size());  // saturates every scope exactly once

  auto too_many = desk_params(5, 2, 2, 41, 1, NoiseSpec::noiseless());
  Rng rng2(3);
  CHECK_THROWS_AS(generate(too_many, Mode::planted, rng2), parameter_error);
}

TEST_CASE("generate random carries no ground truth and is seed-deterministic") {
  auto p = desk_params(9, 2, 5, 30, 1, NoiseSpec::uniform());
  Rng a(7), b(7), c(8);
  LinInstance i1 = generate(p, Mode::random, a);
  LinInstance i2 = generate(p, Mode::random, b);
  LinInstance i3 = generate(p, Mode::random, c);
  CHECK(i1.mode == Mode::random);
  CHECK_FALSE(i1.ground_truth.has_value());
  REQUIRE(i1.constraints.size() == i2.constraints.size());
  bool all_equal = true;
  bool differs_from_i3 = false;
  for (size_t i = 0; i < i1.constraints.size(); ++i) {
    if (!(i1.constraints[i].scope == i2.constraints[i].scope &&
          i1.constraints[i].rhs == i2.constraints[i].rhs))
      all_equal = false;
    if (!(i1.constraints[i].scope == i3.constraints[i].scope &&
          i1.constraints[i].rhs == i3.constraints[i].rhs))
      differs_from_i3 = true;
  }
  CHECK(all_equal);
  CHECK(differs_from_i3);
}

TEST_CASE("additive view round-trips") {
  auto p = desk_params(10, 3, 7, 25, 2, NoiseSpec::gaussian(1.2));
  Rng rng(13);
  LinInstance inst = generate(p, Mode::planted, rng);
  AdditiveView v = additive_view(inst);
  REQUIRE(v.rows.size() == 25);
  REQUIRE(v.beta.size() == 25);
  for (size_t i = 0; i < 25; ++i) {
    CHECK(v.rows[i] == inst.constraints[i].scope);
    CHECK(v.beta[i] == inst.constraints[i].rhs.exponent);
  }
  auto back = constraints_from_additive(v);
  REQUIRE(back.size() == 25);
  for (size_t i = 0; i < 25; ++i) {
    CHECK(back[i].scope == inst.constraints[i].scope);
    CHECK(back[i].rhs == inst.constraints[i].rhs);
  }
}

TEST_CASE("instance file format round-trips with ground truth") {
  auto p = desk_params(6, 2, 5, 12, 1, NoiseSpec::gaussian(0.9));
  p.seed = 21;
  Rng rng(p.seed);
  LinInstance inst = generate(p, Mode::planted, rng);

  std::ostringstream os;
  write_instance(inst, os);
  std::istringstream is(os.str());
  LinInstance parsed = read_instance(is);

  CHECK(parsed.params.n == 6);
  CHECK(parsed.params.k == 2);
  CHECK(parsed.params.q == 5);
  CHECK(parsed.params.m == 12);
  CHECK(parsed.mode == Mode::planted);
  REQUIRE(parsed.constraints.size() == inst.constraints.size());
  for (size_t i = 0; i < inst.constraints.size(); ++i) {
    CHECK(parsed.constraints[i].scope == inst.constraints[i].scope);
    CHECK(parsed.constraints[i].rhs == inst.constraints[i].rhs);
  }
  REQUIRE(parsed.ground_truth.has_value());
  CHECK(parsed.ground_truth->secret == inst.ground_truth->secret);
  CHECK(parsed.ground_truth->noise_values == inst.ground_truth->noise_values);

  // Writing again reproduces the same bytes.
  std::ostringstream os2;
  write_instance(parsed, os2);
  CHECK(os2.str() == os.str());
}

TEST_CASE("planted instance saved without ground truth stays planted") {
  auto p = desk_params(6, 2, 5, 8, 1, NoiseSpec::noiseless());
  Rng rng(4);
  LinInstance inst = generate(p, Mode::planted, rng);
  std::ostringstream os;
  write_instance(inst, os, /*keep_ground_truth=*/false);
  CHECK(os.str().find("secret:") == std::string::npos);
  std::istringstream is(os.str());
  LinInstance parsed = read_instance(is);
  CHECK(parsed.mode == Mode::planted);
  CHECK_FALSE(parsed.ground_truth.has_value());
}

TEST_CASE("instance file format golden example") {
  LinInstance inst;
  inst.params = desk_params(3, 2, 5, 2, 1, NoiseSpec::noiseless());
  inst.mode = Mode::random;
  Constraint c1;
  c1.scope.pairs = {{1, 2}, {3, 4}};
  c1.rhs = Phase{1};
  Constraint c2;
  c2.scope.pairs = {{2, 0}, {3, 3}};
  c2.rhs = Phase{0};
  inst.constraints = {c1, c2};
  std::ostringstream os;
  write_instance(inst, os);
  CHECK(os.str() ==
        "3 2 5 2 random\n"
        "1:2 3:4 | 1\n"
        "2:0 3:3 | 0\n");
}

TEST_CASE("read_instance rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_instance(is);
  };
  CHECK_THROWS_AS(parse(""), io_error);
  CHECK_THROWS_AS(parse("3 2 5 1 sideways\n1:2 3:4 | 1\n"), io_error);
  CHECK_THROWS_AS(parse("3 2 5 1 random\n3:2 1:4 | 1\n"), io_error);     // unsorted indices
  CHECK_THROWS_AS(parse("3 2 5 1 random\n1:2 | 1\n"), io_error);         // wrong scope size
  CHECK_THROWS_AS(parse("3 2 5 1 random\n1:2 3:7 | 1\n"), io_error);     // coefficient >= q
  CHECK_THROWS_AS(parse("3 2 5 1 random\n1:2 3:4 | 9\n"), io_error);     // rhs >= q
  CHECK_THROWS_AS(parse("3 2 5 1 random\n1:2 4:4 | 1\n"), io_error);     // index > n
  CHECK_THROWS_AS(parse("3 2 5 2 random\n1:2 3:4 | 1\n"), io_error);     // missing row
  CHECK_THROWS_AS(parse("3 2 5 1 random\n1:2 1:4 | 1\n"), io_error);     // repeated index
  // Ground truth inconsistent with the right-hand side: 2*1 + 4*1 + 0 = 6 = 1 mod 5, not 2.
  CHECK_THROWS_AS(parse("3 2 5 1 planted\n1:2 3:4 | 2\nsecret: 1 0 1\nnoise: 0\n"), io_error);
  // Consistent version parses.
  CHECK_NOTHROW(parse("3 2 5 1 planted\n1:2 3:4 | 1\nsecret: 1 0 1\nnoise: 0\n"));
  // Secret length mismatch.
  CHECK_THROWS_AS(parse("3 2 5 1 planted\n1:2 3:4 | 1\nsecret: 1 0\nnoise: 0\n"), io_error);
  // Noise length mismatch.
  CHECK_THROWS_AS(parse("3 2 5 1 planted\n1:2 3:4 | 1\nsecret: 1 0 1\nnoise: 0 0\n"), io_error);
}

TEST_CASE("file helpers write and read through paths") {
  auto p = desk_params(5, 2, 3, 6, 1, NoiseSpec::lpn(0.2));
  p.seed = 31;
  Rng rng(p.seed);
  LinInstance inst = generate(p, Mode::planted, rng);
  const std::string path = "test_instance_roundtrip.tmp";
  write_instance_file(inst, path);
  LinInstance parsed = read_instance_file(path);
  CHECK(parsed.constraints.size() == inst.constraints.size());
  CHECK(parsed.ground_truth.has_value());
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_instance_file("does_not_exist.tmp"), io_error);
}

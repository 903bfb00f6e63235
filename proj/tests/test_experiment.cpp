#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <sparselin/experiment.hpp>

using namespace sparselin;

namespace {

ExperimentConfig spectral_config() {
  ExperimentConfig cfg;
  cfg.params.n = 10;
  cfg.params.k = 2;
  cfg.params.q = 3;
  cfg.params.m = 200;
  cfg.params.l = 1;
  cfg.params.noise = NoiseSpec::noiseless();
  cfg.attack = Attack::spectral;
  cfg.trials = 1;
  cfg.seed = 71;
  return cfg;
}

u64 csv_column_count(const std::string& line) {
  u64 cols = 1;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) ++cols;
  }
  return cols;
}

}  // namespace

TEST_CASE("attack names round-trip") {
  for (Attack a : {Attack::spectral, Attack::cover_lwe, Attack::cover_lpn})
    CHECK(attack_from_name(attack_name(a)) == a);
  CHECK_THROWS_AS(attack_from_name("laser"), parameter_error);
}

TEST_CASE("configs are rejected before any trial") {
  ExperimentConfig cfg = spectral_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), parameter_error);

  cfg = spectral_config();
  cfg.params.noise = NoiseSpec::uniform();  // rho = 0
  CHECK_THROWS_AS(cfg.validate(), parameter_error);

  // Composite modulus with a cover attack.
  cfg = spectral_config();
  cfg.attack = Attack::cover_lwe;
  cfg.params.q = 4;
  cfg.params.noise = NoiseSpec::gaussian(2.0);
  CHECK_THROWS_AS(cfg.validate(), modulus_error);

  // Default walk length (ceil(3 ln 30) = 11) exceeds the average degree
  // (50 * 4 / 30 = 6.7).
  cfg = spectral_config();
  cfg.attack = Attack::cover_lwe;
  cfg.params.m = 50;
  cfg.params.noise = NoiseSpec::gaussian(2.0);
  CHECK_THROWS_AS(cfg.validate(), parameter_error);

  // Noise kind must match the distinguisher.
  cfg = spectral_config();
  cfg.attack = Attack::cover_lwe;
  cfg.params.noise = NoiseSpec::lpn(0.1);
  cfg.params.constants.T_override = 2;
  CHECK_THROWS_AS(cfg.validate(), parameter_error);
  cfg.attack = Attack::cover_lpn;
  cfg.params.noise = NoiseSpec::gaussian(2.0);
  CHECK_THROWS_AS(cfg.validate(), parameter_error);
  cfg.params.noise = NoiseSpec::lpn(0.1);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a noiseless spectral trial is exactly right on both twins") {
  ExperimentConfig cfg = spectral_config();
  const ExperimentSummary summary = run_experiment(cfg);
  REQUIRE(summary.records.size() == 2);
  CHECK(summary.usable == 2);
  CHECK(summary.errors == 0);
  CHECK(summary.accuracy == 1.0);
  CHECK(summary.records[0].mode == Mode::planted);
  CHECK(summary.records[0].verdict == Verdict::planted);
  CHECK(summary.records[1].mode == Mode::random);
  CHECK(summary.records[1].verdict == Verdict::random);
  CHECK(summary.records[0].seed == derive_seed(cfg.seed, 0));
  CHECK(summary.records[0].statistic > summary.records[1].statistic);
  CHECK(summary.wilson_low < 1.0);
  CHECK(summary.wilson_high == 1.0);
}

TEST_CASE("records arrive trial-major with planted before random") {
  ExperimentConfig cfg = spectral_config();
  cfg.trials = 4;
  const ExperimentSummary summary = run_experiment(cfg);
  REQUIRE(summary.records.size() == 8);
  for (u32 t = 0; t < 4; ++t) {
    CHECK(summary.records[2 * t].trial == t);
    CHECK(summary.records[2 * t].mode == Mode::planted);
    CHECK(summary.records[2 * t + 1].trial == t);
    CHECK(summary.records[2 * t + 1].mode == Mode::random);
    CHECK(summary.records[2 * t].seed == derive_seed(cfg.seed, t));
  }
}

TEST_CASE("identical config and seed reproduce the CSV byte for byte") {
  ExperimentConfig cfg = spectral_config();
  cfg.trials = 3;
  std::ostringstream a, b;
  emit_csv(run_experiment(cfg), a);
  emit_csv(run_experiment(cfg), b);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());

  cfg.seed = 72;
  std::ostringstream c;
  emit_csv(run_experiment(cfg), c);
  CHECK(a.str() != c.str());
}

TEST_CASE("sub-operation failures become error rows instead of crashes") {
  ExperimentConfig cfg = spectral_config();
  cfg.trials = 2;
  cfg.params.constants.spectral_cap = 10;  // N = 30 exceeds the cap at attack time
  const ExperimentSummary summary = run_experiment(cfg);
  REQUIRE(summary.records.size() == 4);
  CHECK(summary.errors == 4);
  CHECK(summary.usable == 0);
  CHECK(summary.accuracy == 0.0);
  for (const auto& rec : summary.records) {
    CHECK(rec.verdict == Verdict::fail);
    CHECK(!rec.error.empty());
  }
  std::ostringstream os;
  emit_csv(summary, os);
  std::istringstream is(os.str());
  std::string line;
  u64 rows = 0;
  std::getline(is, line);
  CHECK(line == std::string("# schema=") + kTrialsSchema);
  std::getline(is, line);
  const u64 cols = csv_column_count(line);
  while (std::getline(is, line)) {
    ++rows;
    CHECK(csv_column_count(line) == cols);
  }
  CHECK(rows == 4);
}

TEST_CASE("wilson intervals match published values") {
  const auto [lo0, hi0] = wilson_interval(0, 0);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == 1.0);
  const auto [lo, hi] = wilson_interval(8, 10);
  CHECK(lo == Catch::Approx(0.4902).margin(2e-3));
  CHECK(hi == Catch::Approx(0.9433).margin(2e-3));
  const auto [lo_all, hi_all] = wilson_interval(10, 10);
  CHECK(hi_all == 1.0);
  CHECK(lo_all == Catch::Approx(0.7225).margin(2e-3));
  const auto [lo_none, hi_none] = wilson_interval(0, 10);
  CHECK(lo_none == 0.0);
  CHECK(hi_none == Catch::Approx(0.2775).margin(2e-3));
}

TEST_CASE("bounded-noise cover experiment separates the twins") {
  // Walk collisions only mix different constraints once the walk count per
  // endpoint outgrows the exponent spread; m = 1400 gives Delta = 64, enough
  // for the two-step search to keep finding nontrivial covers quickly.
  ExperimentConfig cfg;
  cfg.params.n = 10;
  cfg.params.k = 2;
  cfg.params.q = 499;
  cfg.params.m = 1400;
  cfg.params.l = 2;
  cfg.params.noise = NoiseSpec::gaussian(3.0);
  cfg.params.constants.T_override = 2;
  cfg.params.constants.a_lwe = 1.0;  // keep the threshold well under q/2
  cfg.attack = Attack::cover_lwe;
  cfg.trials = 3;
  cfg.seed = 2025;
  cfg.validate();
  const ExperimentSummary summary = run_experiment(cfg);
  CHECK(summary.errors == 0);
  CHECK(summary.usable == 6);
  for (const auto& rec : summary.records) {
    CHECK(rec.covers_found >= 1);
    CHECK(rec.verdict != Verdict::fail);
    if (rec.mode == Mode::planted) CHECK(rec.verdict == Verdict::planted);
  }
  CHECK(summary.mean_statistic_planted < summary.mean_statistic_random);
  CHECK(summary.accuracy >= 5.0 / 6.0);
}

TEST_CASE("phase cover experiment runs end to end") {
  ExperimentConfig cfg;
  cfg.params.n = 8;
  cfg.params.k = 2;
  cfg.params.q = 3;
  cfg.params.m = 120;
  cfg.params.l = 1;
  cfg.params.noise = NoiseSpec::lpn(0.1);
  cfg.params.constants.T_override = 2;
  cfg.params.constants.min_covers = 10;
  // With four blocks a support-4 cover shatters ~9.4% of the time, so the
  // floor has to sit near the per-round mean; 15% keeps ~48 covers here.
  cfg.params.constants.c_floor = 0.15;
  cfg.attack = Attack::cover_lpn;
  cfg.trials = 2;
  cfg.seed = 77;
  cfg.validate();
  const ExperimentSummary summary = run_experiment(cfg);
  CHECK(summary.errors == 0);
  CHECK(summary.usable == 4);
  for (const auto& rec : summary.records) {
    CHECK(rec.covers_found >= 10);
    CHECK(rec.statistic >= 0.0);
    CHECK(rec.threshold > 0.0);
  }
  for (u32 t = 0; t < 2; ++t)
    CHECK(summary.records[2 * t].statistic > summary.records[2 * t + 1].statistic);
}

TEST_CASE("json reports round-trip their records") {
  ExperimentConfig cfg = spectral_config();
  cfg.trials = 2;
  const ExperimentSummary summary = run_experiment(cfg);
  const nlohmann::json j = summary_to_json(summary);
  CHECK(j.at("schema") == kSummarySchema);
  CHECK(j.at("config").at("attack") == "spectral");
  CHECK(j.at("config").at("n") == 10);
  CHECK(j.at("summary").at("accuracy").get<double>() == summary.accuracy);
  const auto back = records_from_json(j);
  REQUIRE(back.size() == summary.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i] == summary.records[i]);
    CHECK(back[i].wall_ms == summary.records[i].wall_ms);
  }
}

TEST_CASE("report files land on disk with path context on failure") {
  ExperimentConfig cfg = spectral_config();
  const ExperimentSummary summary = run_experiment(cfg);
  const std::string csv = "build_test_report.csv", json = "build_test_report.json";
  write_report_files(summary, csv, json);
  std::ifstream check_csv(csv), check_json(json);
  CHECK(check_csv.good());
  CHECK(check_json.good());
  std::string first;
  std::getline(check_csv, first);
  CHECK(first.rfind("# schema=", 0) == 0);
  nlohmann::json parsed;
  check_json >> parsed;
  CHECK(parsed.at("schema") == kSummarySchema);
  std::remove(csv.c_str());
  std::remove(json.c_str());
  CHECK_THROWS_AS(write_report_files(summary, "no_such_dir/x.csv", ""), io_error);
}

#pragma once

// Experiment harness: paired planted/random trials of one attack, a worker
// pool over trials, and machine-readable reports. Every content byte of the
// reports is determined by (config, seed); wall-clock fields appear only in
// the JSON report and are the sole nondeterministic outputs.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cover.hpp"
#include "spectral.hpp"

namespace sparselin {

enum class Attack { spectral, cover_lwe, cover_lpn };

inline const char* attack_name(Attack a) {
  switch (a) {
    case Attack::spectral: return "spectral";
    case Attack::cover_lwe: return "cover-lwe";
    default: return "cover-lpn";
  }
}

inline Attack attack_from_name(const std::string& name) {
  if (name == "spectral") return Attack::spectral;
  if (name == "cover-lwe") return Attack::cover_lwe;
  if (name == "cover-lpn") return Attack::cover_lpn;
  throw parameter_error("unknown attack: " + name);
}

struct ExperimentConfig {
  AttackParams params;
  Attack attack = Attack::spectral;
  u32 trials = 1;
  u64 seed = 1;

  /// Rejects configurations before any trial runs: cover attacks need a
  /// prime modulus and an average degree above the walk length; the
  /// bounded-noise test needs bounded noise; the spectral and phase
  /// thresholds need rho > 0.
  void validate() const {
    params.validate();
    if (trials < 1) throw parameter_error("ExperimentConfig: need at least one trial");
    const double rho = rho_of(params.q, params.noise);
    if (attack == Attack::spectral) {
      if (!(rho > 0.0))
        throw parameter_error("ExperimentConfig: spectral attack needs rho > 0");
      return;
    }
    if (!is_prime(params.q))
      throw modulus_error("ExperimentConfig: cover attacks need a prime modulus");
    const u32 T = walk_length(params);
    const double log2N =
        log2_binomial(params.n, params.l) + double(params.l) * std::log2(double(params.q));
    const double delta =
        double(params.m) * double(theta(params.n, params.l, params.k, params.q)) /
        std::exp2(log2N);
    if (delta <= double(T))
      throw parameter_error(
          "ExperimentConfig: average degree must exceed the walk length; raise m, lower "
          "the walk length, or shrink the graph");
    if (attack == Attack::cover_lwe) {
      if (params.noise.kind != NoiseSpec::Kind::gaussian &&
          params.noise.kind != NoiseSpec::Kind::noiseless)
        throw parameter_error("ExperimentConfig: the bounded-noise test needs bounded noise");
    } else {
      if (params.noise.kind != NoiseSpec::Kind::lpn &&
          params.noise.kind != NoiseSpec::Kind::noiseless)
        throw parameter_error("ExperimentConfig: the phase test needs flip noise");
      if (!(rho > 0.0) && !params.constants.strict_constants)
        throw parameter_error("ExperimentConfig: the calibrated phase threshold needs rho > 0");
    }
  }
};

struct TrialRecord {
  u32 trial = 0;
  Mode mode = Mode::planted;
  Verdict verdict = Verdict::fail;
  bool correct = false;
  double statistic = 0.0;
  double threshold = 0.0;
  double delta_avg = 0.0;
  double rho = 0.0;
  u64 covers_found = 0;
  double cover_weight = 0.0;
  u32 iterations = 0;
  double residual = 0.0;
  u64 walk_aborts = 0;
  u64 seed = 0;         // per-trial derived seed
  double wall_ms = 0.0;  // nondeterministic; JSON only
  std::string error;     // empty on success

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.trial == b.trial && a.mode == b.mode && a.verdict == b.verdict &&
           a.correct == b.correct && a.statistic == b.statistic && a.threshold == b.threshold &&
           a.delta_avg == b.delta_avg && a.rho == b.rho && a.covers_found == b.covers_found &&
           a.cover_weight == b.cover_weight && a.iterations == b.iterations &&
           a.residual == b.residual && a.walk_aborts == b.walk_aborts && a.seed == b.seed &&
           a.error == b.error;  // wall_ms deliberately excluded
  }
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<TrialRecord> records;  // trial-major, planted row before random row
  u64 usable = 0;                    // records without an error
  u64 errors = 0;
  double accuracy = 0.0;  // correct / usable
  double wilson_low = 0.0;
  double wilson_high = 1.0;
  double mean_statistic_planted = 0.0;
  double mean_statistic_random = 0.0;
  double mean_threshold = 0.0;
  double wall_ms_total = 0.0;  // nondeterministic; JSON only
};

/// 95% (by default) Wilson score interval for successes out of total.
inline std::pair<double, double> wilson_interval(u64 successes, u64 total, double z = 1.959964) {
  if (total == 0) return {0.0, 1.0};
  const double ntot = double(total);
  const double p = double(successes) / ntot;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / ntot;
  const double center = (p + z2 / (2.0 * ntot)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / ntot + z2 / (4.0 * ntot * ntot)) / denom;
  // The interval touches an endpoint exactly when p does; rounding must not
  // pull it inside.
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == total ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

namespace detail {

inline void run_one(const ExperimentConfig& cfg, u32 trial, Mode mode, TrialRecord& rec) {
  const u64 trial_seed = derive_seed(cfg.seed, trial);
  rec.trial = trial;
  rec.mode = mode;
  rec.seed = trial_seed;
  rec.rho = rho_of(cfg.params.q, cfg.params.noise);
  const auto start = std::chrono::steady_clock::now();
  try {
    AttackParams p = cfg.params;
    p.seed = trial_seed;
    const u64 mode_stream = mode == Mode::planted ? 1 : 2;
    Rng gen = derive_rng(trial_seed, mode_stream);
    const LinInstance inst = generate(p, mode, gen);
    switch (cfg.attack) {
      case Attack::spectral: {
        const SpectralReport report = spectral_distinguish(inst, rec.rho);
        rec.verdict = report.verdict;
        rec.statistic = report.estimate;
        rec.threshold = report.threshold;
        rec.delta_avg = report.delta_avg;
        rec.iterations = report.iterations;
        rec.residual = report.residual;
        break;
      }
      case Attack::cover_lwe: {
        GraphView view(inst);
        rec.delta_avg = view.delta();
        const u32 T = walk_length(p);
        Rng walk_rng = derive_rng(trial_seed, 20 + mode_stream);
        // One bounded combination decides, so stop at the first cover.
        const CoverSearchResult search =
            find_distinct_nontrivial_covers(view, T, p.constants.eps, walk_rng, 1);
        rec.covers_found = search.covers.size();
        rec.walk_aborts = search.aborts;
        if (search.covers.empty()) {
          rec.verdict = Verdict::fail;
          break;
        }
        const double B =
            p.noise.kind == NoiseSpec::Kind::gaussian ? std::max(p.noise.r, 0.5) : 0.5;
        const CoverReport report =
            lwe_cover_distinguish(inst, search.covers, B, p.constants.a_lwe);
        rec.verdict = report.verdict;
        rec.statistic = report.statistic;
        rec.threshold = report.threshold;
        rec.cover_weight = report.cover_weight;
        break;
      }
      case Attack::cover_lpn: {
        GraphView view(inst);
        rec.delta_avg = view.delta();
        const u32 T = walk_length(p);
        Rng walk_rng = derive_rng(trial_seed, 20 + mode_stream);
        const CoverSearchResult search =
            find_distinct_nontrivial_covers(view, T, p.constants.eps, walk_rng);
        rec.covers_found = search.covers.size();
        rec.walk_aborts = search.aborts;
        Rng phase_rng = derive_rng(trial_seed, 30 + mode_stream);
        const CoverReport report =
            lpn_cover_distinguish(inst, search.covers, T, p.constants.eps, phase_rng);
        rec.verdict = report.verdict;
        rec.statistic = report.statistic;
        rec.threshold = report.threshold;
        break;
      }
    }
    rec.correct = rec.verdict == (mode == Mode::planted ? Verdict::planted : Verdict::random);
  } catch (const std::exception& e) {
    rec.verdict = Verdict::fail;
    rec.correct = false;
    rec.error = e.what();
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Runs trials in a worker pool; record order is by trial index (planted row
/// then random row) regardless of completion order.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentSummary summary;
  summary.config = cfg;
  summary.records.resize(2 * size_t(cfg.trials));

  const u32 workers = std::max(1u, std::min(std::thread::hardware_concurrency(), cfg.trials));
  std::atomic<u32> next{0};
  auto work = [&] {
    for (;;) {
      const u32 t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      detail::run_one(cfg, t, Mode::planted, summary.records[2 * size_t(t)]);
      detail::run_one(cfg, t, Mode::random, summary.records[2 * size_t(t) + 1]);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (u32 w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  u64 correct = 0, planted_n = 0, random_n = 0;
  double stat_planted = 0.0, stat_random = 0.0, thr_sum = 0.0;
  for (const TrialRecord& rec : summary.records) {
    if (!rec.error.empty()) {
      ++summary.errors;
      continue;
    }
    ++summary.usable;
    if (rec.correct) ++correct;
    thr_sum += rec.threshold;
    if (rec.mode == Mode::planted) {
      ++planted_n;
      stat_planted += rec.statistic;
    } else {
      ++random_n;
      stat_random += rec.statistic;
    }
  }
  summary.accuracy = summary.usable ? double(correct) / double(summary.usable) : 0.0;
  std::tie(summary.wilson_low, summary.wilson_high) = wilson_interval(correct, summary.usable);
  summary.mean_statistic_planted = planted_n ? stat_planted / double(planted_n) : 0.0;
  summary.mean_statistic_random = random_n ? stat_random / double(random_n) : 0.0;
  summary.mean_threshold = summary.usable ? thr_sum / double(summary.usable) : 0.0;
  summary.wall_ms_total =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

// ===== Reports ===============================================================

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline constexpr const char* kTrialsSchema = "sparselin.trials.v1";
inline constexpr const char* kSummarySchema = "sparselin.summary.v1";

/// CSV of trial records: one schema comment, one header, one row per record.
/// The column set is fixed across attacks; fields an attack does not produce
/// are zero. No wall-clock column: the CSV is byte-deterministic.
inline void emit_csv(const ExperimentSummary& summary, std::ostream& os) {
  os << "# schema=" << kTrialsSchema << "\n";
  os << "trial,mode,attack,n,k,q,m,l,noise_kind,noise_param,rho,seed,verdict,correct,"
        "statistic,threshold,delta_avg,covers_found,cover_weight,iterations,residual,"
        "walk_aborts,error\n";
  const AttackParams& p = summary.config.params;
  const double noise_param = p.noise.kind == NoiseSpec::Kind::gaussian ? p.noise.r
                             : p.noise.kind == NoiseSpec::Kind::lpn    ? p.noise.mu
                                                                       : 0.0;
  for (const TrialRecord& rec : summary.records) {
    os << rec.trial << ',' << mode_name(rec.mode) << ',' << attack_name(summary.config.attack)
       << ',' << p.n << ',' << p.k << ',' << p.q << ',' << p.m << ',' << p.l << ','
       << p.noise.name() << ',' << detail::fmt_double(noise_param) << ','
       << detail::fmt_double(rec.rho) << ',' << rec.seed << ',' << verdict_name(rec.verdict)
       << ',' << (rec.correct ? 1 : 0) << ',' << detail::fmt_double(rec.statistic) << ','
       << detail::fmt_double(rec.threshold) << ',' << detail::fmt_double(rec.delta_avg) << ','
       << rec.covers_found << ',' << detail::fmt_double(rec.cover_weight) << ','
       << rec.iterations << ',' << detail::fmt_double(rec.residual) << ',' << rec.walk_aborts
       << ',' << detail::csv_quote(rec.error) << "\n";
  }
}

/// JSON report: config echo, aggregate summary, and per-trial records. The
/// wall_ms fields (per record, and wall_ms_total) are wall-clock measurements
/// and are the only nondeterministic bytes.
inline nlohmann::json summary_to_json(const ExperimentSummary& summary) {
  const AttackParams& p = summary.config.params;
  nlohmann::json j;
  j["schema"] = kSummarySchema;
  j["config"] = {
      {"attack", attack_name(summary.config.attack)},
      {"trials", summary.config.trials},
      {"seed", summary.config.seed},
      {"n", p.n},
      {"k", p.k},
      {"q", p.q},
      {"m", p.m},
      {"l", p.l},
      {"noise_kind", p.noise.name()},
      {"noise_r", p.noise.r},
      {"noise_mu", p.noise.mu},
      {"strict_constants", p.constants.strict_constants},
  };
  j["summary"] = {
      {"usable", summary.usable},
      {"errors", summary.errors},
      {"accuracy", summary.accuracy},
      {"wilson_low", summary.wilson_low},
      {"wilson_high", summary.wilson_high},
      {"mean_statistic_planted", summary.mean_statistic_planted},
      {"mean_statistic_random", summary.mean_statistic_random},
      {"mean_threshold", summary.mean_threshold},
      {"wall_ms_total", summary.wall_ms_total},
  };
  j["trials"] = nlohmann::json::array();
  for (const TrialRecord& rec : summary.records) {
    j["trials"].push_back({
        {"trial", rec.trial},
        {"mode", mode_name(rec.mode)},
        {"verdict", verdict_name(rec.verdict)},
        {"correct", rec.correct},
        {"statistic", rec.statistic},
        {"threshold", rec.threshold},
        {"delta_avg", rec.delta_avg},
        {"rho", rec.rho},
        {"covers_found", rec.covers_found},
        {"cover_weight", rec.cover_weight},
        {"iterations", rec.iterations},
        {"residual", rec.residual},
        {"walk_aborts", rec.walk_aborts},
        {"seed", rec.seed},
        {"wall_ms", rec.wall_ms},
        {"error", rec.error},
    });
  }
  return j;
}

inline void emit_json(const ExperimentSummary& summary, std::ostream& os) {
  os << summary_to_json(summary).dump(2) << "\n";
}

/// Parses the per-trial records back out of a JSON report (wall_ms is
/// restored too, though record equality ignores it).
inline std::vector<TrialRecord> records_from_json(const nlohmann::json& j) {
  std::vector<TrialRecord> records;
  for (const auto& t : j.at("trials")) {
    TrialRecord rec;
    rec.trial = t.at("trial").get<u32>();
    rec.mode = std::string(t.at("mode")) == "planted" ? Mode::planted : Mode::random;
    const std::string v = t.at("verdict");
    rec.verdict = v == "planted" ? Verdict::planted : v == "random" ? Verdict::random
                                                                    : Verdict::fail;
    rec.correct = t.at("correct").get<bool>();
    rec.statistic = t.at("statistic").get<double>();
    rec.threshold = t.at("threshold").get<double>();
    rec.delta_avg = t.at("delta_avg").get<double>();
    rec.rho = t.at("rho").get<double>();
    rec.covers_found = t.at("covers_found").get<u64>();
    rec.cover_weight = t.at("cover_weight").get<double>();
    rec.iterations = t.at("iterations").get<u32>();
    rec.residual = t.at("residual").get<double>();
    rec.walk_aborts = t.at("walk_aborts").get<u64>();
    rec.seed = t.at("seed").get<u64>();
    rec.wall_ms = t.at("wall_ms").get<double>();
    rec.error = t.at("error").get<std::string>();
    records.push_back(std::move(rec));
  }
  return records;
}

/// Writes both report files, surfacing failures with the path.
inline void write_report_files(const ExperimentSummary& summary, const std::string& csv_path,
                               const std::string& json_path) {
  if (!csv_path.empty()) {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + csv_path);
    emit_csv(summary, os);
    if (!os) throw io_error("write failed: " + csv_path);
  }
  if (!json_path.empty()) {
    std::ofstream os(json_path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + json_path);
    emit_json(summary, os);
    if (!os) throw io_error("write failed: " + json_path);
  }
}

}  // namespace sparselin

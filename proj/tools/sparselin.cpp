/// Command-line driver for the sparse k-LIN_q toolkit.
///
/// Subcommands:
///   gen           write an instance file (planted or random)
///   spectral      power-iteration distinguisher on one instance
///   cover-lwe     bounded-noise cover distinguisher on one instance
///   cover-lpn     sparse-flip-noise phase distinguisher on one instance
///   sweep         paired planted/random trials with CSV and JSON reports
///   calc          closed-form sample bounds and time proxies
///   oracle-check  cross-check fast paths against exhaustive references
///
/// Exit codes: 0 success, 2 configuration error, 3 scale-cap refusal, 1 for
/// anything else (I/O failures, oracle mismatches).

#include <CLI11.hpp>
#include <json.hpp>

#include <sparselin/calc.hpp>
#include <sparselin/experiment.hpp>
#include <sparselin/oracle.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

namespace {

using namespace sparselin;
using ordered_json = nlohmann::ordered_json;

struct NoiseFlags {
  std::string kind = "noiseless";
  double r = 0.0;
  double mu = 0.0;

  NoiseSpec build() const {
    if (kind == "gaussian") return NoiseSpec::gaussian(r);
    if (kind == "lpn") return NoiseSpec::lpn(mu);
    if (kind == "uniform") return NoiseSpec::uniform();
    return NoiseSpec::noiseless();
  }
};

/// Everything a subcommand needs to obtain an instance: either a file via
/// --in (shape read from the header; l and noise supplied by flags) or
/// generation parameters.
struct RunShape {
  std::string in_path;
  std::string mode = "planted";
  u32 n = 0, k = 0, q = 0, m = 0, l = 0;
  NoiseFlags noise;
  u64 seed = 1;
  Tunables tun;
};

void add_noise_flags(CLI::App* cmd, NoiseFlags& nf) {
  cmd->add_option("--noise", nf.kind, "noise model")
      ->check(CLI::IsMember({"noiseless", "gaussian", "lpn", "uniform"}))
      ->capture_default_str();
  cmd->add_option("--r", nf.r, "gaussian width (with --noise gaussian)");
  cmd->add_option("--mu", nf.mu, "flip probability (with --noise lpn)");
}

void add_shape_flags(CLI::App* cmd, RunShape& s, bool with_in) {
  if (with_in)
    cmd->add_option("--in", s.in_path, "instance file to attack (overrides generation flags)");
  cmd->add_option("--n", s.n, "number of variables");
  cmd->add_option("--k", s.k, "constraint sparsity");
  cmd->add_option("--q", s.q, "modulus");
  cmd->add_option("--m", s.m, "number of constraints");
  cmd->add_option("--l", s.l, "level: vertex subset size (default: smallest legal, ceil(k/2))");
  cmd->add_option("--mode", s.mode, "planted or random (generation only)")
      ->check(CLI::IsMember({"planted", "random"}))
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "seed for generation and search randomness")
      ->capture_default_str();
  add_noise_flags(cmd, s.noise);
}

void add_tunables_flags(CLI::App* cmd, Tunables& t) {
  cmd->add_option("--alpha", t.alpha, "constant inside the sample-bound formulas");
  cmd->add_option("--eps", t.eps, "cover-attack budget exponent");
  cmd->add_option("--c-T", t.c_T, "walk length factor: T = ceil(c_T ln N)");
  cmd->add_option("--T", t.T_override, "walk length override (0: use c_T)");
  cmd->add_option("--C1", t.C1, "walk budget factor: L = ceil(C1 sqrt(N ln N))");
  cmd->add_option("--beta-walk", t.beta_walk, "degree fraction below which a vertex is bad");
  cmd->add_option("--eps-walk", t.eps_walk, "goodness slack for walks");
  cmd->add_option("--c-floor", t.c_floor, "calibrated shattered-subset floor fraction");
  cmd->add_option("--a-lwe", t.a_lwe, "threshold constant for the bounded-noise test");
  cmd->add_option("--min-covers", t.min_covers, "minimum cover count for the phase test");
  cmd->add_option("--L-cap", t.L_cap, "hard cap on walks per collision search");
  cmd->add_option("--R-cap", t.R_cap, "hard cap on collision-search rounds");
  cmd->add_option("--S-cap", t.S_cap, "hard cap on equipartition rounds");
  cmd->add_option("--dense-cap", t.dense_cap, "max N for dense reference paths");
  cmd->add_option("--spectral-cap", t.spectral_cap, "max N for the iterative attack");
  cmd->add_option("--cover-budget", t.cover_budget, "candidate cap for exhaustive cover search");
  cmd->add_option("--walk-retries", t.walk_retries, "collision-search retries per cover request");
  cmd->add_option("--power-iters", t.power_iters, "power iteration cap per restart");
  cmd->add_option("--power-tol", t.power_tol, "power iteration stopping tolerance");
  cmd->add_option("--power-restarts", t.power_restarts, "independent power iteration restarts");
  cmd->add_flag("--strict-paper-constants", t.strict_constants,
                "raw asymptotic thresholds instead of calibrated ones");
}

Mode mode_of(const RunShape& s) { return s.mode == "planted" ? Mode::planted : Mode::random; }

/// Reads or generates the instance a distinguisher subcommand will run on.
/// Generation derives its stream from the seed exactly like the sweep
/// harness, so `gen` + attack-on-file and direct attack runs agree.
LinInstance resolve_instance(const RunShape& s) {
  LinInstance inst;
  if (!s.in_path.empty()) {
    inst = read_instance_file(s.in_path);
    inst.params.l = s.l != 0 ? s.l : (inst.params.k + 1) / 2;
    inst.params.noise = s.noise.build();
  } else {
    AttackParams p;
    p.n = s.n;
    p.k = s.k;
    p.q = s.q;
    p.m = s.m;
    p.l = s.l != 0 ? s.l : (s.k + 1) / 2;
    p.noise = s.noise.build();
    p.constants = s.tun;
    p.seed = s.seed;
    p.validate();
    Rng rng = derive_rng(s.seed, mode_of(s) == Mode::planted ? 1 : 2);
    inst = generate(p, mode_of(s), rng);
  }
  inst.params.constants = s.tun;
  inst.params.seed = s.seed;
  inst.params.validate();
  return inst;
}

void emit_output(const ordered_json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + out_path);
  os << j.dump(2) << "\n";
  if (!os) throw io_error("write failed: " + out_path);
}

ordered_json instance_header_json(const LinInstance& inst) {
  const AttackParams& p = inst.params;
  return ordered_json{{"n", p.n},
                      {"k", p.k},
                      {"q", p.q},
                      {"m", p.m},
                      {"l", p.l},
                      {"mode", mode_name(inst.mode)},
                      {"noise_kind", p.noise.name()},
                      {"seed", p.seed}};
}

int cmd_gen(const RunShape& s, const std::string& out, bool strip) {
  if (s.in_path.empty() && (s.n == 0 || s.k == 0 || s.q == 0 || s.m == 0))
    throw parameter_error("gen: need --n, --k, --q and --m");
  const LinInstance inst = resolve_instance(s);
  write_instance_file(inst, out, !strip);
  std::cout << "wrote " << out << ": n=" << inst.params.n << " k=" << inst.params.k
            << " q=" << inst.params.q << " m=" << inst.constraints.size()
            << " mode=" << mode_name(inst.mode) << "\n";
  return 0;
}

int cmd_spectral(const RunShape& s, double rho_flag, const std::string& out) {
  const LinInstance inst = resolve_instance(s);
  const double rho = rho_flag >= 0.0 ? rho_flag : rho_of(inst.params.q, inst.params.noise);
  const SpectralReport rep = spectral_distinguish(inst, rho);
  ordered_json j = instance_header_json(inst);
  j["attack"] = "spectral";
  j["rho"] = rep.rho;
  j["delta_avg"] = rep.delta_avg;
  j["estimate"] = rep.estimate;
  j["threshold"] = rep.threshold;
  j["iterations"] = rep.iterations;
  j["residual"] = rep.residual;
  j["verdict"] = verdict_name(rep.verdict);
  emit_output(j, out);
  return 0;
}

/// Shared preamble of both cover subcommands: prime modulus, walk length
/// within the degree window, then the distinct-cover search.
CoverSearchResult cover_search(const LinInstance& inst, u32 T, u64 max_covers, Rng& rng) {
  if (!is_prime(inst.params.q)) throw modulus_error("cover attack: modulus must be prime");
  GraphView view(inst);
  if (!(view.delta() > double(T)))
    throw parameter_error("cover attack: need average degree Delta > T; raise m or lower T");
  return find_distinct_nontrivial_covers(view, T, inst.params.constants.eps, rng, max_covers);
}

int cmd_cover_lwe(const RunShape& s, double B_flag, u64 max_covers, const std::string& out) {
  const LinInstance inst = resolve_instance(s);
  const u32 T = walk_length(inst.params);
  Rng rng = derive_rng(s.seed, mode_of(s) == Mode::planted ? 21 : 22);
  const CoverSearchResult search = cover_search(inst, T, max_covers, rng);
  ordered_json j = instance_header_json(inst);
  j["attack"] = "cover-lwe";
  j["T"] = T;
  j["covers_found"] = search.covers.size();
  j["rounds"] = search.rounds;
  j["walks"] = search.walks;
  j["walk_aborts"] = search.aborts;
  if (search.covers.empty()) {
    j["verdict"] = verdict_name(Verdict::fail);
  } else {
    const double B = B_flag > 0.0 ? B_flag
                     : inst.params.noise.kind == NoiseSpec::Kind::gaussian
                         ? std::max(inst.params.noise.r, 0.5)
                         : 0.5;
    const CoverReport rep =
        lwe_cover_distinguish(inst, search.covers, B, inst.params.constants.a_lwe);
    j["B"] = B;
    j["statistic"] = rep.statistic;
    j["threshold"] = rep.threshold;
    j["cover_weight"] = rep.cover_weight;
    j["verdict"] = verdict_name(rep.verdict);
  }
  emit_output(j, out);
  return 0;
}

int cmd_cover_lpn(const RunShape& s, const std::string& out) {
  const LinInstance inst = resolve_instance(s);
  const u32 T = walk_length(inst.params);
  Rng walk_rng = derive_rng(s.seed, mode_of(s) == Mode::planted ? 21 : 22);
  const CoverSearchResult search = cover_search(inst, T, 0, walk_rng);
  Rng phase_rng = derive_rng(s.seed, mode_of(s) == Mode::planted ? 31 : 32);
  const CoverReport rep =
      lpn_cover_distinguish(inst, search.covers, T, inst.params.constants.eps, phase_rng);
  ordered_json j = instance_header_json(inst);
  j["attack"] = "cover-lpn";
  j["T"] = T;
  j["covers_found"] = search.covers.size();
  j["shattered"] = rep.shattered;
  j["rounds"] = rep.rounds;
  j["psi_real"] = rep.psi_real;
  j["psi_imag"] = rep.psi_imag;
  j["statistic"] = rep.statistic;
  j["threshold"] = rep.threshold;
  j["verdict"] = verdict_name(rep.verdict);
  emit_output(j, out);
  return 0;
}

int cmd_sweep(const RunShape& s, const std::string& attack, u32 trials, const std::string& csv,
              const std::string& json_path) {
  ExperimentConfig cfg;
  cfg.params.n = s.n;
  cfg.params.k = s.k;
  cfg.params.q = s.q;
  cfg.params.m = s.m;
  cfg.params.l = s.l != 0 ? s.l : (s.k + 1) / 2;
  cfg.params.noise = s.noise.build();
  cfg.params.constants = s.tun;
  cfg.attack = attack_from_name(attack);
  cfg.trials = trials;
  cfg.seed = s.seed;
  cfg.validate();
  const ExperimentSummary summary = run_experiment(cfg);
  write_report_files(summary, csv, json_path);
  std::printf(
      "attack=%s trials=%u usable=%llu errors=%llu accuracy=%.4f wilson=[%.4f,%.4f] "
      "mean_stat_planted=%.6g mean_stat_random=%.6g mean_threshold=%.6g\n",
      attack_name(cfg.attack), cfg.trials, (unsigned long long)summary.usable,
      (unsigned long long)summary.errors, summary.accuracy, summary.wilson_low,
      summary.wilson_high, summary.mean_statistic_planted, summary.mean_statistic_random,
      summary.mean_threshold);
  return 0;
}

ordered_json entry_json(const BoundEntry& e) {
  ordered_json j;
  j["log2"] = e.log2_value;
  if (e.value)
    j["value"] = *e.value;
  else
    j["value"] = nullptr;
  return j;
}

int cmd_calc(const TradeoffQuery& query, const std::string& out) {
  const BoundTable table = calc_bounds(query);
  ordered_json j;
  j["l_used"] = table.l_used;
  j["rho"] = table.rho;
  j["crossover_l_ln"] = table.crossover_l_ln;
  j["crossover_l_log2"] = table.crossover_l_log2;
  j["samples"] = ordered_json{{"spectral_small_q", entry_json(table.spectral_small_q)},
                              {"spectral_large_q", entry_json(table.spectral_large_q)},
                              {"cover_lwe_small_q", entry_json(table.cover_lwe_small_q)},
                              {"cover_lwe_large_q", entry_json(table.cover_lwe_large_q)},
                              {"cover_lpn_small_q", entry_json(table.cover_lpn_small_q)},
                              {"cover_lpn_large_q", entry_json(table.cover_lpn_large_q)}};
  j["time"] = ordered_json{{"spectral", entry_json(table.time_spectral)},
                           {"cover_sqrt", entry_json(table.time_cover_sqrt)},
                           {"cover_eps", entry_json(table.time_cover_eps)}};
  j["dense_minor_samples"] = entry_json(table.dense_minor_samples);
  emit_output(j, out);
  return 0;
}

int cmd_oracle_check(const RunShape& s, u32 scopes, u32 max_support) {
  int rc = 0;
  Rng rng = derive_rng(s.seed, 5);

  // Leg 1: closed-form edge count against exhaustive pair counting.
  const u64 want = theta(s.n, s.l, s.k, s.q);
  bool theta_ok = true;
  for (u32 i = 0; i < scopes; ++i) {
    const Scope scope = sample_coeff_vector(s.n, s.k, s.q, rng);
    const u64 got = brute_force_edge_count(scope, s.n, s.l, s.q, s.tun.dense_cap);
    if (got != want) {
      std::printf("MISMATCH theta scope=%u got=%llu want=%llu\n", i, (unsigned long long)got,
                  (unsigned long long)want);
      theta_ok = false;
      rc = 1;
    }
  }
  if (theta_ok)
    std::printf("ok theta n=%u k=%u l=%u q=%u scopes=%u edges=%llu\n", s.n, s.k, s.l, s.q, scopes,
                (unsigned long long)want);

  // Leg 2: power iteration against a dense Hermitian eigensolve.
  const LinInstance inst = resolve_instance(s);
  const double rho = rho_of(inst.params.q, inst.params.noise);
  const SpectralReport rep = spectral_distinguish(inst, rho);
  const double exact = dense_spectral_norm(inst, s.tun.dense_cap);
  const double rel = std::abs(rep.estimate - exact) / std::max(exact, 1e-30);
  if (rel <= 1e-6) {
    std::printf("ok spectral estimate=%.12g exact=%.12g rel=%.3g\n", rep.estimate, exact, rel);
  } else {
    std::printf("MISMATCH spectral estimate=%.12g exact=%.12g rel=%.3g\n", rep.estimate, exact,
                rel);
    rc = 1;
  }

  // Leg 3: walk-found covers are valid and appear in the exhaustive
  // enumeration (support-bounded). Needs a prime modulus.
  if (!is_prime(s.q)) {
    std::printf("skip covers (modulus not prime)\n");
    return rc;
  }
  const u32 T = walk_length(inst.params);
  Rng walk_rng = derive_rng(s.seed, 21);
  const CoverSearchResult search = cover_search(inst, T, 8, walk_rng);
  const auto all = brute_force_cover_search(inst, max_support);
  const std::set<QaryCover> reference(all.begin(), all.end());
  bool covers_ok = true;
  for (const QaryCover& c : search.covers) {
    if (!cover_is_valid(c, inst)) {
      std::printf("MISMATCH cover invalid (support %zu)\n", c.counts.size());
      covers_ok = false;
      rc = 1;
    } else if (c.counts.size() <= max_support && !reference.count(c)) {
      std::printf("MISMATCH cover missing from enumeration (support %zu)\n", c.counts.size());
      covers_ok = false;
      rc = 1;
    }
  }
  if (covers_ok)
    std::printf("ok covers found=%zu enumerated=%zu max_support=%u\n", search.covers.size(),
                reference.size(), max_support);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse k-LIN_q distinguishing toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  // gen
  auto gen_shape = std::make_shared<RunShape>();
  auto gen_out = std::make_shared<std::string>();
  auto gen_strip = std::make_shared<bool>(false);
  CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
  add_shape_flags(gen, *gen_shape, false);
  add_tunables_flags(gen, gen_shape->tun);
  gen->add_option("--out", *gen_out, "output path")->required();
  gen->add_flag("--strip-ground-truth", *gen_strip, "omit secret and noise lines");
  gen->callback([=, &rc] { rc = cmd_gen(*gen_shape, *gen_out, *gen_strip); });

  // spectral
  auto sp_shape = std::make_shared<RunShape>();
  auto sp_rho = std::make_shared<double>(-1.0);
  auto sp_out = std::make_shared<std::string>();
  CLI::App* sp = app.add_subcommand("spectral", "power-iteration distinguisher");
  add_shape_flags(sp, *sp_shape, true);
  add_tunables_flags(sp, sp_shape->tun);
  sp->add_option("--rho", *sp_rho, "noise bias override (default: from the noise model)");
  sp->add_option("--out", *sp_out, "write the JSON report here instead of stdout");
  sp->callback([=, &rc] { rc = cmd_spectral(*sp_shape, *sp_rho, *sp_out); });

  // cover-lwe
  auto cw_shape = std::make_shared<RunShape>();
  auto cw_B = std::make_shared<double>(0.0);
  auto cw_max = std::make_shared<u64>(1);
  auto cw_out = std::make_shared<std::string>();
  CLI::App* cw = app.add_subcommand("cover-lwe", "bounded-noise cover distinguisher");
  add_shape_flags(cw, *cw_shape, true);
  add_tunables_flags(cw, cw_shape->tun);
  cw->add_option("--B", *cw_B, "noise magnitude bound (default: from the noise model)");
  cw->add_option("--max-covers", *cw_max, "stop the search after this many covers (0: no cap)")
      ->capture_default_str();
  cw->add_option("--out", *cw_out, "write the JSON report here instead of stdout");
  cw->callback([=, &rc] { rc = cmd_cover_lwe(*cw_shape, *cw_B, *cw_max, *cw_out); });

  // cover-lpn
  auto cp_shape = std::make_shared<RunShape>();
  auto cp_out = std::make_shared<std::string>();
  CLI::App* cp = app.add_subcommand("cover-lpn", "sparse-flip-noise phase distinguisher");
  add_shape_flags(cp, *cp_shape, true);
  add_tunables_flags(cp, cp_shape->tun);
  cp->add_option("--out", *cp_out, "write the JSON report here instead of stdout");
  cp->callback([=, &rc] { rc = cmd_cover_lpn(*cp_shape, *cp_out); });

  // sweep
  auto sw_shape = std::make_shared<RunShape>();
  auto sw_attack = std::make_shared<std::string>("spectral");
  auto sw_trials = std::make_shared<u32>(10);
  auto sw_csv = std::make_shared<std::string>();
  auto sw_json = std::make_shared<std::string>();
  CLI::App* sw = app.add_subcommand("sweep", "paired planted/random trials");
  add_shape_flags(sw, *sw_shape, false);
  add_tunables_flags(sw, sw_shape->tun);
  sw->add_option("--attack", *sw_attack, "spectral, cover-lwe or cover-lpn")
      ->capture_default_str();
  sw->add_option("--trials", *sw_trials, "trial pairs to run")->capture_default_str();
  sw->add_option("--csv", *sw_csv, "write per-trial CSV rows here");
  sw->add_option("--json", *sw_json, "write the JSON summary here");
  sw->callback([=, &rc] { rc = cmd_sweep(*sw_shape, *sw_attack, *sw_trials, *sw_csv, *sw_json); });

  // calc
  auto query = std::make_shared<TradeoffQuery>();
  auto calc_noise = std::make_shared<NoiseFlags>();
  auto calc_out = std::make_shared<std::string>();
  CLI::App* calc = app.add_subcommand("calc", "closed-form sample bounds and time proxies");
  calc->add_option("--n", query->n, "number of variables")->required();
  calc->add_option("--k", query->k, "constraint sparsity")->required();
  calc->add_option("--q", query->q, "modulus")->required();
  calc->add_option("--l", query->l, "level (0: derive from --delta)");
  calc->add_option("--delta", query->time_budget_delta, "time budget exponent in 2^{delta n}");
  calc->add_option("--d", query->d, "flip-noise margin exponent (0: drop the n^{2d} factor)");
  calc->add_option("--eps", query->eps, "tolerance in the reduced-time proxy")
      ->capture_default_str();
  calc->add_option("--alpha", query->alpha, "constant inside the sample-bound formulas")
      ->capture_default_str();
  add_noise_flags(calc, *calc_noise);
  calc->add_option("--out", *calc_out, "write the JSON table here instead of stdout");
  calc->callback([=, &rc] {
    query->noise = calc_noise->build();
    rc = cmd_calc(*query, *calc_out);
  });

  // oracle-check
  auto oc_shape = std::make_shared<RunShape>();
  auto oc_scopes = std::make_shared<u32>(5);
  auto oc_support = std::make_shared<u32>(4);
  CLI::App* oc = app.add_subcommand("oracle-check", "fast paths against exhaustive references");
  oc_shape->n = 8;
  oc_shape->k = 2;
  oc_shape->q = 3;
  oc_shape->m = 30;
  oc_shape->l = 1;
  oc_shape->tun.T_override = 2;
  add_shape_flags(oc, *oc_shape, false);
  add_tunables_flags(oc, oc_shape->tun);
  oc->add_option("--scopes", *oc_scopes, "random scopes for the edge-count leg")
      ->capture_default_str();
  oc->add_option("--max-support", *oc_support, "support cap for the exhaustive cover search")
      ->capture_default_str();
  oc->callback([=, &rc] { rc = cmd_oracle_check(*oc_shape, *oc_scopes, *oc_support); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // malformed flags are configuration errors
  } catch (const parameter_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const scale_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

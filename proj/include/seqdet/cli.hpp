#pragma once

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqdet/config.hpp"
#include "seqdet/info.hpp"
#include "seqdet/mc.hpp"
#include "seqdet/optimize.hpp"
#include "seqdet/report.hpp"

namespace seqdet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Environment variable holding the default worker-thread count.
inline constexpr const char* kThreadsEnv = "SEQDET_THREADS";

inline unsigned threads_from_env() {
  const char* v = std::getenv(kThreadsEnv);
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0') throw ConfigError(std::string(kThreadsEnv) + " must be a nonnegative integer");
  return static_cast<unsigned>(n);
}

inline std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// info
// ---------------------------------------------------------------------------

inline int cmd_info(const std::string& quantizer_text, const std::string& model_name, std::ostream& out) {
  const RandomQuantizer rq = parse_quantizer(quantizer_text);
  const bool folded = model_name == "invariant";
  if (!folded && model_name != "three-state") throw ConfigError("--model must be three-state or invariant");
  for (const auto& c : rq.components())
    if (c.quantizer.is_absolute() != folded)
      throw ConfigError(folded ? "the invariant model takes abs:L quantizers"
                               : "abs:L quantizers need --model invariant");

  std::ostringstream report;
  report << "quantizer: " << rq.describe() << "\n";
  report << "model: " << model_name << "\n";
  std::vector<std::pair<Hypothesis, Hypothesis>> pairs;
  if (folded) {
    pairs = {{Hypothesis::folded_f, Hypothesis::folded_g}, {Hypothesis::folded_g, Hypothesis::folded_f}};
  } else {
    for (Hypothesis a : kRawHypotheses)
      for (Hypothesis b : kRawHypotheses)
        if (a != b) pairs.emplace_back(a, b);
  }
  for (const auto& [a, b] : pairs)
    report << "I(" << name_of(a) << "," << name_of(b) << ") = " << fixed6(random_quantizer_kl(rq, a, b)) << "\n";
  if (!folded) report << "maximin min{I(f,g1),I(f,g2)} = " << fixed6(maximin_objective(rq)) << "\n";
  out << report.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

inline nlohmann::json to_json_value(const OptimizationResult& r) {
  return {{"quantizer", seqdet::to_json_value(r.quantizer)},
          {"description", r.quantizer.describe()},
          {"objective", r.objective},
          {"grid_resolution", r.grid_resolution},
          {"refined", r.refined}};
}

inline std::pair<double, double> parse_prior_pair(const std::string& text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 2) throw ConfigError("--priors expects two comma-separated numbers");
  return {detail::parse_real(parts[0], "prior"), detail::parse_real(parts[1], "prior")};
}

inline int cmd_optimize(const std::string& target, const std::string& priors_text, std::ostream& out) {
  nlohmann::json rec;
  rec["target"] = target;
  if (target == "g1" || target == "g2") {
    rec["result"] = to_json_value(optimize_threshold(parse_hypothesis(target)));
  } else if (target == "f") {
    const auto report = optimize_maximin_f_report();
    rec["result"] = to_json_value(report.best);
    rec["arms"] = {{"I(f,g1)", random_quantizer_kl(report.best.quantizer, Hypothesis::f, Hypothesis::g1)},
                   {"I(f,g2)", random_quantizer_kl(report.best.quantizer, Hypothesis::f, Hypothesis::g2)}};
    auto family = [](const std::optional<FamilyBest>& fb) -> nlohmann::json {
      if (!fb) return nullptr;
      return {{"quantizer", seqdet::to_json_value(fb->quantizer)},
              {"description", fb->quantizer.describe()},
              {"objective", fb->objective}};
    };
    rec["families"] = {{"threshold", family(report.threshold)},
                       {"interval", family(report.interval)},
                       {"randomized", family(report.randomized)}};
  } else if (target == "invariant") {
    const auto [pf, pg] = priors_text.empty() ? std::pair{1.0 / 3, 2.0 / 3} : parse_prior_pair(priors_text);
    if (!(pf >= 0.0 && pg >= 0.0) || std::abs(pf + pg - 1.0) > 1e-3)
      throw ConfigError("--priors must be nonnegative and sum to 1");
    const double total = pf + pg;
    rec["priors"] = {pf / total, pg / total};
    rec["result"] = to_json_value(optimize_invariant_lambda(pf / total, pg / total));
  } else {
    throw ConfigError("--target must be one of f, g1, g2, invariant");
  }
  out << rec.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOverrides {
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> csv;
  std::optional<std::string> json;
  std::optional<std::string> estimator;
};

inline std::vector<CellResult> run_experiment(const ExperimentConfig& cfg) {
  std::vector<CellResult> cells;
  for (const auto& t : cfg.tests) {
    for (double c : cfg.costs) {
      McConfig mc;
      mc.replications = cfg.replications;
      mc.seed = cfg.seed;
      mc.test = cfg.make_spec(t, c);
      mc.mixture = cfg.priors;
      mc.estimator = cfg.estimator;
      mc.threads = cfg.threads;
      cells.push_back({t.name, c, cfg.seed, run_trials(mc)});
    }
  }
  return cells;
}

inline int cmd_simulate(const std::string& config_path, const SimulateOverrides& ov, std::ostream& out,
                        std::ostream& err) {
  ExperimentConfig cfg = load_experiment(config_path);
  if (ov.replications) cfg.replications = *ov.replications;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.csv) cfg.csv_path = *ov.csv;
  if (ov.json) cfg.json_path = *ov.json;
  if (ov.estimator) {
    if (*ov.estimator == "plain") cfg.estimator = Estimator::plain;
    else if (*ov.estimator == "importance") cfg.estimator = Estimator::importance;
    else throw ConfigError("--estimator must be plain or importance");
  }
  // Thread count changes scheduling only, never results, so it is not echoed into the outputs.
  unsigned threads = ov.threads ? *ov.threads : cfg.threads;
  if (threads == 0) threads = threads_from_env();
  cfg.validate();

  std::ofstream csv(cfg.csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) {
    err << "error: cannot write " << cfg.csv_path << "\n";
    return kExitRuntime;
  }
  std::ofstream js(cfg.json_path, std::ios::binary | std::ios::trunc);
  if (!js) {
    err << "error: cannot write " << cfg.json_path << "\n";
    return kExitRuntime;
  }

  auto echo = to_json_value(cfg);
  echo.erase("threads");
  auto run_cfg = cfg;
  run_cfg.threads = threads;
  const auto cells = run_experiment(run_cfg);

  write_csv(csv, {"seqdet simulate", "config " + echo.dump()}, cells);
  js << tables_to_json(echo, cells).dump(2) << "\n";
  csv.close();
  js.close();
  if (!csv || !js) {
    err << "error: failed while writing output files\n";
    return kExitRuntime;
  }

  std::size_t overruns = 0;
  for (const auto& cell : cells) {
    const auto& m = cell.table.mixture;
    overruns += m.overruns;
    out << cell.test << "  c=" << detail::fmt_general(cell.c) << "  E(N)=" << detail::fmt_general(m.mean_n)
        << "  P(DI)=" << detail::fmt_probability(m.p_error);
    if (cell.table.bayes_risk) out << "  risk=" << detail::fmt_general(cell.table.bayes_risk->risk);
    out << "\n";
  }
  out << "wrote " << cfg.csv_path << " and " << cfg.json_path << "\n";
  if (overruns > 0) {
    err << "error: " << overruns << " replication(s) hit max_samples; see the diagnostics column\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized sequential tests for a normal mean with quantized sensor messages"};
  app.require_subcommand(1);

  std::string quantizer_text;
  std::string model_name = "three-state";
  auto* info = app.add_subcommand("info", "K-L information numbers of a (randomized) quantizer");
  info->add_option("--quantizer,-q", quantizer_text,
                   "threshold:L[:ge|lt], interval:LO:HI[:BIT], abs:L[:BIT], or W*Q;W*Q mixtures")
      ->required();
  info->add_option("--model", model_name, "three-state or invariant")->capture_default_str();

  std::string target;
  std::string priors_text;
  auto* optimize = app.add_subcommand("optimize", "search for optimal quantizers");
  optimize->add_option("--target,-t", target, "f, g1, g2 or invariant")->required();
  optimize->add_option("--priors", priors_text, "invariant target only: pi_f~,pi_g~ (default 1/3,2/3)");

  std::string config_path;
  SimulateOverrides ov;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string csv_path;
  std::string json_path;
  std::string estimator;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo tables of sample sizes, error rates and Bayes risks");
  simulate->add_option("--config,-c", config_path, "experiment configuration (JSON)")->required();
  auto* o_reps = simulate->add_option("--replications,-n", replications, "replications per hypothesis and cell");
  auto* o_seed = simulate->add_option("--seed", seed, "master seed");
  auto* o_threads = simulate->add_option("--threads", threads, std::string("worker threads (default: $") + kThreadsEnv + ")");
  auto* o_csv = simulate->add_option("--csv", csv_path, "CSV output path");
  auto* o_json = simulate->add_option("--json", json_path, "JSON output path");
  auto* o_est = simulate->add_option("--estimator", estimator, "plain or importance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (info->parsed()) return cmd_info(quantizer_text, model_name, out);
    if (optimize->parsed()) return cmd_optimize(target, priors_text, out);
    if (simulate->parsed()) {
      if (*o_reps) ov.replications = replications;
      if (*o_seed) ov.seed = seed;
      if (*o_threads) ov.threads = threads;
      if (*o_csv) ov.csv = csv_path;
      if (*o_json) ov.json = json_path;
      if (*o_est) ov.estimator = estimator;
      return cmd_simulate(config_path, ov, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfiniteInformationError& e) {
    err << "error: infinite information: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace seqdet::cli

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"
#include "seqdet/posterior.hpp"
#include "seqdet/rng.hpp"
#include "seqdet/sequential.hpp"

namespace seqdet {

enum class Estimator { plain, importance };

using TestSpec = std::variant<TwoStageConfig, InvariantSprtConfig>;

inline double sampling_cost(const TestSpec& spec) {
  return std::visit([](const auto& t) { return t.c; }, spec);
}

/// Losses W_f, W_g1, W_g2 implied by a test; the folded test charges W_g~ under either alternative.
inline std::array<double, 3> raw_losses(const TestSpec& spec) {
  if (const auto* t = std::get_if<TwoStageConfig>(&spec)) return t->losses;
  const auto& inv = std::get<InvariantSprtConfig>(spec);
  return {inv.losses[0], inv.losses[1], inv.losses[1]};
}

struct McConfig {
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  TestSpec test = TwoStageConfig{};
  std::array<double, 3> mixture{1.0 / 3, 1.0 / 3, 1.0 / 3};
  Estimator estimator = Estimator::importance;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate() const {
    if (replications == 0) throw DomainError("McConfig: replications must be >= 1");
    double total = 0.0;
    for (double p : mixture) {
      if (!(p >= 0.0)) throw DomainError("McConfig: mixture weights must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("McConfig: mixture weights must sum to 1");
    std::visit([](const auto& t) { t.validate(); }, test);
  }
};

struct EstimateRow {
  double mean_n = 0.0;
  std::optional<double> stderr_n;
  double p_error = 0.0;
  std::optional<double> stderr_p;
  std::size_t replications = 0;
  std::size_t overruns = 0;
  /// Effective sample size of the importance weights (plain estimator: replications).
  double ess = 0.0;
};

struct RiskEstimate {
  double risk;
  std::optional<double> stderr_risk;
};

struct EstimateTable {
  std::array<std::optional<EstimateRow>, 3> rows;
  EstimateRow mixture;
  Estimator estimator = Estimator::plain;
  std::optional<RiskEstimate> bayes_risk;
  bool low_ess = false;

  const EstimateRow& row(Hypothesis h) const {
    const auto& r = rows.at(index_of(h));
    if (!r) throw DomainError("EstimateTable: no row for hypothesis " + std::string(name_of(h)));
    return *r;
  }
};

/// The decision that is correct under a raw hypothesis.
constexpr Bit correct_decision(Hypothesis h) noexcept { return h == Hypothesis::f ? 0 : 1; }

namespace detail {

struct Replication {
  std::size_t n = 0;
  bool wrong = false;
  double log_weight = 0.0;  // 0 for plain sampling
  bool overrun = false;
};

inline constexpr std::uint64_t kPlainStream = 0;
inline constexpr std::uint64_t kImportanceStream = 1;

template <class Rng>
Replication run_once(const TestSpec& spec, Hypothesis sample_from, Hypothesis target, bool importance, Rng& rng) {
  Replication rep;
  try {
    if (const auto* two = std::get_if<TwoStageConfig>(&spec)) {
      auto out = run_delta_I(*two, gaussian_source(sample_from, rng, two->model), false);
      rep.n = out.n;
      rep.wrong = out.decision != correct_decision(target);
      if (importance) {
        const auto& ll = out.log_likelihood;
        rep.log_weight = target == Hypothesis::f
                             ? ll[0] - (log_add_exp(ll[1], ll[2]) - std::log(2.0))
                             : ll[index_of(target)] - ll[0];
      }
    } else {
      const auto& inv = std::get<InvariantSprtConfig>(spec);
      auto out = run_invariant_sprt(inv, gaussian_source(sample_from, rng, inv.model), false);
      rep.n = out.n;
      rep.wrong = out.decision != correct_decision(target);
      if (importance) {
        // Either raw alternative induces the folded alternative on |X|.
        const auto& ll = out.log_likelihood;
        rep.log_weight = target == Hypothesis::f ? ll[0] - ll[1] : ll[1] - ll[0];
      }
    }
  } catch (const NonTerminationError& e) {
    rep.n = e.samples();
    rep.overrun = true;
  }
  return rep;
}

/// Runs body(i) for i in [0, count) on `threads` workers; each index is written by exactly one worker.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::vector<Replication> replicate(const McConfig& cfg, Hypothesis target, bool importance) {
  std::vector<Replication> out(cfg.replications);
  const auto h = static_cast<std::uint64_t>(index_of(target));
  const auto stream = importance ? kImportanceStream : kPlainStream;
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
    auto rng = substream(cfg.seed, stream, h, i);
    Hypothesis sample_from = target;
    if (importance) {
      if (target == Hypothesis::f) sample_from = (rng() >> 63) ? Hypothesis::g2 : Hypothesis::g1;
      else sample_from = Hypothesis::f;
    }
    out[i] = run_once(cfg.test, sample_from, target, importance, rng);
  });
  return out;
}

/// Mean and standard error of a sample accumulated in index order.
struct Moments {
  double mean = 0.0;
  std::optional<double> stderr_mean;
};

template <class Get>
Moments moments(const std::vector<Replication>& reps, Get&& get) {
  std::size_t n = 0;
  double sum = 0.0;
  for (const auto& r : reps) {
    if (r.overrun) continue;
    sum += get(r);
    ++n;
  }
  Moments m;
  if (n == 0) return m;
  m.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (const auto& r : reps) {
      if (r.overrun) continue;
      const double d = get(r) - m.mean;
      ss += d * d;
    }
    m.stderr_mean = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return m;
}

inline std::size_t count_overruns(const std::vector<Replication>& reps) {
  return static_cast<std::size_t>(std::count_if(reps.begin(), reps.end(), [](const auto& r) { return r.overrun; }));
}

inline std::optional<double> combine_stderr(const std::array<double, 3>& weights,
                                            const std::array<std::optional<double>, 3>& se) {
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (weights[i] == 0.0) continue;
    if (!se[i]) return std::nullopt;
    v += weights[i] * weights[i] * *se[i] * *se[i];
  }
  return std::sqrt(v);
}

}  // namespace detail

/// Per-hypothesis importance-sampling error estimate.
struct ErrorEstimate {
  double p_error;
  std::optional<double> stderr_p;
  double ess;
  std::size_t overruns;
};

/// Importance-sampling estimates of P_h(wrong decision) for every hypothesis with positive mixture
/// weight. Replications are simulated under the opposite decision class (g1/g2 equally for f, f for
/// g1 and g2) and reweighted by the exact likelihood ratio of the message record.
inline std::array<std::optional<ErrorEstimate>, 3> estimate_error_importance(const McConfig& cfg) {
  cfg.validate();
  if (cfg.estimator != Estimator::importance) throw DomainError("estimate_error_importance: estimator must be importance");
  std::array<std::optional<ErrorEstimate>, 3> out;
  for (Hypothesis h : kRawHypotheses) {
    if (cfg.mixture[index_of(h)] == 0.0) continue;
    const auto reps = detail::replicate(cfg, h, true);
    auto contribution = [](const detail::Replication& r) { return r.wrong ? std::exp(r.log_weight) : 0.0; };
    const auto m = detail::moments(reps, contribution);
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& r : reps) {
      if (r.overrun) continue;
      const double y = contribution(r);
      s1 += y;
      s2 += y * y;
    }
    const double ess = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
    out[index_of(h)] = ErrorEstimate{m.mean, m.stderr_mean, ess, detail::count_overruns(reps)};
  }
  return out;
}

/// Plug-in Bayes risk sum_h pi_h (c E_h N + W_h P_h(wrong)) with a delta-method standard error.
inline RiskEstimate bayes_risk(const EstimateTable& table, double c, const std::array<double, 3>& priors,
                               const std::array<double, 3>& losses) {
  if (!(c >= 0.0)) throw DomainError("bayes_risk: c must be nonnegative");
  RiskEstimate est{0.0, 0.0};
  double var = 0.0;
  for (Hypothesis h : kRawHypotheses) {
    const std::size_t i = index_of(h);
    if (!(priors[i] >= 0.0 && losses[i] >= 0.0)) throw DomainError("bayes_risk: priors and losses must be nonnegative");
    if (priors[i] == 0.0) continue;
    const auto& row = table.row(h);
    est.risk += priors[i] * (c * row.mean_n + losses[i] * row.p_error);
    if (est.stderr_risk) {
      if ((c > 0.0 && !row.stderr_n) || (losses[i] > 0.0 && !row.stderr_p)) {
        est.stderr_risk.reset();
        continue;
      }
      const double sn = row.stderr_n.value_or(0.0);
      const double sp = row.stderr_p.value_or(0.0);
      var += priors[i] * priors[i] * (c * c * sn * sn + losses[i] * losses[i] * sp * sp);
    }
  }
  if (est.stderr_risk) est.stderr_risk = std::sqrt(var);
  return est;
}

/// Monte Carlo table for one test: plain replications for sample sizes, and either plain or
/// importance-sampled error probabilities. Identical configs give identical tables.
inline EstimateTable run_trials(const McConfig& cfg) {
  cfg.validate();
  EstimateTable table;
  table.estimator = cfg.estimator;
  std::array<std::optional<ErrorEstimate>, 3> importance;
  if (cfg.estimator == Estimator::importance) importance = estimate_error_importance(cfg);

  std::array<std::optional<double>, 3> se_n;
  std::array<std::optional<double>, 3> se_p;
  for (Hypothesis h : kRawHypotheses) {
    const std::size_t i = index_of(h);
    if (cfg.mixture[i] == 0.0) continue;
    const auto reps = detail::replicate(cfg, h, false);
    const auto n_m = detail::moments(reps, [](const auto& r) { return static_cast<double>(r.n); });
    EstimateRow row;
    row.mean_n = n_m.mean;
    row.stderr_n = n_m.stderr_mean;
    row.replications = cfg.replications;
    row.overruns = detail::count_overruns(reps);
    if (importance[i]) {
      row.p_error = importance[i]->p_error;
      row.stderr_p = importance[i]->stderr_p;
      row.ess = importance[i]->ess;
      row.overruns += importance[i]->overruns;
      if (row.ess < 0.01 * static_cast<double>(cfg.replications)) table.low_ess = true;
    } else {
      const auto p_m = detail::moments(reps, [](const auto& r) { return r.wrong ? 1.0 : 0.0; });
      row.p_error = p_m.mean;
      row.stderr_p = p_m.stderr_mean;
      row.ess = static_cast<double>(cfg.replications - row.overruns);
    }
    se_n[i] = row.stderr_n;
    se_p[i] = row.stderr_p;
    table.rows[i] = row;
  }

  auto& mix = table.mixture;
  for (Hypothesis h : kRawHypotheses) {
    const std::size_t i = index_of(h);
    if (!table.rows[i]) continue;
    mix.mean_n += cfg.mixture[i] * table.rows[i]->mean_n;
    mix.p_error += cfg.mixture[i] * table.rows[i]->p_error;
    mix.replications += table.rows[i]->replications;
    mix.overruns += table.rows[i]->overruns;
    mix.ess += table.rows[i]->ess;
  }
  mix.stderr_n = detail::combine_stderr(cfg.mixture, se_n);
  mix.stderr_p = detail::combine_stderr(cfg.mixture, se_p);
  table.bayes_risk = bayes_risk(table, sampling_cost(cfg.test), cfg.mixture, raw_losses(cfg.test));
  return table;
}

}  // namespace seqdet

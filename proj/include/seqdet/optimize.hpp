#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"
#include "seqdet/info.hpp"
#include "seqdet/quantizer.hpp"

namespace seqdet {

struct OptimizationResult {
  RandomQuantizer quantizer;
  double objective;
  double grid_resolution;
  bool refined;
};

// ---------------------------------------------------------------------------
// Generic 1-d search helpers
// ---------------------------------------------------------------------------

/// Points k*step for integer k with lo <= k*step <= hi. Integer indexing keeps 0 exact.
inline std::vector<double> lattice(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw DomainError("lattice: bad range");
  const auto first = static_cast<long>(std::ceil(lo / step - 1e-9));
  const auto last = static_cast<long>(std::floor(hi / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, last - first + 1)));
  for (long k = first; k <= last; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

/// Golden-section search for a maximum of a unimodal function on [a, b]. Returns the midpoint of the
/// final bracket, whose width is at most `tol`.
template <class F>
double golden_section_maximize(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Grid maximization followed by golden-section refinement in the neighbouring cells.
/// Ties on the grid go to the first point in `points` order.
template <class F>
std::pair<double, double> grid_then_golden_maximize(F&& f, const std::vector<double>& points, double step, double tol,
                                                    double lo, double hi) {
  double best_x = points.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (double x : points) {
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double a = std::max(lo, best_x - step);
  const double b = std::min(hi, best_x + step);
  const double x = golden_section_maximize(f, a, b, tol);
  const double v = f(x);
  if (v > best_v) return {x, v};
  return {best_x, best_v};
}

// ---------------------------------------------------------------------------
// Single-alternative thresholds
// ---------------------------------------------------------------------------

inline constexpr double kThresholdGridLo = -5.0;
inline constexpr double kThresholdGridHi = 5.0;
inline constexpr double kThresholdGridStep = 1e-3;
inline constexpr double kGoldenWidth = 1e-6;

/// Threshold quantizer I(X >= lambda) maximizing I(target, f), target in {g1, g2}.
inline OptimizationResult optimize_threshold(Hypothesis target, const GaussianModel& model = GaussianModel{}) {
  if (target != Hypothesis::g1 && target != Hypothesis::g2)
    throw DomainError("optimize_threshold: target must be g1 or g2");
  auto objective = [&](double lambda) {
    return quantizer_kl(DeterministicQuantizer::threshold(lambda), target, Hypothesis::f, model);
  };
  const auto grid = lattice(kThresholdGridLo, kThresholdGridHi, kThresholdGridStep);
  const auto [lambda, value] = grid_then_golden_maximize(objective, grid, kThresholdGridStep, kGoldenWidth,
                                                         kThresholdGridLo, kThresholdGridHi);
  return {DeterministicQuantizer::threshold(lambda), value, kThresholdGridStep, true};
}

// ---------------------------------------------------------------------------
// Null-hypothesis maximin quantizer
// ---------------------------------------------------------------------------

struct MaximinOptions {
  double lo = -4.0;
  double hi = 4.0;
  double coarse_step = 1e-2;
  double fine_step = 1e-4;
  bool thresholds = true;
  bool intervals = true;
  bool randomizations = true;
};

/// Best candidate of one search family.
struct FamilyBest {
  RandomQuantizer quantizer;
  Nats objective;
  Nats arm_g1;  // I(f, g1)
  Nats arm_g2;  // I(f, g2)
};

struct MaximinReport {
  OptimizationResult best;
  std::optional<FamilyBest> threshold;
  std::optional<FamilyBest> interval;
  std::optional<FamilyBest> randomized;
  std::size_t pareto_size = 0;
};

namespace detail {

/// Deterministic ULQ candidate with its two f-arms.
struct Candidate {
  DeterministicQuantizer q;
  Nats a;  // I(f, g1)
  Nats b;  // I(f, g2)
};

inline std::optional<Candidate> make_candidate(const DeterministicQuantizer& q, const GaussianModel& model) {
  const double pf = induced_prob(q, Hypothesis::f, model).p1;
  const double p1 = induced_prob(q, Hypothesis::g1, model).p1;
  const double p2 = induced_prob(q, Hypothesis::g2, model).p1;
  for (double p : {pf, p1, p2})
    if (p < kDegenerateChannelTol || p > 1.0 - kDegenerateChannelTol) return std::nullopt;
  return Candidate{q, kl_bernoulli(pf, p1), kl_bernoulli(pf, p2)};
}

/// Best mixing weight for p*x + (1-p)*y maximizing min of the two arms.
struct PairMix {
  double p;  // weight on x
  Nats value;
};

inline PairMix best_mix(const Candidate& x, const Candidate& y) {
  auto value_at = [&](double p) {
    return std::min(p * x.a + (1.0 - p) * y.a, p * x.b + (1.0 - p) * y.b);
  };
  PairMix best{1.0, value_at(1.0)};
  if (const double v0 = value_at(0.0); v0 > best.value) best = {0.0, v0};
  // arm_g1(p) = (x.a - y.a) p + y.a, arm_g2(p) = (x.b - y.b) p + y.b
  const double denom = (x.a - y.a) - (x.b - y.b);
  if (denom != 0.0) {
    const double p = (y.b - y.a) / denom;
    if (p > 0.0 && p < 1.0) {
      if (const double v = value_at(p); v > best.value) best = {p, v};
    }
  }
  return best;
}

inline FamilyBest as_family_best(const Candidate& c) {
  return {RandomQuantizer(c.q), std::min(c.a, c.b), c.a, c.b};
}

inline FamilyBest as_family_best(const Candidate& x, const Candidate& y, const PairMix& m) {
  if (m.p >= 1.0) return as_family_best(x);
  if (m.p <= 0.0) return as_family_best(y);
  RandomQuantizer rq({{x.q, m.p}, {y.q, 1.0 - m.p}});
  const Nats a = m.p * x.a + (1.0 - m.p) * y.a;
  const Nats b = m.p * x.b + (1.0 - m.p) * y.b;
  return {rq, std::min(a, b), a, b};
}

/// Upper-right Pareto frontier: points not weakly dominated in both arms.
inline std::vector<Candidate> pareto_frontier(std::vector<Candidate> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const Candidate& l, const Candidate& r) {
    if (l.a != r.a) return l.a > r.a;
    return l.b > r.b;
  });
  std::vector<Candidate> out;
  double best_b = -1.0;
  for (const auto& c : pts) {
    if (c.b > best_b) {
      out.push_back(c);
      best_b = c.b;
    }
  }
  return out;
}

// Threshold tie-break: smaller |lambda| then smaller lambda.
inline std::vector<double> ordered_by_magnitude(std::vector<double> xs) {
  std::stable_sort(xs.begin(), xs.end(), [](double l, double r) {
    if (std::abs(l) != std::abs(r)) return std::abs(l) < std::abs(r);
    return l < r;
  });
  return xs;
}

inline void keep_better(std::optional<Candidate>& incumbent, const std::optional<Candidate>& c) {
  if (!c) return;
  if (!incumbent || std::min(c->a, c->b) > std::min(incumbent->a, incumbent->b)) incumbent = c;
}

}  // namespace detail

/// Searches thresholds, intervals and two-component randomizations of them for the quantizer
/// maximizing min{I(f,g1), I(f,g2)}; returns per-family incumbents alongside the overall winner.
inline MaximinReport optimize_maximin_f_report(const MaximinOptions& opt = MaximinOptions{},
                                               const GaussianModel& model = GaussianModel{}) {
  using detail::Candidate;
  const auto grid = lattice(opt.lo, opt.hi, opt.coarse_step);
  MaximinReport report{{RandomQuantizer(DeterministicQuantizer::threshold(0.0)), 0.0, opt.fine_step, true},
                       std::nullopt, std::nullopt, std::nullopt, 0};

  std::vector<Candidate> pool;
  std::optional<Candidate> best_threshold;
  std::optional<Candidate> best_interval;

  if (opt.thresholds || opt.randomizations) {
    for (double x : detail::ordered_by_magnitude(grid)) {
      auto c = detail::make_candidate(DeterministicQuantizer::threshold(x), model);
      if (!c) continue;
      pool.push_back(*c);
      if (opt.thresholds) detail::keep_better(best_threshold, c);
    }
  }
  if (opt.intervals || opt.randomizations) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        auto c = detail::make_candidate(DeterministicQuantizer::interval(grid[i], grid[j]), model);
        if (!c) continue;
        pool.push_back(*c);
        if (opt.intervals) detail::keep_better(best_interval, c);
      }
    }
  }

  // Refinement around the coarse incumbents.
  if (best_threshold) {
    const double centre = std::get<Threshold>(best_threshold->q.variant()).lambda;
    for (double x : detail::ordered_by_magnitude(lattice(centre - opt.coarse_step, centre + opt.coarse_step,
                                                         opt.fine_step)))
      detail::keep_better(best_threshold, detail::make_candidate(DeterministicQuantizer::threshold(x), model));
    report.threshold = detail::as_family_best(*best_threshold);
  }
  if (best_interval) {
    const auto iv = std::get<Interval>(best_interval->q.variant());
    const auto los = lattice(iv.lo - opt.coarse_step, iv.lo + opt.coarse_step, opt.fine_step);
    const auto his = lattice(iv.hi - opt.coarse_step, iv.hi + opt.coarse_step, opt.fine_step);
    for (double lo : los)
      for (double hi : his)
        if (lo < hi)
          detail::keep_better(best_interval, detail::make_candidate(DeterministicQuantizer::interval(lo, hi), model));
    report.interval = detail::as_family_best(*best_interval);
  }

  if (best_threshold) pool.push_back(*best_threshold);
  if (best_interval) pool.push_back(*best_interval);

  if (opt.randomizations && !pool.empty()) {
    // Replacing a component by one that dominates it in both arms never lowers the mixture's
    // minimum, so only frontier points need pairing.
    const auto frontier = detail::pareto_frontier(pool);
    report.pareto_size = frontier.size();
    std::optional<FamilyBest> best;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (std::size_t j = i + 1; j < frontier.size(); ++j) {
        const auto mix = detail::best_mix(frontier[i], frontier[j]);
        if (!best || mix.value > best->objective)
          best = detail::as_family_best(frontier[i], frontier[j], mix);
      }
    }
    if (frontier.size() == 1) best = detail::as_family_best(frontier.front());
    report.randomized = best;
  }

  // Simpler families win ties: threshold, then interval, then randomized.
  const FamilyBest* winner = nullptr;
  for (const auto* fam : {&report.threshold, &report.interval, &report.randomized}) {
    if (!fam->has_value()) continue;
    if (!winner || (*fam)->objective > winner->objective + 1e-12) winner = &**fam;
  }
  if (!winner) throw DomainError("optimize_maximin_f: every search family is disabled");
  report.best = {winner->quantizer, maximin_objective(winner->quantizer, model), opt.fine_step, true};
  return report;
}

inline OptimizationResult optimize_maximin_f(const MaximinOptions& opt = MaximinOptions{},
                                             const GaussianModel& model = GaussianModel{}) {
  return optimize_maximin_f_report(opt, model).best;
}

// ---------------------------------------------------------------------------
// Invariant stationary quantizer I(|X| <= lambda)
// ---------------------------------------------------------------------------

inline constexpr double kInvariantGridHi = 5.0;
inline constexpr double kInvariantGridStep = 1e-3;

/// prior_f / I(f~, g~) + prior_g / I(g~, f~) for the quantizer I(|X| <= lambda). Terms with zero
/// prior weight are dropped.
inline double invariant_objective(double lambda, double prior_f, double prior_g,
                                  const GaussianModel& model = GaussianModel{}) {
  const auto q = DeterministicQuantizer::absolute(lambda);
  double value = 0.0;
  if (prior_f > 0.0) value += prior_f / quantizer_kl(q, Hypothesis::folded_f, Hypothesis::folded_g, model);
  if (prior_g > 0.0) value += prior_g / quantizer_kl(q, Hypothesis::folded_g, Hypothesis::folded_f, model);
  return value;
}

inline OptimizationResult optimize_invariant_lambda(double prior_f, double prior_g,
                                                    const GaussianModel& model = GaussianModel{}) {
  if (!(prior_f >= 0.0 && prior_g >= 0.0) || std::abs(prior_f + prior_g - 1.0) > 1e-9)
    throw DomainError("optimize_invariant_lambda: priors must be nonnegative and sum to 1");
  auto neg = [&](double lambda) { return -invariant_objective(lambda, prior_f, prior_g, model); };
  const auto grid = lattice(kInvariantGridStep, kInvariantGridHi, kInvariantGridStep);
  const auto [lambda, value] =
      grid_then_golden_maximize(neg, grid, kInvariantGridStep, kGoldenWidth, kInvariantGridStep, kInvariantGridHi);
  return {DeterministicQuantizer::absolute(lambda), -value, kInvariantGridStep, true};
}

}  // namespace seqdet

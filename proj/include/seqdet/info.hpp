#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"
#include "seqdet/quantizer.hpp"

namespace seqdet {

/// K-L numbers are in nats.
using Nats = double;

/// Induced probabilities closer than this to 0 or 1 make the binary channel numerically degenerate.
inline constexpr double kDegenerateChannelTol = 1e-15;

/// D(Bern(p) || Bern(q)) with the convention 0 log 0 = 0.
inline Nats kl_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0))
    throw DomainError("kl_bernoulli: arguments must be probabilities");
  auto term = [](double a, double b) -> double {
    if (a == 0.0) return 0.0;
    if (b == 0.0) throw InfiniteInformationError("kl_bernoulli: reference channel assigns zero mass");
    return a * std::log(a / b);
  };
  const double kl = term(p, q) + term(1.0 - p, 1.0 - q);
  return std::max(kl, 0.0);
}

namespace detail {

inline void require_same_model(Hypothesis from, Hypothesis to) {
  if (from == to) throw DomainError("K-L number needs two distinct hypotheses");
  if (is_folded(from) != is_folded(to)) throw DomainError("K-L number across raw and folded models");
}

inline void require_nondegenerate(double p, const DeterministicQuantizer& q, Hypothesis h) {
  if (p < kDegenerateChannelTol || p > 1.0 - kDegenerateChannelTol)
    throw InfiniteInformationError("degenerate quantizer " + q.describe() + ": message is constant under " +
                                   std::string(name_of(h)));
}

}  // namespace detail

/// I^q(from, to) for a deterministic quantizer.
inline Nats quantizer_kl(const DeterministicQuantizer& q, Hypothesis from, Hypothesis to,
                         const GaussianModel& model = GaussianModel{}) {
  detail::require_same_model(from, to);
  const double p = induced_prob(q, from, model).p1;
  const double r = induced_prob(q, to, model).p1;
  detail::require_nondegenerate(p, q, from);
  detail::require_nondegenerate(r, q, to);
  return kl_bernoulli(p, r);
}

/// Weight-convex combination of component K-L numbers.
inline Nats random_quantizer_kl(const RandomQuantizer& rq, Hypothesis from, Hypothesis to,
                                const GaussianModel& model = GaussianModel{}) {
  Nats total = 0.0;
  for (const auto& c : rq.components()) total += c.weight * quantizer_kl(c.quantizer, from, to, model);
  return total;
}

/// min{ I(f, g1), I(f, g2) }.
inline Nats maximin_objective(const RandomQuantizer& rq, const GaussianModel& model = GaussianModel{}) {
  return std::min(random_quantizer_kl(rq, Hypothesis::f, Hypothesis::g1, model),
                  random_quantizer_kl(rq, Hypothesis::f, Hypothesis::g2, model));
}

}  // namespace seqdet

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "seqdet/errors.hpp"
#include "seqdet/quantizer.hpp"

namespace seqdet {

/// log(exp(a) + exp(b)) without overflow; -inf inputs are allowed.
inline double log_add_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Posterior masses over K hypotheses, stored as normalized log masses.
template <std::size_t K>
class PosteriorState {
 public:
  explicit PosteriorState(const std::array<double, K>& prior) {
    double total = 0.0;
    for (double p : prior) {
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("PosteriorState: masses must be probabilities");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("PosteriorState: masses must sum to 1");
    for (std::size_t i = 0; i < K; ++i) log_mass_[i] = std::log(prior[i]);
    normalize();
  }

  static PosteriorState uniform() {
    std::array<double, K> p;
    p.fill(1.0 / static_cast<double>(K));
    return PosteriorState(p);
  }

  std::size_t n() const noexcept { return n_; }
  const std::array<double, K>& log_masses() const noexcept { return log_mass_; }
  double mass(std::size_t i) const { return std::exp(log_mass_.at(i)); }

  std::array<double, K> masses() const {
    std::array<double, K> out;
    for (std::size_t i = 0; i < K; ++i) out[i] = std::exp(log_mass_[i]);
    return out;
  }

  /// Index of the largest mass; ties go to the lowest index.
  std::size_t argmax() const noexcept {
    return static_cast<std::size_t>(std::max_element(log_mass_.begin(), log_mass_.end()) - log_mass_.begin());
  }

  /// Bayes update with per-hypothesis log message probabilities of the received bit.
  void absorb(const std::array<double, K>& log_prob_of_bit) {
    std::array<double, K> next;
    for (std::size_t i = 0; i < K; ++i) next[i] = log_mass_[i] + log_prob_of_bit[i];
    if (std::all_of(next.begin(), next.end(), [](double v) { return std::isinf(v) && v < 0; }))
      throw DegenerateUpdateError("posterior update: every hypothesis assigns zero probability to the message");
    log_mass_ = next;
    normalize();
    ++n_;
  }

 private:
  void normalize() {
    double z = -std::numeric_limits<double>::infinity();
    for (double v : log_mass_) z = log_add_exp(z, v);
    for (double& v : log_mass_) v -= z;
  }

  std::array<double, K> log_mass_{};
  std::size_t n_ = 0;
};

/// pi_{h,n} proportional to pi_{h,n-1} * P_h(U_n = bit).
template <std::size_t K>
PosteriorState<K> posterior_update(PosteriorState<K> s, Bit bit, const std::array<InducedBernoulli, K>& probs) {
  std::array<double, K> lp;
  for (std::size_t i = 0; i < K; ++i) lp[i] = std::log(probs[i].prob(bit));
  s.absorb(lp);
  return s;
}

}  // namespace seqdet

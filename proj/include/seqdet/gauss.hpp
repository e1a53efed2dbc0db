#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "seqdet/errors.hpp"

namespace seqdet {

/// States of nature. The first three belong to the raw model N(0,1), N(-mu,1), N(mu,1);
/// the folded pair describes |X| under the null and under either alternative.
enum class Hypothesis { f, g1, g2, folded_f, folded_g };

inline constexpr std::array<Hypothesis, 3> kRawHypotheses{Hypothesis::f, Hypothesis::g1, Hypothesis::g2};
inline constexpr std::array<Hypothesis, 2> kFoldedHypotheses{Hypothesis::folded_f, Hypothesis::folded_g};

constexpr bool is_folded(Hypothesis h) noexcept {
  return h == Hypothesis::folded_f || h == Hypothesis::folded_g;
}

/// Position of a hypothesis inside its own model (f=0, g1=1, g2=2; folded_f=0, folded_g=1).
constexpr std::size_t index_of(Hypothesis h) noexcept {
  switch (h) {
    case Hypothesis::f: return 0;
    case Hypothesis::g1: return 1;
    case Hypothesis::g2: return 2;
    case Hypothesis::folded_f: return 0;
    case Hypothesis::folded_g: return 1;
  }
  return 0;
}

constexpr std::string_view name_of(Hypothesis h) noexcept {
  switch (h) {
    case Hypothesis::f: return "f";
    case Hypothesis::g1: return "g1";
    case Hypothesis::g2: return "g2";
    case Hypothesis::folded_f: return "f~";
    case Hypothesis::folded_g: return "g~";
  }
  return "?";
}

inline Hypothesis parse_hypothesis(std::string_view s) {
  if (s == "f") return Hypothesis::f;
  if (s == "g1") return Hypothesis::g1;
  if (s == "g2") return Hypothesis::g2;
  if (s == "f~" || s == "folded_f") return Hypothesis::folded_f;
  if (s == "g~" || s == "folded_g") return Hypothesis::folded_g;
  throw DomainError("unknown hypothesis label '" + std::string(s) + "'");
}

inline double std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

/// Upper tail 1 - Phi(x), accurate far into the tail.
inline double std_normal_sf(double x) { return std_normal_cdf(-x); }

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// P(a <= Z <= b) for standard normal Z, computed on the side that avoids cancellation.
inline double std_normal_mass(double a, double b) {
  if (a >= b) return 0.0;
  if (a > 0.0) return std_normal_sf(a) - std_normal_sf(b);
  return std_normal_cdf(b) - std_normal_cdf(a);
}

/// Three Gaussian states with unit variance: f = N(0,1), g1 = N(-shift,1), g2 = N(shift,1).
class GaussianModel {
 public:
  explicit GaussianModel(double shift = 1.0) : shift_(shift) {
    if (!(std::isfinite(shift) && shift > 0.0))
      throw DomainError("GaussianModel: alternative mean must be finite and positive");
  }

  double shift() const noexcept { return shift_; }
  static constexpr double variance() noexcept { return 1.0; }

  /// Mean of a raw hypothesis. Folded labels have no single mean.
  double mean(Hypothesis h) const {
    switch (h) {
      case Hypothesis::f: return 0.0;
      case Hypothesis::g1: return -shift_;
      case Hypothesis::g2: return shift_;
      default: throw DomainError("GaussianModel::mean: folded hypothesis has no mean");
    }
  }

  double density(double x, Hypothesis h) const {
    if (is_folded(h)) {
      auto [ff, gg] = folded_densities(x);
      return h == Hypothesis::folded_f ? ff : gg;
    }
    return std_normal_pdf(x - mean(h));
  }

  /// Densities of |X| under the null and under the symmetric alternative.
  std::pair<double, double> folded_densities(double x) const {
    if (!(x >= 0.0)) throw DomainError("folded_densities: argument must be nonnegative");
    return {2.0 * std_normal_pdf(x), std_normal_pdf(x - shift_) + std_normal_pdf(x + shift_)};
  }

  /// P(lo <= |X| <= hi) under a folded hypothesis, lo >= 0.
  double folded_mass(double lo, double hi, Hypothesis h) const {
    if (!is_folded(h)) throw DomainError("folded_mass: expects a folded hypothesis");
    const double m = h == Hypothesis::folded_f ? 0.0 : shift_;
    return std_normal_mass(lo - m, hi - m) + std_normal_mass(-hi - m, -lo - m);
  }

  friend bool operator==(const GaussianModel&, const GaussianModel&) = default;

 private:
  double shift_;
};

inline std::pair<double, double> folded_densities(double x) { return GaussianModel{}.folded_densities(x); }

}  // namespace seqdet

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"

namespace seqdet {

using Bit = std::uint8_t;

enum class Direction { ge, lt };

/// I(X >= lambda) for Direction::ge, I(X < lambda) for Direction::lt.
struct Threshold {
  double lambda = 0.0;
  Direction direction = Direction::ge;
  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Emits `inside_bit` on the closed interval [lo, hi] and its complement elsewhere.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  Bit inside_bit = 1;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Emits `inside_bit` when |X| <= lambda.
struct Absolute {
  double lambda = 0.0;
  Bit inside_bit = 1;
  friend bool operator==(const Absolute&, const Absolute&) = default;
};

/// Binary quantizer from a raw observation to a message bit.
class DeterministicQuantizer {
 public:
  using Variant = std::variant<Threshold, Interval, Absolute>;

  static DeterministicQuantizer threshold(double lambda, Direction dir = Direction::ge) {
    require_finite(lambda, "threshold");
    return DeterministicQuantizer(Threshold{lambda, dir});
  }

  static DeterministicQuantizer interval(double lo, double hi, Bit inside_bit = 1) {
    require_finite(lo, "interval");
    require_finite(hi, "interval");
    if (!(lo < hi)) throw DomainError("interval quantizer requires lo < hi");
    check_bit(inside_bit);
    return DeterministicQuantizer(Interval{lo, hi, inside_bit});
  }

  static DeterministicQuantizer absolute(double lambda, Bit inside_bit = 1) {
    require_finite(lambda, "absolute");
    if (lambda < 0.0) throw DomainError("absolute quantizer requires lambda >= 0");
    check_bit(inside_bit);
    return DeterministicQuantizer(Absolute{lambda, inside_bit});
  }

  const Variant& variant() const noexcept { return v_; }

  bool is_absolute() const noexcept { return std::holds_alternative<Absolute>(v_); }

  Bit apply(double x) const {
    if (!std::isfinite(x)) throw DomainError("quantizer applied to a non-finite observation");
    return apply_unchecked(x);
  }

  /// Same as apply() without the finiteness check; used on the simulation hot path.
  Bit apply_unchecked(double x) const noexcept {
    return std::visit(
        [x](const auto& q) -> Bit {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, Threshold>) {
            return q.direction == Direction::ge ? Bit(x >= q.lambda) : Bit(x < q.lambda);
          } else if constexpr (std::is_same_v<T, Interval>) {
            const bool inside = q.lo <= x && x <= q.hi;
            return inside ? q.inside_bit : Bit(1 - q.inside_bit);
          } else {
            const bool inside = std::abs(x) <= q.lambda;
            return inside ? q.inside_bit : Bit(1 - q.inside_bit);
          }
        },
        v_);
  }

  /// The bit-flipped quantizer.
  DeterministicQuantizer complement() const {
    return std::visit(
        [](const auto& q) -> DeterministicQuantizer {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, Threshold>) {
            return DeterministicQuantizer(
                Threshold{q.lambda, q.direction == Direction::ge ? Direction::lt : Direction::ge});
          } else {
            T flipped = q;
            flipped.inside_bit = Bit(1 - q.inside_bit);
            return DeterministicQuantizer(flipped);
          }
        },
        v_);
  }

  /// Breakpoints in x (used to exclude the boundary set in grid checks).
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& q) -> std::vector<double> {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, Threshold>) return {q.lambda};
          else if constexpr (std::is_same_v<T, Interval>) return {q.lo, q.hi};
          else return {-q.lambda, q.lambda};
        },
        v_);
  }

  std::string describe() const;

  friend bool operator==(const DeterministicQuantizer&, const DeterministicQuantizer&) = default;

 private:
  explicit DeterministicQuantizer(Variant v) : v_(v) {}

  static void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " quantizer: non-finite breakpoint");
  }
  static void check_bit(Bit b) {
    if (b > 1) throw DomainError("quantizer bit must be 0 or 1");
  }

  Variant v_;
};

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string DeterministicQuantizer::describe() const {
  return std::visit(
      [](const auto& q) -> std::string {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Threshold>) {
          return q.direction == Direction::ge ? "I(X>=" + format_real(q.lambda) + ")"
                                              : "I(X<" + format_real(q.lambda) + ")";
        } else if constexpr (std::is_same_v<T, Interval>) {
          std::string s = "I(" + format_real(q.lo) + "<=X<=" + format_real(q.hi) + ")";
          return q.inside_bit ? s : "1-" + s;
        } else {
          std::string s = "I(|X|<=" + format_real(q.lambda) + ")";
          return q.inside_bit ? s : "1-" + s;
        }
      },
      v_);
}

/// Probability that the message equals 1 under a hypothesis.
struct InducedBernoulli {
  double p1 = 0.0;
  double p0() const noexcept { return 1.0 - p1; }
  double prob(Bit b) const noexcept { return b ? p1 : 1.0 - p1; }
};

/// Exact P_h(q(X) = 1). Raw-line quantizers pair with raw labels and absolute quantizers with
/// folded labels; any other combination is a domain error.
inline InducedBernoulli induced_prob(const DeterministicQuantizer& q, Hypothesis h,
                                     const GaussianModel& model = GaussianModel{}) {
  if (q.is_absolute() != is_folded(h))
    throw DomainError("induced_prob: quantizer kind does not match the hypothesis model of '" +
                      std::string(name_of(h)) + "'");
  return std::visit(
      [&](const auto& v) -> InducedBernoulli {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Threshold>) {
          const double upper = std_normal_sf(v.lambda - model.mean(h));
          return {v.direction == Direction::ge ? upper : std_normal_cdf(v.lambda - model.mean(h))};
        } else if constexpr (std::is_same_v<T, Interval>) {
          const double m = model.mean(h);
          const double inside = std_normal_mass(v.lo - m, v.hi - m);
          return {v.inside_bit ? inside : 1.0 - inside};
        } else {
          const double inside = model.folded_mass(0.0, v.lambda, h);
          return {v.inside_bit ? inside : 1.0 - inside};
        }
      },
      q.variant());
}

/// Finite randomization over deterministic quantizers; the fusion center knows which component
/// produced each message.
class RandomQuantizer {
 public:
  struct Component {
    DeterministicQuantizer quantizer;
    double weight;
  };

  explicit RandomQuantizer(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw DomainError("RandomQuantizer: needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight > 0.0 && c.weight <= 1.0))
        throw DomainError("RandomQuantizer: weights must lie in (0, 1]");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("RandomQuantizer: weights must sum to 1");
  }

  RandomQuantizer(const DeterministicQuantizer& q)  // NOLINT: a deterministic quantizer is a point mass
      : components_{{q, 1.0}} {}

  const std::vector<Component>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }
  bool is_deterministic() const noexcept { return components_.size() == 1; }

  std::string describe() const {
    if (is_deterministic()) return components_.front().quantizer.describe();
    std::string s;
    for (const auto& c : components_) {
      if (!s.empty()) s += " + ";
      s += format_real(c.weight) + "*" + c.quantizer.describe();
    }
    return s;
  }

 private:
  std::vector<Component> components_;
};

/// Component-wise induced probabilities (never the mixed channel).
inline std::vector<InducedBernoulli> induced_prob(const RandomQuantizer& rq, Hypothesis h,
                                                  const GaussianModel& model = GaussianModel{}) {
  std::vector<InducedBernoulli> out;
  out.reserve(rq.size());
  for (const auto& c : rq.components()) out.push_back(induced_prob(c.quantizer, h, model));
  return out;
}

/// (q0, q1) rows under f, g1, g2.
struct QVector {
  std::array<std::array<double, 2>, 3> rows{};

  const std::array<double, 2>& operator[](Hypothesis h) const { return rows.at(index_of(h)); }
};

inline QVector q_vector(const DeterministicQuantizer& q, const GaussianModel& model = GaussianModel{}) {
  QVector out;
  for (Hypothesis h : kRawHypotheses) {
    const double p1 = induced_prob(q, h, model).p1;
    out.rows[index_of(h)] = {1.0 - p1, p1};
  }
  return out;
}

/// Likelihood coordinates v_i = (g_i/f) / (1 + g1/f + g2/f).
struct VPoint {
  double v1;
  double v2;
};

inline VPoint v_functions(double x, const GaussianModel& model = GaussianModel{}) {
  if (!std::isfinite(x)) throw DomainError("v_functions: non-finite argument");
  const double mu = model.shift();
  // log(g1/f) and log(g2/f)
  const double l1 = -mu * x - 0.5 * mu * mu;
  const double l2 = mu * x - 0.5 * mu * mu;
  const double v1 = 1.0 / (1.0 + std::exp(-l1) + std::exp(l2 - l1));
  const double v2 = 1.0 / (1.0 + std::exp(-l2) + std::exp(l1 - l2));
  return {v1, v2};
}

/// Coefficients of the half-plane a0 + a1*v1 + a2*v2 > 0.
struct UlqCoefficients {
  double a0;
  double a1;
  double a2;

  double eval(const VPoint& v) const noexcept { return a0 + a1 * v.v1 + a2 * v.v2; }
};

namespace detail {

inline constexpr double kUlqGridLo = -8.0;
inline constexpr double kUlqGridHi = 8.0;
inline constexpr double kUlqGridStep = 1e-3;

// Line through two points of the v-plane, oriented so `positive_at` evaluates > 0.
inline UlqCoefficients line_through(VPoint a, VPoint b, VPoint positive_at) {
  // (b - a) x (v - a)
  const double dx = b.v1 - a.v1;
  const double dy = b.v2 - a.v2;
  UlqCoefficients c{-(dx * a.v2 - dy * a.v1), -dy, dx};
  if (c.eval(positive_at) < 0.0) c = {-c.a0, -c.a1, -c.a2};
  return c;
}

}  // namespace detail

/// Grid check that an arbitrary indicator coincides with I(a0 + a1*v1 + a2*v2 > 0) on [-8, 8]
/// (step 1e-3), ignoring points on the separating line and within 1e-9 of `breaks`.
template <class Indicator>
bool is_ulq_form(Indicator&& indicator, std::span<const double> breaks, const UlqCoefficients& a,
                 const GaussianModel& model = GaussianModel{}) {
  if (a.a0 == 0.0 && a.a1 == 0.0 && a.a2 == 0.0) throw DomainError("is_ulq_form: all coefficients zero");
  const double scale = std::abs(a.a0) + std::abs(a.a1) + std::abs(a.a2);
  const auto steps = static_cast<long>(std::lround((detail::kUlqGridHi - detail::kUlqGridLo) / detail::kUlqGridStep));
  for (long i = 0; i <= steps; ++i) {
    const double x = detail::kUlqGridLo + static_cast<double>(i) * detail::kUlqGridStep;
    bool near_break = false;
    for (double b : breaks) near_break |= std::abs(x - b) < 1e-9;
    if (near_break) continue;
    const double s = a.eval(v_functions(x, model));
    if (std::abs(s) <= 1e-13 * scale) continue;
    if (Bit(s > 0.0) != Bit(indicator(x))) return false;
  }
  return true;
}

/// is_ulq_form for a deterministic quantizer.
inline bool is_ulq_form(const DeterministicQuantizer& q, const UlqCoefficients& a,
                        const GaussianModel& model = GaussianModel{}) {
  if (q.is_absolute()) {
    // |X| quantizers are interval quantizers on the raw line.
    const auto& abs = std::get<Absolute>(q.variant());
    if (abs.lambda == 0.0) return false;
    return is_ulq_form(DeterministicQuantizer::interval(-abs.lambda, abs.lambda, abs.inside_bit), a, model);
  }
  const auto breaks = q.breakpoints();
  return is_ulq_form([&](double x) { return q.apply(x); }, std::span<const double>(breaks), a, model);
}

/// A separating line for a threshold or interval quantizer: the chord through the breakpoint
/// images (or through the breakpoint image and the curve's limit point) of the concave curve
/// x -> (v1(x), v2(x)).
inline UlqCoefficients ulq_coefficients(const DeterministicQuantizer& q, const GaussianModel& model = GaussianModel{}) {
  return std::visit(
      [&](const auto& v) -> UlqCoefficients {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Threshold>) {
          const VPoint at = v_functions(v.lambda, model);
          const VPoint limit{0.0, 1.0};  // x -> +inf
          // Points with x > lambda are on the "1" side for I(X >= lambda).
          const Bit right_bit = v.direction == Direction::ge ? 1 : 0;
          UlqCoefficients c = detail::line_through(at, limit, v_functions(v.lambda + 1.0, model));
          if (!right_bit) c = {-c.a0, -c.a1, -c.a2};
          return c;
        } else if constexpr (std::is_same_v<T, Interval>) {
          const VPoint lo = v_functions(v.lo, model);
          const VPoint hi = v_functions(v.hi, model);
          UlqCoefficients c = detail::line_through(lo, hi, v_functions(0.5 * (v.lo + v.hi), model));
          if (!v.inside_bit) c = {-c.a0, -c.a1, -c.a2};
          return c;
        } else {
          return ulq_coefficients(DeterministicQuantizer::interval(-v.lambda, v.lambda, v.inside_bit), model);
        }
      },
      q.variant());
}

}  // namespace seqdet

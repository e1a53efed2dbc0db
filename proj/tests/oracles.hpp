#pragma once

// Test-only reference computations. Nothing here calls into the library's numeric paths.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

/// Phi(x) = 1/2 + phi(x) * sum_n x^(2n+1) / (2n+1)!!, summed in long double.
inline double normal_cdf(double xd) {
  const long double x = xd;
  const long double pdf = std::exp(-0.5L * x * x) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 2000; ++n) {
    term *= x * x / static_cast<long double>(2 * n + 1);
    sum += term;
    if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
  }
  return static_cast<double>(0.5L + pdf * sum);
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double kl(double p, double q) { return p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q)); }

/// P(U=1) under f, g1, g2 for I(X >= lambda).
inline std::array<double, 3> threshold_probs(double lambda) {
  return {1 - normal_cdf(lambda), 1 - normal_cdf(lambda + 1), 1 - normal_cdf(lambda - 1)};
}

/// P(|X| <= lambda) under f~ and g~.
inline std::array<double, 2> folded_probs(double lambda) {
  return {normal_cdf(lambda) - normal_cdf(-lambda), normal_cdf(lambda - 1) - normal_cdf(-lambda - 1)};
}

/// Composite Simpson rule.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Posterior by direct products of likelihoods (no logs, no renormalization until the end).
template <std::size_t K>
std::array<double, K> posterior_by_products(std::array<double, K> prior, const std::vector<int>& bits,
                                            const std::array<double, K>& p1) {
  for (int b : bits)
    for (std::size_t i = 0; i < K; ++i) prior[i] *= b ? p1[i] : 1 - p1[i];
  double z = 0;
  for (double v : prior) z += v;
  for (double& v : prior) v /= z;
  return prior;
}

struct ExactRun {
  double expected_n = 0;
  double p_decide_0 = 0;
  double p_decide_1 = 0;
};

/// Exact E(N) and decision probabilities of the stationary SPRT on I(|X| <= lambda), by forward
/// propagation of the distribution of the number of ones.
inline ExactRun invariant_sprt_exact(double lambda, double c, std::array<double, 2> priors, bool truth_is_null,
                                     double prune = 1e-18) {
  const auto p = folded_probs(lambda);
  const double p_true = truth_is_null ? p[0] : p[1];
  const double up = std::log(p[0] / p[1]);
  const double down = std::log((1 - p[0]) / (1 - p[1]));
  const double start = std::log(priors[0] / priors[1]);
  const double hi = std::log(1 / c);
  const double lo = std::log(c);
  ExactRun r;
  std::map<long, double> alive{{0, 1.0}};
  for (long n = 1; !alive.empty() && n < 200000; ++n) {
    std::map<long, double> next;
    for (auto [k, w] : alive) {
      next[k + 1] += w * p_true;
      next[k] += w * (1 - p_true);
    }
    alive.clear();
    for (auto [k, w] : next) {
      const double odds = start + k * up + (n - k) * down;
      if (odds >= hi) {
        r.expected_n += n * w;
        r.p_decide_0 += w;
      } else if (odds <= lo) {
        r.expected_n += n * w;
        r.p_decide_1 += w;
      } else if (w > prune) {
        alive[k] = w;
      }
    }
  }
  return r;
}

/// Exact E(N) and decision probabilities of the two-stage test (stage-1 quantizer I(X >= 0), stage-2
/// thresholds 0, -lambda2, +lambda2), uniform priors and unit losses. truth: 0=f, 1=g1, 2=g2.
inline ExactRun two_stage_exact(double c, double u, double lambda2, int truth, double prune = 1e-17) {
  const std::array<double, 3> s1 = threshold_probs(0.0);
  const std::array<std::array<double, 3>, 3> s2 = {threshold_probs(0.0), threshold_probs(-lambda2),
                                                   threshold_probs(lambda2)};
  const double hi = std::log(1 / c);
  const double lo = std::log(c);
  auto loglik = [](const std::array<double, 3>& p, long ones, long zeros) {
    std::array<double, 3> l;
    for (int i = 0; i < 3; ++i) l[i] = ones * std::log(p[i]) + zeros * std::log(1 - p[i]);
    return l;
  };
  auto odds = [](const std::array<double, 3>& l) {
    const double m = std::max(l[1], l[2]);
    return l[0] - (m + std::log(std::exp(l[1] - m) + std::exp(l[2] - m)));
  };
  ExactRun r;
  std::map<long, double> alive{{0, 1.0}};
  for (long n = 1; !alive.empty(); ++n) {
    std::map<long, double> next;
    for (auto [k, w] : alive) {
      next[k + 1] += w * s1[truth];
      next[k] += w * (1 - s1[truth]);
    }
    alive.clear();
    for (auto [k, w] : next) {
      const auto l = loglik(s1, k, n - k);
      const double m = std::max({l[0], l[1], l[2]});
      std::array<double, 3> post;
      double z = 0;
      for (int i = 0; i < 3; ++i) z += post[i] = std::exp(l[i] - m);
      int d0 = 0;
      for (int i = 1; i < 3; ++i)
        if (post[i] > post[d0]) d0 = i;
      if (post[d0] / z < 1 - u) {
        if (w > prune) alive[k] = w;
        continue;
      }
      // Stage 2 from (n, k) with quantizer s2[d0].
      const double o = odds(l);
      if (o >= hi || o <= lo) {
        r.expected_n += n * w;
        (o >= hi ? r.p_decide_0 : r.p_decide_1) += w;
        continue;
      }
      const auto& q = s2[d0];
      std::map<long, double> stage2{{0, w}};
      for (long m2 = 1; !stage2.empty(); ++m2) {
        std::map<long, double> nx;
        for (auto [j, v] : stage2) {
          nx[j + 1] += v * q[truth];
          nx[j] += v * (1 - q[truth]);
        }
        stage2.clear();
        for (auto [j, v] : nx) {
          auto l2 = l;
          const auto add = loglik(q, j, m2 - j);
          for (int i = 0; i < 3; ++i) l2[i] += add[i];
          const double o2 = odds(l2);
          if (o2 >= hi) {
            r.expected_n += (n + m2) * v;
            r.p_decide_0 += v;
          } else if (o2 <= lo) {
            r.expected_n += (n + m2) * v;
            r.p_decide_1 += v;
          } else if (v > prune) {
            stage2[j] = v;
          }
        }
      }
    }
  }
  return r;
}

/// Symmetric random walk on the integers started at 0 with step +1 w.p. p and absorbing barriers
/// at +a and -a: probability of absorption at -a.
inline double gamblers_ruin_lower(double p, long a) {
  const double r = (1 - p) / p;
  if (std::abs(r - 1) < 1e-15) return 0.5;
  // Start at a on [0, 2a]; P(hit 2a) = (1 - r^a) / (1 - r^(2a)).
  const double upper = (1 - std::pow(r, a)) / (1 - std::pow(r, 2 * a));
  return 1 - upper;
}

/// Expected absorption time of the same walk.
inline double gamblers_ruin_duration(double p, long a) {
  const double q = 1 - p;
  const double r = q / p;
  const double n = 2.0 * a;
  return a / (q - p) - n / (q - p) * (1 - std::pow(r, a)) / (1 - std::pow(r, n));
}

/// lambda with P_f~(|X| <= lambda) + P_g~(|X| <= lambda) = 1, by bisection.
inline double balanced_folded_lambda() {
  double lo = 0.1, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto p = folded_probs(mid);
    (p[0] + p[1] < 1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle

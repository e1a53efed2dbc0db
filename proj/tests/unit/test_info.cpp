#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "seqdet/info.hpp"

using namespace seqdet;
using DQ = DeterministicQuantizer;

TEST(KlBernoulli, BasicProperties) {
  EXPECT_EQ(kl_bernoulli(0.3, 0.3), 0.0);
  EXPECT_EQ(kl_bernoulli(0.0, 0.5), std::log(2.0));
  EXPECT_NEAR(kl_bernoulli(1.0, 0.25), std::log(4.0), 1e-15);
  EXPECT_THROW(kl_bernoulli(0.5, 0.0), InfiniteInformationError);
  EXPECT_THROW(kl_bernoulli(1.5, 0.5), DomainError);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
  for (int i = 0; i < 10000; ++i) {
    const double p = u(rng), q = u(rng);
    EXPECT_GE(kl_bernoulli(p, q), 0.0);
    EXPECT_NEAR(kl_bernoulli(p, q), oracle::kl(p, q), 1e-12 * (1 + oracle::kl(p, q)));
  }
}

TEST(QuantizerKl, SignThresholdValue) {
  const auto q = DQ::threshold(0.0);
  EXPECT_NEAR(quantizer_kl(q, Hypothesis::f, Hypothesis::g1), 0.313741, 1e-6);
  EXPECT_NEAR(quantizer_kl(q, Hypothesis::f, Hypothesis::g2), 0.313741, 1e-6);
  EXPECT_NEAR(quantizer_kl(q, Hypothesis::g2, Hypothesis::f), oracle::kl(oracle::normal_cdf(1), 0.5), 1e-13);
}

TEST(QuantizerKl, MatchesOracleOnThresholdGrid) {
  for (double lam = -3; lam <= 3; lam += 0.05) {
    const auto p = oracle::threshold_probs(lam);
    const auto q = DQ::threshold(lam);
    EXPECT_NEAR(quantizer_kl(q, Hypothesis::f, Hypothesis::g1), oracle::kl(p[0], p[1]), 1e-12);
    EXPECT_NEAR(quantizer_kl(q, Hypothesis::g2, Hypothesis::f), oracle::kl(p[2], p[0]), 1e-12);
  }
}

TEST(QuantizerKl, MirrorSymmetry) {
  for (double lam = -3; lam <= 3; lam += 0.1) {
    EXPECT_NEAR(quantizer_kl(DQ::threshold(lam), Hypothesis::f, Hypothesis::g1),
                quantizer_kl(DQ::threshold(-lam), Hypothesis::f, Hypothesis::g2), 1e-13);
    EXPECT_NEAR(quantizer_kl(DQ::threshold(lam), Hypothesis::g1, Hypothesis::f),
                quantizer_kl(DQ::threshold(-lam), Hypothesis::g2, Hypothesis::f), 1e-13);
  }
}

TEST(QuantizerKl, ComplementLeavesInformationUnchanged) {
  for (const auto& q : {DQ::threshold(0.4), DQ::interval(-0.5, 1.5), DQ::absolute(0.9)}) {
    const Hypothesis a = q.is_absolute() ? Hypothesis::folded_f : Hypothesis::f;
    const Hypothesis b = q.is_absolute() ? Hypothesis::folded_g : Hypothesis::g2;
    EXPECT_NEAR(quantizer_kl(q, a, b), quantizer_kl(q.complement(), a, b), 1e-14);
  }
}

TEST(QuantizerKl, DataProcessingInequality) {
  // Unquantized I(f, g_i) = shift^2 / 2.
  for (double lam = -4; lam <= 4; lam += 0.1) {
    EXPECT_LE(quantizer_kl(DQ::threshold(lam), Hypothesis::f, Hypothesis::g1), 0.5);
    EXPECT_LE(quantizer_kl(DQ::threshold(lam), Hypothesis::g2, Hypothesis::f), 0.5);
  }
  auto integrand = [](double x) {
    const auto [ff, gg] = folded_densities(x);
    return ff * std::log(ff / gg);
  };
  const double full = oracle::simpson(integrand, 0.0, 12.0, 6000);
  for (double lam = 0.05; lam <= 4; lam += 0.05)
    EXPECT_LE(quantizer_kl(DQ::absolute(lam), Hypothesis::folded_f, Hypothesis::folded_g), full);
}

TEST(QuantizerKl, Errors) {
  const auto q = DQ::threshold(0.0);
  EXPECT_THROW(quantizer_kl(q, Hypothesis::f, Hypothesis::f), DomainError);
  EXPECT_THROW(quantizer_kl(q, Hypothesis::f, Hypothesis::folded_g), DomainError);
  EXPECT_THROW(quantizer_kl(DQ::threshold(9.0), Hypothesis::f, Hypothesis::g1), InfiniteInformationError);
  EXPECT_THROW(quantizer_kl(DQ::threshold(-9.0), Hypothesis::f, Hypothesis::g2), InfiniteInformationError);
}

TEST(RandomQuantizerKl, ConvexCombination) {
  using C = RandomQuantizer::Component;
  const auto a = DQ::threshold(-0.5);
  const auto b = DQ::interval(-1, 1);
  RandomQuantizer r({C{a, 0.3}, C{b, 0.7}});
  for (Hypothesis h : {Hypothesis::g1, Hypothesis::g2})
    EXPECT_NEAR(random_quantizer_kl(r, Hypothesis::f, h),
                0.3 * quantizer_kl(a, Hypothesis::f, h) + 0.7 * quantizer_kl(b, Hypothesis::f, h), 1e-15);
  EXPECT_NEAR(maximin_objective(r), std::min(random_quantizer_kl(r, Hypothesis::f, Hypothesis::g1),
                                             random_quantizer_kl(r, Hypothesis::f, Hypothesis::g2)),
              0.0);
}

namespace {

struct Point {
  double a1;  // I(f, g1)
  double a2;  // I(f, g2)
};

// Vertices of the upper-right convex hull, ordered by increasing a1.
std::vector<Point> upper_right_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point l, Point r) { return l.a1 < r.a1 || (l.a1 == r.a1 && l.a2 > r.a2); });
  std::vector<Point> hull;
  for (const auto& p : pts) {
    while (!hull.empty() && hull.back().a2 <= p.a2) hull.pop_back();
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& m = hull.back();
      const double cross = (m.a1 - o.a1) * (p.a2 - o.a2) - (m.a2 - o.a2) * (p.a1 - o.a1);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  return hull;
}

bool dominated_by_mixture(Point x, const std::vector<Point>& hull) {
  for (const auto& h : hull)
    if (h.a1 >= x.a1 && h.a2 >= x.a2) return true;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const Point p = hull[i], q = hull[i + 1];  // p.a1 < q.a1, p.a2 > q.a2
    // weight w on p: w*p + (1-w)*q >= x coordinate-wise
    const double w_max = (q.a1 - x.a1) / (q.a1 - p.a1);
    const double w_min = (x.a2 - q.a2) / (p.a2 - q.a2);
    if (std::max(w_min, 0.0) <= std::min(w_max, 1.0)) return true;
  }
  return false;
}

}  // namespace

TEST(Dominance, EveryIntervalIsDominatedByThresholdRandomization) {
  std::vector<Point> thresholds;
  for (int k = -600; k <= 600; ++k) {
    const auto q = DQ::threshold(k * 0.01);
    thresholds.push_back({quantizer_kl(q, Hypothesis::f, Hypothesis::g1), quantizer_kl(q, Hypothesis::f, Hypothesis::g2)});
  }
  const auto hull = upper_right_hull(thresholds);
  ASSERT_GE(hull.size(), 3u);
  int checked = 0;
  for (int i = -40; i <= 40; ++i)
    for (int j = i + 1; j <= 40; ++j) {
      const auto q = DQ::interval(i * 0.1, j * 0.1);
      const Point x{quantizer_kl(q, Hypothesis::f, Hypothesis::g1), quantizer_kl(q, Hypothesis::f, Hypothesis::g2)};
      EXPECT_TRUE(dominated_by_mixture(x, hull)) << q.describe();
      ++checked;
    }
  EXPECT_EQ(checked, 3240);
}

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "seqdet/mc.hpp"

using namespace seqdet;

// Monte Carlo against the exact lattice recursion at c = 1e-2.

namespace {

void expect_close(const EstimateRow& row, double exact_n, double exact_p, const char* what) {
  EXPECT_NEAR(row.mean_n, exact_n, 4.0 * *row.stderr_n) << what;
  EXPECT_NEAR(row.p_error, exact_p, 4.0 * *row.stderr_p) << what;
}

}  // namespace

TEST(ExactCrosscheck, InvariantSprt) {
  for (double lambda : {0.5, 1.2824}) {
    InvariantSprtConfig inv;
    inv.lambda = lambda;
    inv.c = 1e-2;
    McConfig cfg;
    cfg.replications = 20000;
    cfg.seed = 8;
    cfg.test = inv;
    const auto t = run_trials(cfg);
    const auto f = oracle::invariant_sprt_exact(lambda, inv.c, inv.priors, true);
    const auto g = oracle::invariant_sprt_exact(lambda, inv.c, inv.priors, false);
    expect_close(t.row(Hypothesis::f), f.expected_n, f.p_decide_1, "f");
    expect_close(t.row(Hypothesis::g1), g.expected_n, g.p_decide_0, "g1");
    expect_close(t.row(Hypothesis::g2), g.expected_n, g.p_decide_0, "g2");
  }
}

TEST(ExactCrosscheck, TwoStage) {
  McConfig cfg;
  cfg.replications = 20000;
  cfg.seed = 9;
  const auto t = run_trials(cfg);
  for (Hypothesis h : kRawHypotheses) {
    const auto e = oracle::two_stage_exact(1e-2, 0.1, 0.7941, int(index_of(h)));
    EXPECT_NEAR(e.p_decide_0 + e.p_decide_1, 1.0, 1e-9);
    expect_close(t.row(h), e.expected_n, h == Hypothesis::f ? e.p_decide_1 : e.p_decide_0, std::string(name_of(h)).c_str());
  }
}

TEST(ExactCrosscheck, OracleSanity) {
  // The exact recursion agrees with the gambler's-ruin closed form on the balanced channel.
  const double lam = oracle::balanced_folded_lambda();
  const auto p = oracle::folded_probs(lam);
  const auto r = oracle::invariant_sprt_exact(lam, 1e-2, {0.5, 0.5}, true, 1e-20);
  EXPECT_NEAR(r.p_decide_1, oracle::gamblers_ruin_lower(p[0], 12), 1e-12);
  EXPECT_NEAR(r.expected_n, oracle::gamblers_ruin_duration(p[0], 12), 1e-9);
}

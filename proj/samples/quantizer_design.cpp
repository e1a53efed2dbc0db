// Designs the second-stage and invariant quantizers and prints their information numbers.
#include <cstdio>

#include "seqdet/seqdet.hpp"

int main() {
  using namespace seqdet;

  const auto g2 = optimize_threshold(Hypothesis::g2);
  const auto f = optimize_maximin_f();
  const auto inv = optimize_invariant_lambda(1.0 / 3, 2.0 / 3);

  std::printf("g2-optimal   %-20s I(g2,f)  = %.4f\n", g2.quantizer.describe().c_str(), g2.objective);
  std::printf("f-maximin    %-20s I_f      = %.4f\n", f.quantizer.describe().c_str(), f.objective);
  std::printf("invariant    %-20s objective = %.4f\n", inv.quantizer.describe().c_str(), inv.objective);
  std::printf("lambda=0.5   %-20s objective = %.4f\n", "I(|X|<=0.5)", invariant_objective(0.5, 1.0 / 3, 2.0 / 3));
}

// One run of the two-stage test under g2, printing the feedback switch and the final decision.
#include <cstdio>

#include "seqdet/seqdet.hpp"

int main() {
  using namespace seqdet;

  TwoStageConfig cfg;
  cfg.c = 1e-3;
  auto rng = substream(2024, 0, 0, 0);
  const auto out = run_delta_I(cfg, gaussian_source(Hypothesis::g2, rng));

  std::printf("stage 1 stopped at n=%zu with preliminary decision %s\n", *out.n1,
              std::string(name_of(*out.d0)).c_str());
  std::printf("stopped at N=%zu, decision d=%d (%s)\n", out.n, out.decision, out.decision ? "H1" : "H0");
  for (std::size_t i = 0; i < out.record.size(); ++i) {
    const auto& m = out.record[i];
    std::printf("%3zu  u=%d  quantizer=%d  P(U=1|f,g1,g2)=(%.4f, %.4f, %.4f)\n", i + 1, m.bit, m.quantizer_id,
                m.prob_one[0], m.prob_one[1], m.prob_one[2]);
  }
}

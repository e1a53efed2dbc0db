#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"
#include "seqdet/posterior.hpp"
#include "seqdet/quantizer.hpp"

namespace seqdet {

inline constexpr std::size_t kDefaultMaxSamples = 10'000'000;

/// Second-stage quantizers I(X >= 0), I(X >= -0.7941), I(X >= 0.7941) indexed by preliminary decision.
inline std::array<DeterministicQuantizer, 3> default_stage2_quantizers() {
  return {DeterministicQuantizer::threshold(0.0), DeterministicQuantizer::threshold(-0.7941),
          DeterministicQuantizer::threshold(0.7941)};
}

/// Stage-1 quantizer of the two-stage test.
inline DeterministicQuantizer stage1_quantizer() { return DeterministicQuantizer::threshold(0.0); }

struct TwoStageConfig {
  double c = 1e-2;
  double u = 0.1;
  std::array<double, 3> priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> losses{1.0, 1.0, 1.0};
  std::array<DeterministicQuantizer, 3> stage2 = default_stage2_quantizers();
  std::size_t max_samples = kDefaultMaxSamples;
  GaussianModel model{};

  void validate() const {
    if (!(c > 0.0 && c < 1.0)) throw DomainError("two-stage test: c must lie in (0, 1)");
    if (!(u > 0.0 && u < 0.5)) throw DomainError("two-stage test: u must lie in (0, 1/2)");
    double total = 0.0;
    for (double p : priors) {
      if (!(p >= 0.0)) throw DomainError("two-stage test: priors must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("two-stage test: priors must sum to 1");
    for (double w : losses)
      if (!(w > 0.0 && std::isfinite(w))) throw DomainError("two-stage test: losses must be positive");
    for (const auto& q : stage2)
      if (q.is_absolute()) throw DomainError("two-stage test: stage-2 quantizers act on the raw line");
    if (max_samples == 0) throw DomainError("two-stage test: max_samples must be positive");
  }
};

struct InvariantSprtConfig {
  double lambda = 0.5;
  double c = 1e-2;
  std::array<double, 2> priors{1.0 / 3, 2.0 / 3};
  std::array<double, 2> losses{1.0, 1.0};
  std::size_t max_samples = kDefaultMaxSamples;
  GaussianModel model{};

  void validate() const {
    if (!(lambda > 0.0 && std::isfinite(lambda))) throw DomainError("invariant SPRT: lambda must be positive");
    if (!(c > 0.0 && c < 1.0)) throw DomainError("invariant SPRT: c must lie in (0, 1)");
    if (!(priors[0] >= 0.0 && priors[1] >= 0.0) || std::abs(priors[0] + priors[1] - 1.0) > 1e-9)
      throw DomainError("invariant SPRT: priors must be nonnegative and sum to 1");
    for (double w : losses)
      if (!(w > 0.0 && std::isfinite(w))) throw DomainError("invariant SPRT: losses must be positive");
    if (max_samples == 0) throw DomainError("invariant SPRT: max_samples must be positive");
  }
};

/// One-shot feedback value V in {0, 1, 2} for preliminary decisions f, g1, g2.
struct FeedbackSignal {
  std::uint8_t value;

  static FeedbackSignal from(Hypothesis d0) {
    if (is_folded(d0)) throw DomainError("feedback carries a raw-model decision");
    return {static_cast<std::uint8_t>(index_of(d0))};
  }
  Hypothesis decision() const { return kRawHypotheses.at(value); }
};

/// What the fusion center learns at step n: the bit, which quantizer produced it, and that
/// quantizer's P_h(U = 1) under each hypothesis of the model.
template <std::size_t K>
struct MessageRecord {
  Bit bit;
  std::uint8_t quantizer_id;
  std::array<double, K> prob_one;
};

template <std::size_t K>
struct TestOutcome {
  std::size_t n = 0;
  std::optional<std::size_t> n1;
  std::optional<Hypothesis> d0;
  Bit decision = 0;
  /// Sum over steps of log P_h(U_n = u_n), per hypothesis.
  std::array<double, K> log_likelihood{};
  std::vector<MessageRecord<K>> record;
};

// ---------------------------------------------------------------------------
// Sensor side: sees raw observations, emits bits.
// ---------------------------------------------------------------------------

/// Stationary sensor: one quantizer forever.
template <class Source>
class StationarySensor {
 public:
  StationarySensor(Source source, DeterministicQuantizer q) : source_(std::move(source)), q_(q) {}

  Bit transmit() { return q_.apply_unchecked(source_()); }

 private:
  Source source_;
  DeterministicQuantizer q_;
};

/// Sensor that switches its quantizer once, on receipt of the fusion center's feedback.
template <class Source>
class TandemSensor {
 public:
  TandemSensor(Source source, DeterministicQuantizer first, std::array<DeterministicQuantizer, 3> second)
      : source_(std::move(source)), current_(first), second_(second) {}

  Bit transmit() { return current_.apply_unchecked(source_()); }

  void receive(FeedbackSignal v) {
    if (switched_) throw DomainError("tandem sensor: feedback is one-shot");
    current_ = second_.at(v.value);
    switched_ = true;
  }

 private:
  Source source_;
  DeterministicQuantizer current_;
  std::array<DeterministicQuantizer, 3> second_;
  bool switched_ = false;
};

// ---------------------------------------------------------------------------
// Fusion side: sees only bits and quantizer identities.
// ---------------------------------------------------------------------------

namespace detail {

/// log P_h(U = b) for both bit values and every hypothesis of a model.
template <std::size_t K>
struct ChannelTable {
  std::array<std::array<double, K>, 2> log_prob{};
  std::array<double, K> prob_one{};
};

template <std::size_t K>
ChannelTable<K> channel_table(const DeterministicQuantizer& q, const std::array<Hypothesis, K>& labels,
                              const GaussianModel& model) {
  ChannelTable<K> t;
  for (std::size_t i = 0; i < K; ++i) {
    const double p1 = induced_prob(q, labels[i], model).p1;
    t.prob_one[i] = p1;
    t.log_prob[1][i] = std::log(p1);
    t.log_prob[0][i] = std::log1p(-p1);
  }
  return t;
}

}  // namespace detail

/// Fusion center of the two-stage test with one-shot feedback.
class TwoStageFusion {
 public:
  struct Step {
    bool stopped = false;
    std::optional<FeedbackSignal> feedback;
  };

  explicit TwoStageFusion(const TwoStageConfig& cfg, bool keep_record = true)
      : cfg_(cfg), posterior_(cfg.priors), keep_record_(keep_record) {
    cfg_.validate();
    channels_[0] = detail::channel_table(stage1_quantizer(), kRawHypotheses, cfg.model);
    for (std::size_t i = 0; i < 3; ++i) channels_[i + 1] = detail::channel_table(cfg.stage2[i], kRawHypotheses, cfg.model);
    for (std::size_t i = 0; i < 3; ++i) log_weight_[i] = std::log(cfg.losses[i]);
    stage1_threshold_ = 1.0 - cfg.u;
    log_upper_ = -std::log(cfg.c);
    log_lower_ = std::log(cfg.c);
  }

  Step receive(Bit u) {
    if (stopped_) throw DomainError("two-stage fusion: message after stopping");
    const auto& ch = channels_[active_];
    posterior_.absorb(ch.log_prob[u]);
    for (std::size_t i = 0; i < 3; ++i) outcome_.log_likelihood[i] += ch.log_prob[u][i];
    if (keep_record_) outcome_.record.push_back({u, static_cast<std::uint8_t>(active_), ch.prob_one});
    outcome_.n = posterior_.n();

    Step step;
    if (active_ == 0) {
      const auto m = posterior_.masses();
      const std::size_t best = posterior_.argmax();
      if (m[best] >= stage1_threshold_) {
        outcome_.n1 = outcome_.n;
        outcome_.d0 = kRawHypotheses[best];
        step.feedback = FeedbackSignal::from(kRawHypotheses[best]);
        active_ = 1 + best;
      }
    }
    if (active_ != 0) {
      const double ratio = log_weighted_odds();
      if (ratio >= log_upper_) finish(0, step);
      else if (ratio <= log_lower_) finish(1, step);
    }
    if (!stopped_ && outcome_.n >= cfg_.max_samples)
      throw NonTerminationError("two-stage test exceeded max_samples", outcome_.n);
    return step;
  }

  /// log( pi_f W_f / (pi_g1 W_g1 + pi_g2 W_g2) ).
  double log_weighted_odds() const {
    const auto& lm = posterior_.log_masses();
    return lm[0] + log_weight_[0] - log_add_exp(lm[1] + log_weight_[1], lm[2] + log_weight_[2]);
  }

  const PosteriorState<3>& posterior() const noexcept { return posterior_; }
  bool stopped() const noexcept { return stopped_; }
  TestOutcome<3>&& take_outcome() { return std::move(outcome_); }
  const TestOutcome<3>& outcome() const noexcept { return outcome_; }

 private:
  void finish(Bit d, Step& step) {
    stopped_ = true;
    outcome_.decision = d;
    step.stopped = true;
  }

  TwoStageConfig cfg_;
  PosteriorState<3> posterior_;
  std::array<detail::ChannelTable<3>, 4> channels_{};
  std::array<double, 3> log_weight_{};
  double stage1_threshold_ = 0.9;
  double log_upper_ = 0.0;
  double log_lower_ = 0.0;
  std::size_t active_ = 0;
  bool stopped_ = false;
  bool keep_record_;
  TestOutcome<3> outcome_;
};

/// Fusion center of the SPRT on I(|X| <= lambda) messages.
class InvariantFusion {
 public:
  explicit InvariantFusion(const InvariantSprtConfig& cfg, bool keep_record = true)
      : cfg_(cfg), posterior_(cfg.priors), keep_record_(keep_record) {
    cfg_.validate();
    channel_ = detail::channel_table(DeterministicQuantizer::absolute(cfg.lambda), kFoldedHypotheses, cfg.model);
    for (std::size_t i = 0; i < 2; ++i) log_weight_[i] = std::log(cfg.losses[i]);
    log_upper_ = -std::log(cfg.c);
    log_lower_ = std::log(cfg.c);
  }

  /// Returns true once the test stops.
  bool receive(Bit u) {
    if (stopped_) throw DomainError("invariant fusion: message after stopping");
    posterior_.absorb(channel_.log_prob[u]);
    for (std::size_t i = 0; i < 2; ++i) outcome_.log_likelihood[i] += channel_.log_prob[u][i];
    if (keep_record_) outcome_.record.push_back({u, 0, channel_.prob_one});
    outcome_.n = posterior_.n();
    const double ratio = log_weighted_odds();
    if (ratio >= log_upper_) finish(0);
    else if (ratio <= log_lower_) finish(1);
    if (!stopped_ && outcome_.n >= cfg_.max_samples)
      throw NonTerminationError("invariant SPRT exceeded max_samples", outcome_.n);
    return stopped_;
  }

  /// log( pi_f~ W_f~ / (pi_g~ W_g~) ).
  double log_weighted_odds() const {
    const auto& lm = posterior_.log_masses();
    return lm[0] + log_weight_[0] - (lm[1] + log_weight_[1]);
  }

  const PosteriorState<2>& posterior() const noexcept { return posterior_; }
  bool stopped() const noexcept { return stopped_; }
  TestOutcome<2>&& take_outcome() { return std::move(outcome_); }

 private:
  void finish(Bit d) {
    stopped_ = true;
    outcome_.decision = d;
  }

  InvariantSprtConfig cfg_;
  PosteriorState<2> posterior_;
  detail::ChannelTable<2> channel_{};
  std::array<double, 2> log_weight_{};
  double log_upper_ = 0.0;
  double log_lower_ = 0.0;
  bool stopped_ = false;
  bool keep_record_;
  TestOutcome<2> outcome_;
};

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

struct Stage1Result {
  std::size_t n1;
  Hypothesis d0;
  PosteriorState<3> posterior;
};

/// Stage 1 alone on a given stream of I(X >= 0) messages.
inline Stage1Result run_stage1(const TwoStageConfig& cfg, std::span<const Bit> bits) {
  cfg.validate();
  const auto ch = detail::channel_table(stage1_quantizer(), kRawHypotheses, cfg.model);
  PosteriorState<3> post(cfg.priors);
  for (Bit b : bits) {
    if (b > 1) throw DomainError("run_stage1: messages must be bits");
    post.absorb(ch.log_prob[b]);
    const std::size_t best = post.argmax();
    if (post.mass(best) >= 1.0 - cfg.u) return {post.n(), kRawHypotheses[best], post};
    if (post.n() >= cfg.max_samples) throw NonTerminationError("stage 1 exceeded max_samples", post.n());
  }
  throw DomainError("run_stage1: message stream ended before stage 1 stopped");
}

/// Two-stage test with one-shot feedback on raw observations drawn from `source()`.
template <class Source>
TestOutcome<3> run_delta_I(const TwoStageConfig& cfg, Source&& source, bool keep_record = true) {
  TwoStageFusion fusion(cfg, keep_record);
  TandemSensor sensor(std::ref(source), stage1_quantizer(), cfg.stage2);
  while (true) {
    const auto step = fusion.receive(sensor.transmit());
    if (step.feedback) sensor.receive(*step.feedback);
    if (step.stopped) break;
  }
  return fusion.take_outcome();
}

/// Stationary SPRT on I(|X| <= lambda) messages of raw observations drawn from `source()`.
template <class Source>
TestOutcome<2> run_invariant_sprt(const InvariantSprtConfig& cfg, Source&& source, bool keep_record = true) {
  InvariantFusion fusion(cfg, keep_record);
  StationarySensor sensor(std::ref(source), DeterministicQuantizer::absolute(cfg.lambda));
  while (!fusion.receive(sensor.transmit())) {
  }
  return fusion.take_outcome();
}

/// Raw N(mean, 1) observations under a raw hypothesis.
template <class Rng>
auto gaussian_source(Hypothesis truth, Rng& rng, const GaussianModel& model = GaussianModel{}) {
  const double mean = model.mean(truth);
  return [mean, &rng, dist = std::normal_distribution<double>(0.0, 1.0)]() mutable { return mean + dist(rng); };
}

}  // namespace seqdet

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqdet/errors.hpp"
#include "seqdet/mc.hpp"
#include "seqdet/quantizer.hpp"
#include "seqdet/sequential.hpp"

namespace seqdet {

/// Configuration problems: unknown keys, wrong types, out-of-range values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using nlohmann::json;

// ---------------------------------------------------------------------------
// Quantizer serialization: {"kind": "threshold", "lambda": 0.7941, "direction": "ge"}
// ---------------------------------------------------------------------------

inline json to_json_value(const DeterministicQuantizer& q) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Threshold>)
          return {{"kind", "threshold"}, {"lambda", v.lambda}, {"direction", v.direction == Direction::ge ? "ge" : "lt"}};
        else if constexpr (std::is_same_v<T, Interval>)
          return {{"kind", "interval"}, {"lo", v.lo}, {"hi", v.hi}, {"inside_bit", v.inside_bit}};
        else
          return {{"kind", "absolute"}, {"lambda", v.lambda}, {"inside_bit", v.inside_bit}};
      },
      q.variant());
}

inline json to_json_value(const RandomQuantizer& rq) {
  json arr = json::array();
  for (const auto& c : rq.components()) arr.push_back({{"weight", c.weight}, {"quantizer", to_json_value(c.quantizer)}});
  return arr;
}

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok |= key == a;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

inline double number_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline Bit bit_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return 1;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
    throw ConfigError(where + ": field '" + key + "' must be 0 or 1");
  return static_cast<Bit>(v.get<int>());
}

}  // namespace detail

inline DeterministicQuantizer quantizer_from_json(const json& j, const std::string& where = "quantizer") {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + ": expected an object with a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "threshold") {
      detail::reject_unknown(j, {"kind", "lambda", "direction"}, where);
      Direction dir = Direction::ge;
      if (j.contains("direction")) {
        const auto& d = j.at("direction");
        if (d == "ge") dir = Direction::ge;
        else if (d == "lt") dir = Direction::lt;
        else throw ConfigError(where + ": direction must be \"ge\" or \"lt\"");
      }
      return DeterministicQuantizer::threshold(detail::number_at(j, "lambda", where), dir);
    }
    if (kind == "interval") {
      detail::reject_unknown(j, {"kind", "lo", "hi", "inside_bit"}, where);
      return DeterministicQuantizer::interval(detail::number_at(j, "lo", where), detail::number_at(j, "hi", where),
                                              detail::bit_at(j, "inside_bit", where));
    }
    if (kind == "absolute") {
      detail::reject_unknown(j, {"kind", "lambda", "inside_bit"}, where);
      return DeterministicQuantizer::absolute(detail::number_at(j, "lambda", where),
                                              detail::bit_at(j, "inside_bit", where));
    }
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown quantizer kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Command-line quantizer syntax:
//   threshold:L[:ge|lt]   interval:LO:HI[:BIT]   abs:L[:BIT]
//   mixtures as W*Q;W*Q;...  e.g. 0.5*threshold:0;0.5*threshold:0.7941
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) throw ConfigError("cannot parse '" + std::string(s) + "' as " + what);
  return v;
}

inline Bit parse_bit(std::string_view s) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ConfigError("quantizer bit must be 0 or 1, got '" + std::string(s) + "'");
}

}  // namespace detail

inline DeterministicQuantizer parse_deterministic_quantizer(std::string_view text) {
  const auto parts = detail::split(text, ':');
  const auto& kind = parts.front();
  try {
    if (kind == "threshold" && (parts.size() == 2 || parts.size() == 3)) {
      Direction dir = Direction::ge;
      if (parts.size() == 3) {
        if (parts[2] == "ge") dir = Direction::ge;
        else if (parts[2] == "lt") dir = Direction::lt;
        else throw ConfigError("threshold direction must be ge or lt");
      }
      return DeterministicQuantizer::threshold(detail::parse_real(parts[1], "threshold"), dir);
    }
    if (kind == "interval" && (parts.size() == 3 || parts.size() == 4)) {
      return DeterministicQuantizer::interval(detail::parse_real(parts[1], "interval bound"),
                                              detail::parse_real(parts[2], "interval bound"),
                                              parts.size() == 4 ? detail::parse_bit(parts[3]) : Bit{1});
    }
    if ((kind == "abs" || kind == "absolute") && (parts.size() == 2 || parts.size() == 3)) {
      return DeterministicQuantizer::absolute(detail::parse_real(parts[1], "absolute threshold"),
                                              parts.size() == 3 ? detail::parse_bit(parts[2]) : Bit{1});
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed quantizer '") + std::string(text) + "': " + e.what());
  }
  throw ConfigError("malformed quantizer '" + std::string(text) +
                    "' (expected threshold:L[:ge|lt], interval:LO:HI[:BIT] or abs:L[:BIT])");
}

inline RandomQuantizer parse_quantizer(std::string_view text) {
  const auto parts = detail::split(text, ';');
  if (parts.size() == 1 && parts.front().find('*') == std::string::npos)
    return RandomQuantizer(parse_deterministic_quantizer(parts.front()));
  std::vector<RandomQuantizer::Component> comps;
  for (const auto& p : parts) {
    const auto star = p.find('*');
    if (star == std::string::npos) throw ConfigError("mixture component '" + p + "' needs a weight (W*Q)");
    comps.push_back({parse_deterministic_quantizer(std::string_view(p).substr(star + 1)),
                     detail::parse_real(std::string_view(p).substr(0, star), "mixture weight")});
  }
  try {
    return RandomQuantizer(std::move(comps));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed mixture: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class TestKind { two_stage, invariant_sprt };

struct TestEntry {
  std::string name;
  TestKind kind = TestKind::two_stage;
  double u = 0.1;
  std::array<DeterministicQuantizer, 3> stage2 = default_stage2_quantizers();
  double lambda = 0.5;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t replications = 1000;
  Estimator estimator = Estimator::importance;
  unsigned threads = 0;
  std::size_t max_samples = kDefaultMaxSamples;
  std::vector<double> costs{1e-2};
  std::array<double, 3> priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> losses{1.0, 1.0, 1.0};
  std::vector<TestEntry> tests;
  std::string csv_path = "results.csv";
  std::string json_path = "results.json";

  void validate() const {
    if (replications == 0) throw ConfigError("replications must be >= 1");
    if (max_samples == 0) throw ConfigError("max_samples must be >= 1");
    if (costs.empty()) throw ConfigError("c must list at least one sampling cost");
    for (double c : costs)
      if (!(c > 0.0 && c < 1.0)) throw ConfigError("every c must lie in (0, 1)");
    double total = 0.0;
    for (double p : priors) {
      if (!(p >= 0.0)) throw ConfigError("priors must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("priors must sum to 1");
    for (double w : losses)
      if (!(w > 0.0 && std::isfinite(w))) throw ConfigError("losses must be positive");
    if (tests.empty()) throw ConfigError("tests must list at least one test");
    std::set<std::string> names;
    for (const auto& t : tests) {
      if (t.name.empty()) throw ConfigError("every test needs a name");
      if (!names.insert(t.name).second) throw ConfigError("duplicate test name '" + t.name + "'");
      if (t.kind == TestKind::two_stage && !(t.u > 0.0 && t.u < 0.5))
        throw ConfigError("test '" + t.name + "': u must lie in (0, 1/2)");
      if (t.kind == TestKind::invariant_sprt && !(t.lambda > 0.0 && std::isfinite(t.lambda)))
        throw ConfigError("test '" + t.name + "': lambda must be positive");
      if (t.kind == TestKind::invariant_sprt && priors[1] + priors[2] == 0.0)
        throw ConfigError("test '" + t.name + "': invariant tests need positive alternative prior mass");
    }
    if (csv_path.empty() || json_path.empty()) throw ConfigError("output paths must be non-empty");
  }

  /// Concrete test parameters for one (test, c) cell.
  TestSpec make_spec(const TestEntry& t, double c) const {
    if (t.kind == TestKind::two_stage) {
      TwoStageConfig cfg;
      cfg.c = c;
      cfg.u = t.u;
      cfg.priors = priors;
      cfg.losses = losses;
      cfg.stage2 = t.stage2;
      cfg.max_samples = max_samples;
      return cfg;
    }
    InvariantSprtConfig cfg;
    cfg.lambda = t.lambda;
    cfg.c = c;
    const double pg = priors[1] + priors[2];
    cfg.priors = {priors[0], pg};
    cfg.losses = {losses[0], (priors[1] * losses[1] + priors[2] * losses[2]) / pg};
    cfg.max_samples = max_samples;
    return cfg;
  }
};

inline json to_json_value(const ExperimentConfig& cfg) {
  json tests = json::array();
  for (const auto& t : cfg.tests) {
    if (t.kind == TestKind::two_stage) {
      tests.push_back({{"name", t.name},
                       {"kind", "two-stage"},
                       {"u", t.u},
                       {"stage2",
                        {{"f", to_json_value(t.stage2[0])},
                         {"g1", to_json_value(t.stage2[1])},
                         {"g2", to_json_value(t.stage2[2])}}}});
    } else {
      tests.push_back({{"name", t.name}, {"kind", "invariant-sprt"}, {"lambda", t.lambda}});
    }
  }
  return {{"seed", cfg.seed},
          {"replications", cfg.replications},
          {"estimator", cfg.estimator == Estimator::importance ? "importance" : "plain"},
          {"threads", cfg.threads},
          {"max_samples", cfg.max_samples},
          {"c", cfg.costs},
          {"priors", cfg.priors},
          {"losses", cfg.losses},
          {"tests", tests},
          {"output", {{"csv", cfg.csv_path}, {"json", cfg.json_path}}}};
}

namespace detail {

template <std::size_t K>
std::array<double, K> real_array(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != K) throw ConfigError(std::string(key) + ": expected an array of " + std::to_string(K) + " numbers");
  std::array<double, K> out;
  for (std::size_t i = 0; i < K; ++i) {
    if (!v[i].is_number()) throw ConfigError(std::string(key) + ": entries must be numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

template <class T>
T unsigned_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(std::string(key) + ": expected a nonnegative integer");
  return v.get<T>();
}

}  // namespace detail

inline ExperimentConfig experiment_from_json(const json& j) {
  detail::reject_unknown(j, {"seed", "replications", "estimator", "threads", "max_samples", "c", "priors", "losses",
                             "tests", "output"},
                         "config");
  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = detail::unsigned_at<std::uint64_t>(j, "seed");
  if (j.contains("replications")) cfg.replications = detail::unsigned_at<std::size_t>(j, "replications");
  if (j.contains("threads")) cfg.threads = detail::unsigned_at<unsigned>(j, "threads");
  if (j.contains("max_samples")) cfg.max_samples = detail::unsigned_at<std::size_t>(j, "max_samples");
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    if (e == "importance") cfg.estimator = Estimator::importance;
    else if (e == "plain") cfg.estimator = Estimator::plain;
    else throw ConfigError("estimator must be \"plain\" or \"importance\"");
  }
  if (j.contains("c")) {
    const auto& c = j.at("c");
    cfg.costs.clear();
    if (c.is_number()) cfg.costs.push_back(c.get<double>());
    else if (c.is_array()) {
      for (const auto& v : c) {
        if (!v.is_number()) throw ConfigError("c: entries must be numbers");
        cfg.costs.push_back(v.get<double>());
      }
    } else throw ConfigError("c: expected a number or an array of numbers");
  }
  if (j.contains("priors")) cfg.priors = detail::real_array<3>(j, "priors");
  if (j.contains("losses")) cfg.losses = detail::real_array<3>(j, "losses");
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(o, {"csv", "json"}, "output");
    if (o.contains("csv")) cfg.csv_path = o.at("csv").get<std::string>();
    if (o.contains("json")) cfg.json_path = o.at("json").get<std::string>();
  }
  if (!j.contains("tests") || !j.at("tests").is_array()) throw ConfigError("config: 'tests' must be an array");
  for (const auto& t : j.at("tests")) {
    if (!t.is_object() || !t.contains("kind") || !t.at("kind").is_string())
      throw ConfigError("tests: every entry needs a string 'kind'");
    TestEntry e;
    const auto kind = t.at("kind").get<std::string>();
    const std::string where = "test '" + t.value("name", std::string()) + "'";
    if (kind == "two-stage") {
      detail::reject_unknown(t, {"name", "kind", "u", "stage2"}, where);
      e.kind = TestKind::two_stage;
      if (t.contains("u")) e.u = detail::number_at(t, "u", where);
      if (t.contains("stage2")) {
        const auto& s = t.at("stage2");
        detail::reject_unknown(s, {"f", "g1", "g2"}, where + " stage2");
        const char* keys[] = {"f", "g1", "g2"};
        for (std::size_t i = 0; i < 3; ++i)
          if (s.contains(keys[i])) e.stage2[i] = quantizer_from_json(s.at(keys[i]), where + " stage2." + keys[i]);
      }
      for (const auto& q : e.stage2)
        if (q.is_absolute()) throw ConfigError(where + ": stage-2 quantizers must act on the raw line");
    } else if (kind == "invariant-sprt") {
      detail::reject_unknown(t, {"name", "kind", "lambda"}, where);
      e.kind = TestKind::invariant_sprt;
      e.lambda = detail::number_at(t, "lambda", where);
    } else {
      throw ConfigError(where + ": unknown kind '" + kind + "' (expected two-stage or invariant-sprt)");
    }
    if (!t.contains("name") || !t.at("name").is_string()) throw ConfigError("tests: every entry needs a string 'name'");
    e.name = t.at("name").get<std::string>();
    cfg.tests.push_back(std::move(e));
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return experiment_from_json(j);
}

}  // namespace seqdet

#pragma once

// JSON rendering of experiment and analysis reports. Numbers carry 12
// significant digits; non-finite values become null.

#include <cstdlib>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "rtm/csv_io.hpp"
#include "rtm/estimators.hpp"
#include "rtm/experiments.hpp"
#include "rtm/inference.hpp"
#include "rtm/model.hpp"

namespace rtm {

using Json = nlohmann::ordered_json;

inline Json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v, 12).c_str(), nullptr);
}

inline Json to_json(const PopulationParams& p) {
  return Json{{"mu", json_number(p.mu())},         {"sigma2", json_number(p.sigma2())},
              {"alpha", json_number(p.alpha())},   {"beta", json_number(p.beta())},
              {"nu2", json_number(p.nu2())},       {"delta2", json_number(p.delta2())}};
}

inline Json to_json(const ErrorSpec& spec) {
  if (const auto* r = std::get_if<Repeatability>(&spec)) {
    return Json{{"repeatability", json_number(r->value)}};
  }
  return Json{{"error_variance", json_number(std::get<ErrorVariance>(spec).value)}};
}

inline Json to_json(const SampleStats& s) {
  return Json{{"n", s.n},
              {"mean_x1", json_number(s.mean_x1)},
              {"mean_x2", json_number(s.mean_x2)},
              {"var_x1", json_number(s.var_x1)},
              {"var_x2", json_number(s.var_x2)},
              {"cov_x1x2", json_number(s.cov_x1x2)},
              {"pearson_r", s.pearson_r ? json_number(*s.pearson_r) : Json(nullptr)}};
}

inline Json to_json(const SlopeEstimate& e) {
  Json j{{"method", std::string(to_string(e.method))}, {"value", json_number(e.value)}};
  if (const auto* b = std::get_if<BerryAux>(&e.auxiliary)) {
    j["rho"] = json_number(b->rho);
  } else if (const auto* q = std::get_if<BlomqvistAux>(&e.auxiliary)) {
    j["delta2"] = json_number(q->delta2);
    j["b_coefficient"] = json_number(q->b_coefficient);
  }
  return j;
}

inline Json to_json(const BootstrapResult& b) {
  return Json{{"method", std::string(to_string(b.method))},
              {"point_estimate", json_number(b.point_estimate)},
              {"ci_low", json_number(b.ci_low)},
              {"ci_high", json_number(b.ci_high)},
              {"level", json_number(b.level)},
              {"resamples", b.requested()},
              {"n_failed", b.n_failed},
              {"failure_warning", b.failure_warning}};
}

inline Json to_json(const RepeatabilityInterval& r) {
  return Json{{"low", json_number(r.low)},
              {"high", json_number(r.high)},
              {"empty", r.empty},
              {"low_open", r.low_open}};
}

inline Json to_json(const Summary& s) {
  return Json{{"count", s.count},          {"failed", s.failed},
              {"mean", json_number(s.mean)}, {"variance", json_number(s.variance)},
              {"min", json_number(s.min)},   {"q1", json_number(s.q1)},
              {"median", json_number(s.median)}, {"q3", json_number(s.q3)},
              {"max", json_number(s.max)}};
}

inline Json analyze_config_json(const AnalyzeConfig& c, const std::string& command) {
  const auto& o = c.options;
  return Json{{"command", command},
              {"source", c.source},
              {"params", c.params ? to_json(*c.params) : Json(nullptr)},
              {"seed", c.seed},
              {"resamples", o.resamples},
              {"level", json_number(o.level)},
              {"n_perm", o.n_perm},
              {"error_spec", c.error_spec ? to_json(*c.error_spec) : Json(nullptr)},
              {"known_repeatability",
               o.known_repeatability ? json_number(*o.known_repeatability) : Json(nullptr)},
              {"negate_change", o.negate_change}};
}

// Top-level keys: config, stats, slopes, bootstrap, repeatability_interval,
// tests, warnings.
inline Json to_json(const AnalyzeReport& r, const std::string& command) {
  Json slopes{{"change", r.config.options.negate_change ? "x1 - x2" : "x2 - x1"},
              {"crude", to_json(r.crude)},
              {"berry", to_json(r.berry.estimate)}};
  if (r.blomqvist) slopes["blomqvist"] = to_json(r.blomqvist->estimate);

  Json boot{{"crude", to_json(r.bootstrap_crude)}};
  if (r.bootstrap_blomqvist) boot["blomqvist"] = to_json(*r.bootstrap_blomqvist);

  Json tests{{"permutation",
              {{"null", kPermutationNullLabel},
               {"observed_statistic", json_number(r.permutation.observed_statistic)},
               {"p_value", json_number(r.permutation.p_value)},
               {"n_permutations", r.permutation.n_permutations},
               {"exact", r.permutation.exact}}},
             {"pitman",
              {{"null", kPitmanNullLabel},
               {"statistic", json_number(r.pitman.statistic)},
               {"p_value", json_number(r.pitman.p_value)},
               {"n", r.pitman.n}}}};
  if (r.decision) {
    tests["null_given_repeatability"] = Json{{"null", "β = 0"},
                                             {"source", r.decision_source},
                                             {"repeatability", json_number(r.decision->repeatability)},
                                             {"null_value", json_number(r.decision->null_value)},
                                             {"rejected", r.decision->rejected}};
  }

  Json warnings = Json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);

  return Json{{"config", analyze_config_json(r.config, command)},
              {"stats", to_json(r.stats)},
              {"slopes", std::move(slopes)},
              {"bootstrap", std::move(boot)},
              {"repeatability_interval", to_json(r.repeatability_interval)},
              {"tests", std::move(tests)},
              {"warnings", std::move(warnings)}};
}

inline Json to_json(const SamplingDistReport& r) {
  Json methods = Json::object();
  for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
    methods[std::string(to_string(kAllMethods[m]))] = to_json(r.summaries[m]);
  }
  const auto pop = population_slopes(r.params);
  return Json{{"config",
               {{"command", "sampling-dist"},
                {"params", to_json(r.params)},
                {"n", r.n},
                {"replicates", r.replicates},
                {"seed", r.seed},
                {"error_spec", to_json(r.error_spec)}}},
              {"population",
               {{"crude", json_number(pop.crude)},
                {"berry", json_number(pop.berry)},
                {"true", json_number(pop.true_beta)}}},
              {"methods", std::move(methods)}};
}

inline Json to_json(const HeadToHeadReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"beta", json_number(row.beta)},
                        {"p_crude_beats_berry", json_number(row.p_crude_beats_berry)},
                        {"p_crude_beats_blomqvist", json_number(row.p_crude_beats_blomqvist)},
                        {"valid_berry", row.valid_berry},
                        {"valid_blomqvist", row.valid_blomqvist}});
  }
  return Json{{"config",
               {{"command", "head-to-head"},
                {"params", to_json(r.params_base)},
                {"n", r.n},
                {"replicates", r.replicates},
                {"seed", r.seed},
                {"error_spec", to_json(r.error_spec)}}},
              {"rows", std::move(rows)}};
}

}  // namespace rtm

#pragma once

// Simulation studies and the end-to-end analysis of one pre/post dataset.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtm/errors.hpp"
#include "rtm/estimators.hpp"
#include "rtm/inference.hpp"
#include "rtm/model.hpp"
#include "rtm/parallel.hpp"
#include "rtm/sample.hpp"
#include "rtm/simulate.hpp"

namespace rtm {

inline constexpr std::array<SlopeMethod, 4> kAllMethods = {
    SlopeMethod::crude, SlopeMethod::berry, SlopeMethod::blomqvist, SlopeMethod::true_slope};

// Box-plot summary; quartiles use the same type-1 rule as the bootstrap.
struct Summary {
  std::size_t count = 0;   // finite values summarized
  std::size_t failed = 0;  // replicates where the estimator was undefined
  double mean = 0.0;
  double variance = 0.0;   // n - 1 denominator
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
    else ++s.failed;
  }
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  s.min = v.front();
  s.max = v.back();
  s.q1 = empirical_quantile(v, 0.25);
  s.median = empirical_quantile(v, 0.5);
  s.q3 = empirical_quantile(v, 0.75);
  return s;
}

// Repeatability implied by the generating parameters, sigma2 / (sigma2 + delta2).
inline double true_repeatability(const PopulationParams& p) {
  return p.sigma2() / (p.sigma2() + p.delta2());
}

// Error specification a simulation study hands to the Blomqvist estimator when
// none is given: the true repeatability.
inline ErrorSpec default_simulation_error_spec(const PopulationParams& p) {
  return Repeatability{true_repeatability(p)};
}

struct SamplingDistReport {
  PopulationParams params;
  std::size_t n;
  std::size_t replicates;
  std::uint64_t seed;
  ErrorSpec error_spec;
  std::array<Summary, 4> summaries;                 // indexed like kAllMethods
  std::array<std::vector<double>, 4> values;        // per replicate; NaN where undefined

  const Summary& summary(SlopeMethod m) const { return summaries[static_cast<std::size_t>(m)]; }
  const std::vector<double>& slopes(SlopeMethod m) const {
    return values[static_cast<std::size_t>(m)];
  }
};

namespace detail {

struct ReplicateSlopes {
  double crude;
  double berry;
  double blomqvist;
  double true_value;
};

inline ReplicateSlopes all_slopes(const SimulatedSample& s, const ErrorSpec& spec) {
  const auto nan = std::nan("");
  auto guarded = [&](auto&& f) -> double {
    try {
      return f();
    } catch (const DegenerateSampleError&) {
      return nan;
    } catch (const SingularityError&) {
      return nan;
    }
  };
  return {guarded([&] { return crude_slope(s.observed).value; }),
          guarded([&] { return berry_slope(s.observed).estimate.value; }),
          guarded([&] { return blomqvist_slope(s.observed, spec).estimate.value; }),
          guarded([&] { return true_slope(s.latent).value; })};
}

}  // namespace detail

// Draws `replicates` independent samples of size n (replicate r uses seed
// (seed, r)) and summarizes the four slope estimates across them.
inline SamplingDistReport run_sampling_distribution(const PopulationParams& params, std::size_t n,
                                                    std::size_t replicates,
                                                    const ErrorSpec& error_spec,
                                                    std::uint64_t seed, Parallelism par = {}) {
  if (replicates < 100) throw UsageError("sampling distribution needs at least 100 replicates");
  if (n < 10) throw UsageError("sampling distribution needs samples of at least 10 subjects");

  SamplingDistReport report{params, n, replicates, seed, error_spec, {}, {}};
  for (auto& v : report.values) v.assign(replicates, 0.0);
  parallel_for(replicates, par, [&](std::size_t r) {
    const auto sample = draw_sample(params, n, SeedSpec{seed, r});
    const auto s = detail::all_slopes(sample, error_spec);
    report.values[0][r] = s.crude;
    report.values[1][r] = s.berry;
    report.values[2][r] = s.blomqvist;
    report.values[3][r] = s.true_value;
  });
  for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
    report.summaries[m] = summarize(report.values[m]);
  }
  return report;
}

struct HeadToHeadRow {
  double beta;
  double p_crude_beats_berry;
  double p_crude_beats_blomqvist;
  std::size_t valid_berry;
  std::size_t valid_blomqvist;
};

struct HeadToHeadReport {
  PopulationParams params_base;
  std::size_t n;
  std::size_t replicates;
  std::uint64_t seed;
  ErrorSpec error_spec;
  std::vector<HeadToHeadRow> rows;
};

// -2.0, -1.9, ..., 0.5
inline std::vector<double> default_head_to_head_betas() {
  std::vector<double> betas;
  for (int i = -20; i <= 5; ++i) betas.push_back(static_cast<double>(i) / 10.0);
  return betas;
}

// For each beta, the fraction of samples where |crude - beta| is strictly
// smaller than the error of the corrected estimate. Sample r of grid point j
// uses stream (seed, r, lane j + 1).
inline HeadToHeadReport run_head_to_head(const PopulationParams& params_base,
                                         std::span<const double> beta_grid, std::size_t n,
                                         std::size_t replicates, const ErrorSpec& error_spec,
                                         std::uint64_t seed, Parallelism par = {}) {
  if (replicates < 1000) throw UsageError("head-to-head needs at least 1000 replicates");
  if (n < 10) throw UsageError("head-to-head needs samples of at least 10 subjects");

  HeadToHeadReport report{params_base, n, replicates, seed, error_spec, {}};
  for (std::size_t j = 0; j < beta_grid.size(); ++j) {
    const double beta = beta_grid[j];
    const auto params = params_base.with_beta(beta);
    std::vector<detail::ReplicateSlopes> slopes(replicates);
    parallel_for(replicates, par, [&](std::size_t r) {
      auto stream = derive_stream(SeedSpec{seed, r}, j + 1);
      slopes[r] = detail::all_slopes(draw_sample(params, n, stream), error_spec);
    });
    std::size_t valid_b = 0, wins_b = 0, valid_e = 0, wins_e = 0;
    for (const auto& s : slopes) {
      if (std::isnan(s.crude)) continue;
      const double err_c = std::abs(s.crude - beta);
      if (!std::isnan(s.berry)) {
        ++valid_b;
        wins_b += err_c < std::abs(s.berry - beta) ? 1 : 0;
      }
      if (!std::isnan(s.blomqvist)) {
        ++valid_e;
        wins_e += err_c < std::abs(s.blomqvist - beta) ? 1 : 0;
      }
    }
    auto frac = [](std::size_t k, std::size_t total) {
      return total == 0 ? std::nan("") : static_cast<double>(k) / static_cast<double>(total);
    };
    report.rows.push_back({beta, frac(wins_b, valid_b), frac(wins_e, valid_e), valid_b, valid_e});
  }
  return report;
}

struct AnalyzeOptions {
  std::size_t resamples = 10000;
  double level = 0.95;
  std::size_t n_perm = 999;
  std::optional<double> known_repeatability;
  bool negate_change = false;  // report slopes for x1 - x2 instead of x2 - x1
};

struct AnalyzeConfig {
  std::string source;                     // data path, or "simulated"
  std::optional<PopulationParams> params; // set for simulated samples
  std::uint64_t seed;
  std::optional<ErrorSpec> error_spec;
  AnalyzeOptions options;
};

struct AnalyzeReport {
  AnalyzeConfig config;
  SampleStats stats;
  SlopeEstimate crude;
  AdjustedSlope berry;
  std::optional<AdjustedSlope> blomqvist;
  BootstrapResult bootstrap_crude;
  std::optional<BootstrapResult> bootstrap_blomqvist;
  RepeatabilityInterval repeatability_interval;
  PermutationResult permutation;
  PitmanResult pitman;
  std::optional<NullDecision> decision;
  std::string decision_source;  // "known_repeatability" or "error_spec"
  std::vector<std::string> warnings;
};

inline constexpr const char* kPermutationNullLabel = "x₁ ⟂ x₂ (β = −1)";
inline constexpr const char* kPitmanNullLabel =
    "var(x₂)/var(x₁) = 1 (not the β = 0 null)";

inline std::string berry_null_warning() {
  return "Berry-adjusted slope must not be compared with 0: under beta = 0 its expectation is "
         "(sigma2/var_x1)(1 - 1/sqrt(1 + nu2/var_x1)), which is positive and depends on the "
         "unknown nu2. The frequently quoted form (delta2/var_x1)(1/sqrt(1 + nu2/var_x1) - 1) "
         "is negative and disagrees with direct simulation.";
}

// Full analysis of one dataset. Streams: (seed, 1) crude bootstrap,
// (seed, 2) Blomqvist bootstrap, (seed, 3) permutation test, so adding an
// error specification leaves the crude and Berry sections untouched.
// A repeatability error specification is converted to delta2 once, from the
// full sample, and that delta2 is held fixed across bootstrap resamples.
inline AnalyzeReport analyze_dataset(const ObservedSample& obs,
                                     const std::optional<ErrorSpec>& error_spec,
                                     const AnalyzeOptions& options, std::uint64_t seed,
                                     Parallelism par = {}, std::string source = "data") {
  if (obs.size() < 3) throw SampleSizeError("analysis needs at least 3 subjects");
  if (options.known_repeatability) check_repeatability(*options.known_repeatability);

  const double sign = options.negate_change ? -1.0 : 1.0;
  AnalyzeReport report{};
  report.config = {std::move(source), std::nullopt, seed, error_spec, options};
  report.stats = sample_stats(obs);
  report.stats.correlation();

  report.crude = crude_slope(obs);
  report.berry = berry_slope(obs);

  auto crude_stream = derive_stream({seed, 1});
  const auto boot_d = bootstrap_slope(obs, SlopeMethod::crude, std::nullopt, options.resamples,
                                      options.level, crude_stream, par);
  report.repeatability_interval = nonrejection_repeatability(boot_d.ci_low, boot_d.ci_high);

  std::optional<double> delta2;
  if (error_spec) {
    delta2 = detail::resolve_error_variance(*error_spec, report.stats.var_x1);
    report.blomqvist = blomqvist_slope(obs, ErrorVariance{*delta2});
    auto blomqvist_stream = derive_stream({seed, 2});
    const auto boot_e = bootstrap_slope(obs, SlopeMethod::blomqvist, ErrorVariance{*delta2},
                                        options.resamples, options.level, blomqvist_stream, par);
    report.bootstrap_blomqvist = options.negate_change ? negated(boot_e) : boot_e;
    if (boot_e.failure_warning) {
      report.warnings.push_back("Blomqvist bootstrap: " + std::to_string(boot_e.n_failed) +
                                " resamples had var(x1) <= delta2 and were dropped");
    }
  }

  std::optional<double> null_r;
  if (options.known_repeatability) {
    null_r = options.known_repeatability;
    report.decision_source = "known_repeatability";
  } else if (delta2) {
    null_r = 1.0 - *delta2 / report.stats.var_x1;
    report.decision_source = "error_spec";
  }
  if (null_r) {
    auto d = test_null_given_R(boot_d, *null_r);
    d.null_value *= sign;
    report.decision = d;
  }

  auto perm_stream = derive_stream({seed, 3});
  report.permutation = permutation_test_independence(obs, options.n_perm, perm_stream);
  report.pitman = pitman_test(obs);

  if (boot_d.failure_warning) {
    report.warnings.push_back("crude bootstrap: " + std::to_string(boot_d.n_failed) +
                              " resamples had constant x1 and were dropped");
  }
  report.warnings.push_back(berry_null_warning());

  report.bootstrap_crude = options.negate_change ? negated(boot_d) : boot_d;
  if (options.negate_change) {
    report.crude.value = -report.crude.value;
    report.berry.estimate.value = -report.berry.estimate.value;
    for (auto& v : report.berry.adjusted_change) v = -v;
    if (report.blomqvist) {
      report.blomqvist->estimate.value = -report.blomqvist->estimate.value;
      for (auto& v : report.blomqvist->adjusted_change) v = -v;
    }
  }
  return report;
}

// One simulated sample run through analyze_dataset, with the decision taken
// at the repeatability implied by the parameters. The sample uses stream
// (seed, 0).
inline AnalyzeReport run_bootstrap_demo(const PopulationParams& params, std::size_t n,
                                        std::size_t resamples, std::uint64_t seed,
                                        const std::optional<ErrorSpec>& error_spec = std::nullopt,
                                        double level = 0.95, std::size_t n_perm = 999,
                                        Parallelism par = {}) {
  const auto sample = draw_sample(params, n, SeedSpec{seed, 0});
  AnalyzeOptions options;
  options.resamples = resamples;
  options.level = level;
  options.n_perm = n_perm;
  const double r = true_repeatability(params);
  if (r > 0.0) options.known_repeatability = r;

  auto report = analyze_dataset(sample.observed, error_spec, options, seed, par, "simulated");
  report.config.params = params;

  const double exact = null_berry_slope(params);
  const double quoted = null_berry_slope_literature_form(params);
  report.warnings.push_back("Berry null expectation at these parameters: " +
                            std::to_string(exact) + " (covariance calculation) vs " +
                            std::to_string(quoted) + " (frequently quoted form)");
  return report;
}

}  // namespace rtm

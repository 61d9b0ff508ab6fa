#pragma once

// Resampling inference for pre/post slope studies.
//
// The bootstrap resamples whole (x1, x2) pairs with replacement and reports a
// percentile interval. Quantiles everywhere use the inverse empirical CDF
// (type 1): Q(p) = x_(k) with k = ceil(n p), taking the lower order statistic
// when n p is an integer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtm/errors.hpp"
#include "rtm/estimators.hpp"
#include "rtm/parallel.hpp"
#include "rtm/sample.hpp"
#include "rtm/simulate.hpp"

namespace rtm {

inline double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of an empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile probability must lie in [0, 1]");
  const double n = static_cast<double>(sorted.size());
  const double np = p * n;
  double k = std::ceil(np);
  const double nearest = std::nearbyint(np);
  if (std::abs(np - nearest) <= 1e-9 * std::max(1.0, np)) k = nearest;
  k = std::clamp(k, 1.0, n);
  return sorted[static_cast<std::size_t>(k) - 1];
}

struct BootstrapResult {
  SlopeMethod method;
  std::vector<double> replicates;  // successful replicates, in replicate-index order
  double ci_low;
  double ci_high;
  double level;
  double point_estimate;
  std::size_t n_failed;
  bool failure_warning;  // n_failed > 1% of the requested resamples

  std::size_t requested() const { return replicates.size() + n_failed; }
};

namespace detail {

inline double slope_from_moments(const PairMoments& m, SlopeMethod method,
                                 const std::optional<ErrorSpec>& spec) {
  switch (method) {
    case SlopeMethod::crude: return crude_from(m);
    case SlopeMethod::berry: return berry_from(m);
    case SlopeMethod::blomqvist: return blomqvist_from(m, *spec);
    case SlopeMethod::true_slope: break;
  }
  throw UsageError("the true slope needs latent values and cannot be bootstrapped");
}

inline void check_method_spec(SlopeMethod method, const std::optional<ErrorSpec>& spec) {
  if (method == SlopeMethod::true_slope) {
    throw UsageError("the true slope needs latent values and cannot be bootstrapped");
  }
  if ((method == SlopeMethod::blomqvist) != spec.has_value()) {
    throw UsageError("an error specification is required for, and only for, the Blomqvist slope");
  }
}

}  // namespace detail

inline double point_slope(const ObservedSample& obs, SlopeMethod method,
                          const std::optional<ErrorSpec>& spec) {
  detail::check_method_spec(method, spec);
  switch (method) {
    case SlopeMethod::crude: return crude_slope(obs).value;
    case SlopeMethod::berry: return berry_slope(obs).estimate.value;
    default: return blomqvist_slope(obs, *spec).estimate.value;
  }
}

// Percentile bootstrap of a slope estimator. One 64-bit key is drawn from
// `stream`; resample b then uses its own stream derived from (key, b), so the
// result does not depend on the thread count. Resamples where the estimator
// is undefined (constant x1, singular Blomqvist) are dropped and counted.
inline BootstrapResult bootstrap_slope(const ObservedSample& obs, SlopeMethod method,
                                       const std::optional<ErrorSpec>& error_spec,
                                       std::size_t resamples, double level, Stream& stream,
                                       Parallelism par = {}) {
  detail::check_method_spec(method, error_spec);
  if (resamples < 100) throw UsageError("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");

  const double point = point_slope(obs, method, error_spec);
  const std::uint64_t key = stream();
  const std::size_t n = obs.size();
  const auto x1 = obs.x1();
  const auto x2 = obs.x2();

  std::vector<double> values(resamples);
  parallel_for(resamples, par, [&](std::size_t b) {
    auto rs = derive_stream({key, b});
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rs.index(n);
    const auto m = detail::pair_moments(
        n, [&](std::size_t i) { return x1[idx[i]]; }, [&](std::size_t i) { return x2[idx[i]]; });
    try {
      values[b] = detail::slope_from_moments(m, method, error_spec);
    } catch (const DegenerateSampleError&) {
      values[b] = std::nan("");
    } catch (const SingularityError&) {
      values[b] = std::nan("");
    }
  });

  BootstrapResult out{method, {}, 0.0, 0.0, level, point, 0, false};
  out.replicates.reserve(resamples);
  for (double v : values) {
    if (std::isnan(v)) {
      ++out.n_failed;
    } else {
      out.replicates.push_back(v);
    }
  }
  if (out.replicates.empty()) {
    throw InferenceError("every bootstrap resample was degenerate");
  }
  out.failure_warning = static_cast<double>(out.n_failed) > 0.01 * static_cast<double>(resamples);

  std::vector<double> sorted = out.replicates;
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  out.ci_low = empirical_quantile(sorted, tail);
  out.ci_high = empirical_quantile(sorted, 1.0 - tail);
  return out;
}

// Same result expressed for the negated change (x1 - x2): values flip sign
// and the interval bounds swap.
inline BootstrapResult negated(BootstrapResult r) {
  for (auto& v : r.replicates) v = -v;
  r.point_estimate = -r.point_estimate;
  const double lo = r.ci_low;
  r.ci_low = -r.ci_high;
  r.ci_high = -lo;
  return r;
}

struct RepeatabilityInterval {
  double low;
  double high;
  bool empty;
  bool low_open;  // low was clipped at 0, which is excluded
};

// Repeatabilities R in (0, 1] whose null crude slope R - 1 lies inside the
// crude-slope interval [ci_low, ci_high].
inline RepeatabilityInterval nonrejection_repeatability(double ci_low, double ci_high) {
  if (!(ci_low <= ci_high)) throw UsageError("interval bounds out of order");
  const double lo = 1.0 + ci_low;
  const double hi = 1.0 + ci_high;
  if (hi <= 0.0 || lo > 1.0) return {0.0, 0.0, true, false};
  return {std::max(0.0, lo), std::min(1.0, hi), false, lo <= 0.0};
}

inline bool contains(const RepeatabilityInterval& ri, double r) {
  if (ri.empty) return false;
  if (r > ri.high) return false;
  return ri.low_open ? r > ri.low : r >= ri.low;
}

struct NullDecision {
  double repeatability;
  double null_value;  // R - 1
  bool rejected;
};

inline NullDecision test_null_given_R(const BootstrapResult& boot, double repeatability) {
  if (boot.method != SlopeMethod::crude) {
    throw UsageError("the repeatability decision applies to crude-slope intervals only");
  }
  const double null_value = null_crude_slope(repeatability);
  const bool rejected = null_value < boot.ci_low || null_value > boot.ci_high;
  return {repeatability, null_value, rejected};
}

struct PermutationResult {
  double p_value;
  std::size_t n_permutations;
  double observed_statistic;
  bool exact;  // all n! orderings enumerated
};

// Tests x1 independent of x2 (equivalently beta = -1 in the change model),
// not the absence of a differential effect. Statistic: Pearson r(x1, x2);
// two-sided. When n! <= n_perm every ordering is enumerated and
// p = #{|r_perm| >= |r_obs|} / n!; otherwise n_perm random shuffles of x2 are
// drawn and p = (#{|r_perm| >= |r_obs|} + 1) / (n_perm + 1).
inline PermutationResult permutation_test_independence(const ObservedSample& obs,
                                                       std::size_t n_perm, Stream& stream) {
  const std::size_t n = obs.size();
  if (n < 3) throw SampleSizeError("permutation test needs at least 3 subjects");
  if (n_perm < 99) throw UsageError("permutation test needs at least 99 permutations");

  const auto m = detail::pair_moments(obs.x1(), obs.x2());
  const auto r_obs = detail::correlation(m);
  if (!r_obs) throw DegenerateSampleError("permutation test needs non-constant x1 and x2");

  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = obs.x1()[i] - m.mean1;
    b[i] = obs.x2()[i] - m.mean2;
  }
  const double scale = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0) *
                                 std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  const double threshold = std::abs(*r_obs) - 1e-12;
  auto extreme = [&](const std::vector<double>& perm) {
    return std::abs(std::inner_product(a.begin(), a.end(), perm.begin(), 0.0) / scale) >= threshold;
  };

  std::optional<std::size_t> orderings = 1;
  for (std::size_t k = 2; k <= n && orderings; ++k) {
    if (*orderings > n_perm / k) orderings.reset();
    else *orderings *= k;
  }

  if (orderings && *orderings <= n_perm) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> perm(n);
    std::size_t hits = 0;
    do {
      for (std::size_t i = 0; i < n; ++i) perm[i] = b[order[i]];
      hits += extreme(perm) ? 1 : 0;
    } while (std::next_permutation(order.begin(), order.end()));
    return {static_cast<double>(hits) / static_cast<double>(*orderings), *orderings, *r_obs, true};
  }

  std::vector<double> perm = b;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_perm; ++k) {
    std::shuffle(perm.begin(), perm.end(), stream);
    hits += extreme(perm) ? 1 : 0;
  }
  const double p = static_cast<double>(hits + 1) / static_cast<double>(n_perm + 1);
  return {p, n_perm, *r_obs, false};
}

}  // namespace rtm

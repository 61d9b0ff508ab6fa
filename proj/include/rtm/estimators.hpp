#pragma once

// Slope estimators on one sample of paired pre/post measurements.
//
// All variances and covariances use the n-1 denominator. Each slope is the
// ordinary least-squares slope of some change variable on x1:
//
//   crude      d   = x2 - x1
//   berry      d_B = x2 - mean2 - r (x1 - mean1)          r = Pearson(x1, x2)
//   blomqvist  d_e = x2 - mean2 + B (x1 - mean1)          B from the crude slope and delta2
//   true       D   = X2 - X1 regressed on X1 (simulation only)

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "rtm/errors.hpp"
#include "rtm/model.hpp"
#include "rtm/sample.hpp"

namespace rtm {

enum class SlopeMethod { crude, berry, blomqvist, true_slope };

inline std::string_view to_string(SlopeMethod m) {
  switch (m) {
    case SlopeMethod::crude: return "crude";
    case SlopeMethod::berry: return "berry";
    case SlopeMethod::blomqvist: return "blomqvist";
    case SlopeMethod::true_slope: return "true";
  }
  return "unknown";
}

struct ErrorVariance {
  double value;
};
struct Repeatability {
  double value;
};
// Within-subject variance for the Blomqvist correction, given directly or
// through the repeatability R (delta2 = (1 - R) var(x1)).
using ErrorSpec = std::variant<ErrorVariance, Repeatability>;

struct BerryAux {
  double rho;
};
struct BlomqvistAux {
  double delta2;
  double b_coefficient;
};

struct SlopeEstimate {
  SlopeMethod method;
  double value;
  std::variant<std::monostate, BerryAux, BlomqvistAux> auxiliary;
};

struct AdjustedSlope {
  std::vector<double> adjusted_change;
  SlopeEstimate estimate;
};

struct SampleStats {
  std::size_t n;
  double mean_x1;
  double mean_x2;
  double var_x1;
  double var_x2;
  double cov_x1x2;
  std::optional<double> pearson_r;  // empty when either column is constant

  double correlation() const {
    if (!pearson_r) throw DegenerateSampleError("correlation undefined: a column has zero variance");
    return *pearson_r;
  }
};

struct PitmanResult {
  double statistic;
  double p_value;
  std::size_t n;
};

namespace detail {

struct PairMoments {
  std::size_t n;
  double mean1;
  double mean2;
  double var1;
  double var2;
  double cov;
};

// Two-pass moments of the pairs (a(i), b(i)), i in [0, n).
template <class A, class B>
PairMoments pair_moments(std::size_t n, A&& a, B&& b) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s1 += a(i);
    s2 += b(i);
  }
  const double m1 = s1 / static_cast<double>(n);
  const double m2 = s2 / static_cast<double>(n);
  double q11 = 0.0, q22 = 0.0, q12 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = a(i) - m1;
    const double v = b(i) - m2;
    q11 += u * u;
    q22 += v * v;
    q12 += u * v;
  }
  const double dof = static_cast<double>(n - 1);
  return {n, m1, m2, q11 / dof, q22 / dof, q12 / dof};
}

inline PairMoments pair_moments(std::span<const double> a, std::span<const double> b) {
  return pair_moments(
      a.size(), [&](std::size_t i) { return a[i]; }, [&](std::size_t i) { return b[i]; });
}

inline std::optional<double> correlation(const PairMoments& m) {
  if (!(m.var1 > 0.0) || !(m.var2 > 0.0)) return std::nullopt;
  return clamp_unit(m.cov / std::sqrt(m.var1 * m.var2));
}

inline void require_x1_spread(const PairMoments& m) {
  if (!(m.var1 > 0.0)) throw DegenerateSampleError("pre-test values have zero variance");
}

inline double crude_from(const PairMoments& m) {
  require_x1_spread(m);
  return m.cov / m.var1 - 1.0;
}

inline double berry_from(const PairMoments& m) {
  require_x1_spread(m);
  const auto r = correlation(m);
  if (!r) throw DegenerateSampleError("Berry slope needs non-constant x1 and x2");
  return m.cov / m.var1 - *r;
}

inline double resolve_error_variance(const ErrorSpec& spec, double var_x1) {
  double delta2 = 0.0;
  if (const auto* r = std::get_if<Repeatability>(&spec)) {
    check_repeatability(r->value);
    delta2 = (1.0 - r->value) * var_x1;
  } else {
    delta2 = std::get<ErrorVariance>(spec).value;
    if (!std::isfinite(delta2) || delta2 < 0.0) {
      throw ParameterError("error variance must be finite and non-negative");
    }
  }
  check_signal_variance(var_x1, delta2);
  return delta2;
}

inline double blomqvist_from(const PairMoments& m, const ErrorSpec& spec) {
  require_x1_spread(m);
  const double delta2 = resolve_error_variance(spec, m.var1);
  return blomqvist_invert(m.cov / m.var1 - 1.0, m.var1, delta2);
}

inline double ols_slope(std::span<const double> y, std::span<const double> x) {
  const auto m = pair_moments(x, y);
  require_x1_spread(m);
  return m.cov / m.var1;
}

}  // namespace detail

inline SampleStats sample_stats(const ObservedSample& obs) {
  const auto m = detail::pair_moments(obs.x1(), obs.x2());
  return {m.n, m.mean1, m.mean2, m.var1, m.var2, m.cov, detail::correlation(m)};
}

inline SlopeEstimate crude_slope(const ObservedSample& obs) {
  const auto m = detail::pair_moments(obs.x1(), obs.x2());
  return {SlopeMethod::crude, detail::crude_from(m), {}};
}

inline AdjustedSlope berry_slope(const ObservedSample& obs) {
  const auto m = detail::pair_moments(obs.x1(), obs.x2());
  detail::require_x1_spread(m);
  const auto r = detail::correlation(m);
  if (!r) throw DegenerateSampleError("Berry slope needs non-constant x1 and x2");

  const auto x1 = obs.x1();
  const auto x2 = obs.x2();
  std::vector<double> adjusted(obs.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    adjusted[i] = x2[i] - m.mean2 - *r * (x1[i] - m.mean1);
  }
  const double slope = detail::ols_slope(adjusted, x1);
  return {std::move(adjusted), {SlopeMethod::berry, slope, BerryAux{*r}}};
}

inline AdjustedSlope blomqvist_slope(const ObservedSample& obs, const ErrorSpec& error_spec) {
  const auto m = detail::pair_moments(obs.x1(), obs.x2());
  detail::require_x1_spread(m);
  const double delta2 = detail::resolve_error_variance(error_spec, m.var1);
  const double beta_c = m.cov / m.var1 - 1.0;
  const double b = blomqvist_B_coefficient(beta_c, m.var1, delta2);

  const auto x1 = obs.x1();
  const auto x2 = obs.x2();
  std::vector<double> adjusted(obs.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    adjusted[i] = x2[i] - m.mean2 + b * (x1[i] - m.mean1);
  }
  const double slope = detail::ols_slope(adjusted, x1);
  return {std::move(adjusted), {SlopeMethod::blomqvist, slope, BlomqvistAux{delta2, b}}};
}

inline SlopeEstimate true_slope(const LatentSample& latent) {
  const auto m = detail::pair_moments(latent.X1(), latent.X2());
  if (!(m.var1 > 0.0)) throw DegenerateSampleError("true pre-test values have zero variance");
  return {SlopeMethod::true_slope, m.cov / m.var1 - 1.0, {}};
}

// Pitman's paired test of var(x1) = var(x2): correlation between x1 + x2 and
// x1 - x2 with a two-sided t test on n - 2 degrees of freedom.
inline PitmanResult pitman_test(const ObservedSample& obs) {
  const std::size_t n = obs.size();
  if (n < 3) throw SampleSizeError("Pitman test needs at least 3 subjects");
  const auto base = detail::pair_moments(obs.x1(), obs.x2());
  if (!(base.var1 > 0.0) || !(base.var2 > 0.0)) {
    throw DegenerateSampleError("Pitman test needs non-constant x1 and x2");
  }
  const auto x1 = obs.x1();
  const auto x2 = obs.x2();
  const auto m = detail::pair_moments(
      n, [&](std::size_t i) { return x1[i] + x2[i]; },
      [&](std::size_t i) { return x1[i] - x2[i]; });
  if (!(m.var2 > 0.0)) return {0.0, 1.0, n};
  if (!(m.var1 > 0.0)) throw DegenerateSampleError("Pitman test: sums have zero variance");

  const double r = detail::clamp_unit(m.cov / std::sqrt(m.var1 * m.var2));
  if (std::abs(r) >= 1.0) return {r, 0.0, n};
  const double dof = static_cast<double>(n - 2);
  const double t = r * std::sqrt(dof) / std::sqrt(1.0 - r * r);
  const boost::math::students_t dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {r, std::min(1.0, p), n};
}

}  // namespace rtm

#pragma once

// Closed-form population quantities of the pre/post change model
//
//   X1 ~ N(mu, sigma2)
//   X2 = X1 + (alpha + beta * X1) + xi,   xi ~ N(0, nu2)
//   x1 = X1 + e1,  x2 = X2 + e2,          e1, e2 ~ N(0, delta2)
//
// Everything here is an exact algebraic expression of the six parameters.
// Nothing depends on mu or alpha except the means.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rtm/errors.hpp"

namespace rtm {

class PopulationParams {
 public:
  // Throws ParameterError unless every value is finite, the variances are
  // non-negative and sigma2 + delta2 > 0.
  static PopulationParams from_variances(double mu, double sigma2, double alpha, double beta,
                                         double nu2, double delta2) {
    return PopulationParams(mu, sigma2, alpha, beta, nu2, delta2);
  }

  static PopulationParams from_std_devs(double mu, double sigma, double alpha, double beta,
                                        double nu, double delta) {
    if (!(sigma >= 0.0) || !(nu >= 0.0) || !(delta >= 0.0)) {
      throw ParameterError("standard deviations must be non-negative");
    }
    return PopulationParams(mu, sigma * sigma, alpha, beta, nu * nu, delta * delta);
  }

  // Systolic blood pressure values: mu=141, sigma=13.6, alpha=-20, nu=10, delta=9.1.
  static PopulationParams systolic_bp(double beta = 0.0) {
    return from_std_devs(141.0, 13.6, -20.0, beta, 10.0, 9.1);
  }

  double mu() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double nu2() const { return nu2_; }
  double delta2() const { return delta2_; }

  PopulationParams with_beta(double beta) const {
    return PopulationParams(mu_, sigma2_, alpha_, beta, nu2_, delta2_);
  }
  PopulationParams with_delta2(double delta2) const {
    return PopulationParams(mu_, sigma2_, alpha_, beta_, nu2_, delta2);
  }
  PopulationParams with_nu2(double nu2) const {
    return PopulationParams(mu_, sigma2_, alpha_, beta_, nu2, delta2_);
  }
  PopulationParams with_location(double mu, double alpha) const {
    return PopulationParams(mu, sigma2_, alpha, beta_, nu2_, delta2_);
  }

  bool operator==(const PopulationParams&) const = default;

 private:
  PopulationParams(double mu, double sigma2, double alpha, double beta, double nu2, double delta2)
      : mu_(mu), sigma2_(sigma2), alpha_(alpha), beta_(beta), nu2_(nu2), delta2_(delta2) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(mu) || !finite(sigma2) || !finite(alpha) || !finite(beta) || !finite(nu2) ||
        !finite(delta2)) {
      throw ParameterError("population parameters must be finite");
    }
    if (sigma2 < 0.0 || nu2 < 0.0 || delta2 < 0.0) {
      throw ParameterError("population variances must be non-negative");
    }
    if (!(sigma2 + delta2 > 0.0)) {
      throw ParameterError("observed pre-test variance sigma2 + delta2 must be positive");
    }
  }

  double mu_;
  double sigma2_;
  double alpha_;
  double beta_;
  double nu2_;
  double delta2_;
};

struct PopulationMoments {
  double mean_x1;
  double var_x1;
  double mean_x2;
  double var_x2;
  double cov_x1x2;
  double rho;
  double repeatability;
};

struct PopulationSlopes {
  double crude;
  double berry;
  double true_beta;
  double crude_bias;
};

namespace detail {

inline double var_x1(const PopulationParams& p) { return p.sigma2() + p.delta2(); }

inline double var_x2(const PopulationParams& p) {
  const double g = 1.0 + p.beta();
  return g * g * p.sigma2() + p.nu2() + p.delta2();
}

inline double clamp_unit(double r) { return r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r); }

inline double population_rho(const PopulationParams& p) {
  const double v2 = var_x2(p);
  if (!(v2 > 0.0)) {
    throw ParameterError("post-test variance is zero; correlation undefined");
  }
  return clamp_unit((1.0 + p.beta()) * p.sigma2() / std::sqrt(var_x1(p) * v2));
}

}  // namespace detail

inline PopulationMoments population_moments(const PopulationParams& p) {
  PopulationMoments m{};
  m.mean_x1 = p.mu();
  m.var_x1 = detail::var_x1(p);
  m.mean_x2 = (1.0 + p.beta()) * p.mu() + p.alpha();
  m.var_x2 = detail::var_x2(p);
  m.cov_x1x2 = (1.0 + p.beta()) * p.sigma2();
  m.rho = detail::population_rho(p);
  m.repeatability = p.sigma2() / m.var_x1;
  return m;
}

// Slope of (x2 - x1) on x1: (beta sigma2 - delta2) / (sigma2 + delta2), arranged
// so that delta2 = 0 returns beta exactly.
inline double crude_slope_population(const PopulationParams& p) {
  return p.beta() - (1.0 + p.beta()) * p.delta2() / detail::var_x1(p);
}

// Slope of the Berry-adjusted change on x1: -rho + (1 + beta) sigma2 / (sigma2 + delta2).
inline double berry_slope_population(const PopulationParams& p) {
  const double rho = detail::population_rho(p);
  return -rho + (1.0 + p.beta()) * p.sigma2() / detail::var_x1(p);
}

inline PopulationSlopes population_slopes(const PopulationParams& p) {
  PopulationSlopes s{};
  s.crude = crude_slope_population(p);
  s.berry = berry_slope_population(p);
  s.true_beta = p.beta();
  s.crude_bias = -(1.0 + p.beta()) * p.delta2() / detail::var_x1(p);
  return s;
}

namespace detail {

inline void check_signal_variance(double var_x1, double delta2) {
  if (!std::isfinite(var_x1) || !std::isfinite(delta2) || delta2 < 0.0) {
    throw ParameterError("error variance must be finite and non-negative");
  }
  if (!(var_x1 > delta2)) {
    throw SingularityError("var_x1 = " + std::to_string(var_x1) +
                           ", delta2 = " + std::to_string(delta2));
  }
}

}  // namespace detail

// Recovers the true slope from a crude slope given the observed pre-test
// variance and the within-subject variance.
inline double blomqvist_invert(double beta_c, double var_x1, double delta2) {
  detail::check_signal_variance(var_x1, delta2);
  return (beta_c * var_x1 + delta2) / (var_x1 - delta2);
}

// Coefficient B of the adjusted change x2 - mean2 + B (x1 - mean1) whose
// regression on x1 reproduces blomqvist_invert.
inline double blomqvist_B_coefficient(double beta_c, double var_x1, double delta2) {
  detail::check_signal_variance(var_x1, delta2);
  return (1.0 + beta_c) * delta2 / (var_x1 - delta2) - 1.0;
}

inline void check_repeatability(double r) {
  if (!std::isfinite(r) || !(r > 0.0) || r > 1.0) {
    throw ParameterError("repeatability must lie in (0, 1]");
  }
}

// Expected crude slope under beta = 0: R - 1 = -delta2 / var_x1.
inline double null_crude_slope(double repeatability) {
  check_repeatability(repeatability);
  return repeatability - 1.0;
}

// Berry slope under beta = 0, i.e. (sigma2/var_x1) (1 - 1/sqrt(1 + nu2/var_x1)).
// This is never negative.
inline double null_berry_slope(const PopulationParams& p) {
  return berry_slope_population(p.with_beta(0.0));
}

// The expression often quoted for the Berry null,
// (delta2/var_x1) (1/sqrt(1 + nu2/var_x1) - 1), which is never positive.
// It disagrees with the covariance calculation in null_berry_slope (simulation
// sides with null_berry_slope); kept only so reports can show both numbers.
inline double null_berry_slope_literature_form(const PopulationParams& p) {
  const double v1 = detail::var_x1(p);
  return p.delta2() / v1 * (1.0 / std::sqrt(1.0 + p.nu2() / v1) - 1.0);
}

// Correlation between x1 and x2 when beta = 0:
// sigma2 / sqrt((sigma2 + delta2)(sigma2 + delta2 + nu2)).
inline double rho_star(const PopulationParams& p) { return detail::population_rho(p.with_beta(0.0)); }

// var_x2 / var_x1 when beta = 0.
inline double null_variance_ratio(const PopulationParams& p) {
  return 1.0 + p.nu2() / detail::var_x1(p);
}

struct SweepRow {
  double beta;
  double noise_ratio;  // delta2 / sigma2
  double crude;
  double berry;
  double rho;
};

// Rows ordered beta-major. delta2 is set to noise_ratio * sigma2 for each row.
inline std::vector<SweepRow> population_sweep(const PopulationParams& p,
                                              std::span<const double> beta_values,
                                              std::span<const double> noise_ratio_values) {
  if (!(p.sigma2() > 0.0)) {
    throw ParameterError("sweep requires sigma2 > 0");
  }
  for (double r : noise_ratio_values) {
    if (!std::isfinite(r) || r < 0.0) {
      throw ParameterError("noise ratios must be finite and non-negative");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(beta_values.size() * noise_ratio_values.size());
  for (double b : beta_values) {
    for (double r : noise_ratio_values) {
      const auto q = p.with_beta(b).with_delta2(r * p.sigma2());
      rows.push_back({b, r, crude_slope_population(q), berry_slope_population(q),
                      detail::population_rho(q)});
    }
  }
  return rows;
}

// lo, lo+step, ..., up to and including hi (hi is appended when the last
// step lands within 1e-9 of it).
inline std::vector<double> inclusive_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
    throw ParameterError("grid bounds must be finite");
  }
  if (hi < lo) return {};
  if (!(step > 0.0)) {
    throw ParameterError("grid step must be positive");
  }
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 2);
  for (long long i = 0; i <= count; ++i) {
    grid.push_back(lo + static_cast<double>(i) * step);
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(hi));
  if (std::abs(hi - grid.back()) <= tol) {
    grid.back() = hi;
  } else {
    grid.push_back(hi);
  }
  return grid;
}

}  // namespace rtm

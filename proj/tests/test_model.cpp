#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rtm/model.hpp"

namespace {

using rtm::PopulationParams;

// Values below were computed independently (Python, direct formula evaluation).
constexpr double kSystolicCrude = -0.3092579452515218;
constexpr double kSystolicBerry = 0.10134398725040217;
constexpr double kSystolicRho = 0.589398067498076;
constexpr double kSystolicR = 0.6907420547484782;

PopulationParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> beta(-2.5, 1.5), var(0.01, 400.0), loc(-500.0, 500.0);
  return PopulationParams::from_variances(loc(rng), var(rng), loc(rng), beta(rng), var(rng),
                                          var(rng));
}

TEST(PopulationParams, RejectsInvalidValues) {
  EXPECT_THROW(PopulationParams::from_variances(0, -1, 0, 0, 0, 1), rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_variances(0, 1, 0, 0, -1, 1), rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_variances(0, 1, 0, 0, 0, -1), rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_variances(0, 0, 0, 0, 1, 0), rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_variances(std::nan(""), 1, 0, 0, 0, 1), rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_variances(0, 1, 0, std::numeric_limits<double>::infinity(),
                                                0, 1),
               rtm::ParameterError);
  EXPECT_THROW(PopulationParams::from_std_devs(0, -1, 0, 0, 0, 1), rtm::ParameterError);
  EXPECT_NO_THROW(PopulationParams::from_variances(0, 0, 0, 0, 0, 1));
}

TEST(PopulationMoments, SystolicValues) {
  const auto m = rtm::population_moments(PopulationParams::systolic_bp());
  EXPECT_NEAR(m.var_x1, 267.77, 1e-10);
  EXPECT_NEAR(m.mean_x1, 141.0, 1e-12);
  EXPECT_NEAR(m.mean_x2, 121.0, 1e-12);
  EXPECT_NEAR(m.var_x2, 367.77, 1e-10);
  EXPECT_NEAR(m.cov_x1x2, 184.96, 1e-10);
  EXPECT_NEAR(m.repeatability, kSystolicR, 1e-12);
  EXPECT_NEAR(m.repeatability, 0.69, 0.005);
  EXPECT_NEAR(m.rho, kSystolicRho, 1e-12);
}

TEST(PopulationMoments, NoiseFreeIsPerfectlyCorrelated) {
  for (double beta : {-2.0, -1.5, -0.5, 0.0, 0.7}) {
    const auto p = PopulationParams::from_variances(3.0, 2.5, 1.0, beta, 0.0, 0.0);
    const auto m = rtm::population_moments(p);
    EXPECT_NEAR(m.rho, beta > -1.0 ? 1.0 : -1.0, 1e-15) << beta;
    EXPECT_EQ(m.repeatability, 1.0);
  }
}

TEST(PopulationMoments, ZeroPostVarianceIsAnError) {
  const auto p = PopulationParams::from_variances(0, 1, 0, -1.0, 0, 0);
  EXPECT_THROW(rtm::population_moments(p), rtm::ParameterError);
  EXPECT_THROW(rtm::berry_slope_population(p), rtm::ParameterError);
  EXPECT_DOUBLE_EQ(rtm::crude_slope_population(p), -1.0);
}

TEST(CrudeSlopePopulation, Examples) {
  EXPECT_NEAR(rtm::crude_slope_population(PopulationParams::systolic_bp()), kSystolicCrude, 1e-12);
  EXPECT_NEAR(rtm::crude_slope_population(PopulationParams::systolic_bp()), -0.31, 0.001);
  for (double d2 : {0.0, 1.0, 82.81, 1e4}) {
    const auto p = PopulationParams::from_variances(0, 184.96, 0, -1.0, 100, d2);
    EXPECT_EQ(rtm::crude_slope_population(p), -1.0);
  }
  const auto p = PopulationParams::from_variances(0, 184.96, 0, -0.5, 100, 0);
  EXPECT_EQ(rtm::crude_slope_population(p), -0.5);
}

TEST(BerrySlopePopulation, Examples) {
  EXPECT_NEAR(rtm::berry_slope_population(PopulationParams::from_variances(0, 5, 0, 0, 0, 0)), 0.0,
              1e-15);
  EXPECT_NEAR(rtm::berry_slope_population(PopulationParams::from_variances(0, 5, 0, -1.5, 0, 0)),
              0.5, 1e-15);
  EXPECT_NEAR(rtm::berry_slope_population(PopulationParams::systolic_bp()), kSystolicBerry, 1e-12);
  const auto noisy = PopulationParams::systolic_bp().with_delta2(100 * 184.96);
  EXPECT_NEAR(rtm::berry_slope_population(noisy), 2.6394297367679856e-05, 1e-12);
}

TEST(BlomqvistInvert, Examples) {
  EXPECT_NEAR(rtm::blomqvist_invert(kSystolicCrude, 267.77, 82.81), 0.0, 1e-12);
  EXPECT_NEAR(rtm::blomqvist_invert(-0.3093, 267.77, 82.81), 0.0, 1e-3);
  // telomere attrition slope 0.770 on the change d = x2 - x1 is -0.770
  EXPECT_NEAR(-rtm::blomqvist_invert(-0.770, 0.0309, 0.0162), 0.5165306122448979, 1e-12);
  EXPECT_NEAR(-rtm::blomqvist_invert(-0.770, 0.0309, 0.0162), 0.520, 0.01);
  EXPECT_DOUBLE_EQ(rtm::blomqvist_invert(0.37, 12.0, 0.0), 0.37);
}

TEST(BlomqvistInvert, SingularWhenErrorVarianceReachesObserved) {
  EXPECT_THROW(rtm::blomqvist_invert(0.1, 1.0, 1.0), rtm::SingularityError);
  EXPECT_THROW(rtm::blomqvist_invert(0.1, 1.0, 2.0), rtm::SingularityError);
  EXPECT_THROW(rtm::blomqvist_B_coefficient(0.1, 1.0, 1.5), rtm::SingularityError);
  EXPECT_THROW(rtm::blomqvist_invert(0.1, 1.0, -0.1), rtm::ParameterError);
  try {
    rtm::blomqvist_invert(0.1, 1.0, 1.0);
  } catch (const rtm::SingularityError& e) {
    EXPECT_NE(std::string(e.what()).find("estimated signal variance non-positive"),
              std::string::npos);
  }
}

TEST(BlomqvistBCoefficient, Examples) {
  const double b = rtm::blomqvist_B_coefficient(kSystolicCrude, 267.77, 82.81);
  // first form (beta delta2 - sigma2)/(sigma2 + delta2) at beta = 0
  EXPECT_NEAR(b, (0.0 * 82.81 - 184.96) / (184.96 + 82.81), 1e-12);
  EXPECT_NEAR(b, -0.6907, 1e-4);
  EXPECT_EQ(rtm::blomqvist_B_coefficient(0.42, 3.0, 0.0), -1.0);
  EXPECT_EQ(rtm::blomqvist_B_coefficient(-1.0, 3.0, 1.2), -1.0);
}

TEST(NullCrudeSlope, Examples) {
  EXPECT_NEAR(rtm::null_crude_slope(0.69), -0.31, 1e-12);
  EXPECT_EQ(rtm::null_crude_slope(1.0), 0.0);
  EXPECT_NEAR(-rtm::null_crude_slope(0.479), 0.521, 1e-12);
  EXPECT_NEAR(0.0162 / 0.0309, 0.521, 0.01);
  EXPECT_THROW(rtm::null_crude_slope(0.0), rtm::ParameterError);
  EXPECT_THROW(rtm::null_crude_slope(1.2), rtm::ParameterError);
  EXPECT_THROW(rtm::null_crude_slope(std::nan("")), rtm::ParameterError);
}

TEST(NullBerrySlope, Examples) {
  const auto sys = PopulationParams::systolic_bp(0.7);  // beta is ignored
  EXPECT_NEAR(rtm::null_berry_slope(sys), kSystolicBerry, 1e-12);
  EXPECT_NEAR(rtm::null_berry_slope(PopulationParams::from_variances(0, 7, 0, 0.3, 0, 0)), 0.0,
              1e-15);
  const auto no_error = PopulationParams::from_variances(0, 184.96, 0, 0, 100, 0);
  EXPECT_NEAR(rtm::null_berry_slope(no_error), 1.0 - 1.0 / std::sqrt(1.0 + 100.0 / 184.96), 1e-12);
  EXPECT_NEAR(rtm::null_berry_slope(no_error), 0.1943489873505755, 1e-12);
}

TEST(NullBerrySlope, LiteratureFormDisagreesInSign) {
  const auto sys = PopulationParams::systolic_bp();
  EXPECT_NEAR(rtm::null_berry_slope_literature_form(sys), -0.045373570416337564, 1e-12);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_params(rng);
    EXPECT_GE(rtm::null_berry_slope(p), 0.0);
    EXPECT_LE(rtm::null_berry_slope_literature_form(p), 0.0);
  }
}

TEST(RhoStar, Examples) {
  const auto sys = PopulationParams::systolic_bp();
  const double s1 = std::sqrt(267.77), s2 = std::sqrt(367.77);
  EXPECT_NEAR(rtm::rho_star(sys), s1 / s2 - 82.81 / (s1 * s2), 1e-14);
  EXPECT_NEAR(rtm::rho_star(sys), kSystolicRho, 1e-12);
  EXPECT_NEAR(rtm::rho_star(PopulationParams::from_variances(0, 4, 0, 0, 0, 0)), 1.0, 1e-15);
  EXPECT_EQ(rtm::rho_star(PopulationParams::from_variances(0, 0, 0, 0, 3, 2)), 0.0);
}

TEST(NullVarianceRatio, Examples) {
  const auto sys = PopulationParams::systolic_bp();
  EXPECT_NEAR(rtm::null_variance_ratio(sys), 1.3734548306382344, 1e-12);
  const auto m = rtm::population_moments(sys);
  EXPECT_NEAR(rtm::null_variance_ratio(sys), m.var_x2 / m.var_x1, 1e-12);
  EXPECT_EQ(rtm::null_variance_ratio(sys.with_nu2(0)), 1.0);
  EXPECT_EQ(rtm::null_variance_ratio(sys.with_nu2(184.96 + 82.81)), 2.0);
}

TEST(PopulationSweep, ExampleRows) {
  const auto base = PopulationParams::systolic_bp();
  const std::vector<double> betas{0.0, -1.5};
  const std::vector<double> ratios{0.0, 82.81 / 184.96};
  const auto rows = rtm::population_sweep(base, betas, ratios);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].beta, 0.0);
  EXPECT_EQ(rows[0].noise_ratio, 0.0);
  EXPECT_EQ(rows[0].crude, 0.0);
  EXPECT_NEAR(rows[0].berry, 0.1943489873505755, 1e-12);
  EXPECT_NEAR(rows[1].crude, kSystolicCrude, 1e-12);
  EXPECT_EQ(rows[2].beta, -1.5);
  EXPECT_NEAR(rows[2].berry, 0.06231002140727915, 1e-12);
  for (const auto& r : rows) EXPECT_NEAR(r.berry - r.crude, 1.0 - r.rho, 1e-12);
  EXPECT_TRUE(rtm::population_sweep(base, {}, ratios).empty());
  EXPECT_TRUE(rtm::population_sweep(base, betas, {}).empty());
  const std::vector<double> bad{-0.1};
  EXPECT_THROW(rtm::population_sweep(base, betas, bad), rtm::ParameterError);
}

TEST(PopulationSweep, IndependentOfMeanAndAdditiveEffect) {
  const auto grid = rtm::inclusive_grid(0.0, 3.0, 0.1);
  const std::vector<double> betas{-2.0, -1.5, -1.0, -0.5, 0.0, 0.5};
  const auto reference = rtm::population_sweep(PopulationParams::systolic_bp(), betas, grid);
  for (double mu : {0.0, 141.0, 1000.0}) {
    for (double alpha : {-20.0, 0.0, 50.0}) {
      const auto p = PopulationParams::systolic_bp().with_location(mu, alpha);
      const auto rows = rtm::population_sweep(p, betas, grid);
      ASSERT_EQ(rows.size(), reference.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].crude, reference[i].crude);
        EXPECT_EQ(rows[i].berry, reference[i].berry);
        EXPECT_EQ(rows[i].rho, reference[i].rho);
      }
    }
  }
}

TEST(InclusiveGrid, IncludesBothEndpoints) {
  const auto g = rtm::inclusive_grid(0.0, 1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  const auto h = rtm::inclusive_grid(0.0, 1.0, 0.3);
  ASSERT_EQ(h.size(), 5u);
  EXPECT_EQ(h.back(), 1.0);
  EXPECT_TRUE(rtm::inclusive_grid(1.0, 0.0, 0.1).empty());
  EXPECT_THROW(rtm::inclusive_grid(0.0, 1.0, 0.0), rtm::ParameterError);
}

// Properties over random parameter draws.

TEST(ModelProperties, BerryMinusCrudeIsOneMinusRho) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(rng);
    const double diff = rtm::berry_slope_population(p) - rtm::crude_slope_population(p);
    EXPECT_NEAR(diff, 1.0 - rtm::population_moments(p).rho, 1e-12);
    const auto s = rtm::population_slopes(p);
    EXPECT_NEAR(s.crude_bias, s.crude - p.beta(), 1e-12);
  }
}

TEST(ModelProperties, BlomqvistInvertsCrude) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(rng);
    const double v1 = p.sigma2() + p.delta2();
    EXPECT_NEAR(rtm::blomqvist_invert(rtm::crude_slope_population(p), v1, p.delta2()), p.beta(),
                1e-10);
  }
}

TEST(ModelProperties, CrudeLimits) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_params(rng);
    EXPECT_NEAR(rtm::crude_slope_population(p.with_delta2(0.0)), p.beta(), 1e-15);
    const double c = rtm::crude_slope_population(p);
    if (p.beta() >= -1.0) {
      EXPECT_GE(c, -1.0);
    }
    if (p.beta() <= -1.0) {
      EXPECT_LE(c, -1.0);
    }
    // monotone approach to -1 as delta2 grows
    double previous = std::abs(rtm::crude_slope_population(p.with_delta2(0.0)) + 1.0);
    for (double ratio : {0.1, 0.5, 1.0, 5.0, 20.0, 100.0}) {
      const double gap = std::abs(rtm::crude_slope_population(p.with_delta2(ratio * p.sigma2())) + 1.0);
      EXPECT_LE(gap, previous + 1e-15);
      previous = gap;
    }
  }
  const auto sys = PopulationParams::systolic_bp().with_delta2(100 * 184.96);
  EXPECT_LT(std::abs(rtm::crude_slope_population(sys) + 1.0), 0.02);
}

TEST(ModelProperties, RhoStarMatchesMomentsAtNull) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_params(rng);
    EXPECT_EQ(rtm::rho_star(p), rtm::population_moments(p.with_beta(0.0)).rho);
    const auto m = rtm::population_moments(p);
    EXPECT_GE(m.rho, -1.0);
    EXPECT_LE(m.rho, 1.0);
    EXPECT_EQ(m.var_x1, p.sigma2() + p.delta2());
    EXPECT_EQ(m.cov_x1x2, (1.0 + p.beta()) * p.sigma2());
  }
}

}  // namespace

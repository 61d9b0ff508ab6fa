#pragma once

// Seeded sampling from the change model.
//
// Every random stream is keyed by (master_seed, replicate_index[, lane]) and
// built with std::seed_seq, so replicate k never depends on how many values
// replicates 0..k-1 consumed. That is what lets experiment runners hand
// replicates to threads in any order and still reproduce results bit for bit.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rtm/errors.hpp"
#include "rtm/model.hpp"
#include "rtm/sample.hpp"

namespace rtm {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_index = 0;

  bool operator==(const SeedSpec&) const = default;
};

// Single-owner random stream. Normal variates come from
// std::normal_distribution over std::mt19937_64 (libstdc++: Marsaglia polar).
class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Stream(std::seed_seq& seq) : engine_(seq) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double standard_normal() { return normal_(engine_); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Stream derive_stream(SeedSpec seed, std::uint64_t lane = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed.master_seed), hi(seed.master_seed), lo(seed.replicate_index),
                    hi(seed.replicate_index), lo(lane),        hi(lane)};
  return Stream(seq);
}

struct SimulatedSample {
  LatentSample latent;
  ObservedSample observed;
};

// Per subject, in this order: X1 ~ N(mu, sigma2); xi ~ N(0, nu2);
// X2 = X1 + (alpha + beta X1) + xi; x1 = X1 + e1; x2 = X2 + e2 with
// e1, e2 ~ N(0, delta2).
inline SimulatedSample draw_sample(const PopulationParams& p, std::size_t n, Stream& stream) {
  if (n < 2) {
    throw SampleSizeError("draw_sample: n must be at least 2, got " + std::to_string(n));
  }
  const double sigma = std::sqrt(p.sigma2());
  const double nu = std::sqrt(p.nu2());
  const double delta = std::sqrt(p.delta2());

  std::vector<double> X1(n), X2(n), x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z_pre = stream.standard_normal();
    const double z_xi = stream.standard_normal();
    const double z_e1 = stream.standard_normal();
    const double z_e2 = stream.standard_normal();
    X1[i] = p.mu() + sigma * z_pre;
    X2[i] = X1[i] + (p.alpha() + p.beta() * X1[i]) + nu * z_xi;
    x1[i] = X1[i] + delta * z_e1;
    x2[i] = X2[i] + delta * z_e2;
  }
  return {LatentSample(std::move(X1), std::move(X2)),
          ObservedSample(std::move(x1), std::move(x2))};
}

inline SimulatedSample draw_sample(const PopulationParams& p, std::size_t n, SeedSpec seed) {
  auto stream = derive_stream(seed);
  return draw_sample(p, n, stream);
}

}  // namespace rtm

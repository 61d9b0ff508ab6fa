#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtm/errors.hpp"

namespace rtm {

namespace detail {

inline void check_columns(const std::vector<double>& a, const std::vector<double>& b,
                          const char* what) {
  if (a.size() != b.size()) {
    throw SampleSizeError(std::string(what) + ": columns differ in length (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) {
    throw SampleSizeError(std::string(what) + ": at least 2 subjects required, got " +
                          std::to_string(a.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ParameterError(std::string(what) + ": non-finite value at subject " +
                           std::to_string(i));
    }
  }
}

}  // namespace detail

// Measured pre/post values, stored column-wise and index-aligned per subject.
class ObservedSample {
 public:
  ObservedSample(std::vector<double> x1, std::vector<double> x2)
      : x1_(std::move(x1)), x2_(std::move(x2)) {
    detail::check_columns(x1_, x2_, "observed sample");
  }

  std::span<const double> x1() const { return x1_; }
  std::span<const double> x2() const { return x2_; }
  std::size_t size() const { return x1_.size(); }

  bool operator==(const ObservedSample&) const = default;

 private:
  std::vector<double> x1_;
  std::vector<double> x2_;
};

// True (unobservable) pre/post values; only simulations produce these.
class LatentSample {
 public:
  LatentSample(std::vector<double> X1, std::vector<double> X2)
      : X1_(std::move(X1)), X2_(std::move(X2)) {
    detail::check_columns(X1_, X2_, "latent sample");
  }

  std::span<const double> X1() const { return X1_; }
  std::span<const double> X2() const { return X2_; }
  std::size_t size() const { return X1_.size(); }

  // The same columns viewed as an observed sample, for reusing the estimators.
  ObservedSample as_observed() const { return ObservedSample(X1_, X2_); }

  bool operator==(const LatentSample&) const = default;

 private:
  std::vector<double> X1_;
  std::vector<double> X2_;
};

}  // namespace rtm

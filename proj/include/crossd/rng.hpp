#pragma once

#include <cstdint>
#include <random>

#include "crossd/tensor.hpp"

namespace crossd {

using Rng = std::mt19937_64;

inline RealTensor uniform_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  RealTensor t = RealTensor::zeros(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline RealTensor normal_tensor(Shape shape, Rng& rng, double mean = 0.0, double stddev = 1.0) {
  RealTensor t = RealTensor::zeros(std::move(shape));
  std::normal_distribution<double> dist(mean, stddev);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace crossd

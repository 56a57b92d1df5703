#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crossd/pipeline.hpp"

namespace crossd {

// Toy end-to-end trainability demo: one Cross-D Conv layer (per-sample
// rotations) with ReLU, global average pooling and a linear classifier,
// trained by plain SGD on a synthetic two-class task where the class is the
// orientation of a randomly rotated bar pattern.
struct TrainDemoConfig {
  int steps = 200;
  double lr = 0.05;
  std::uint64_t seed = 7;
  int log_every = 10;
};

struct TrainDemoResult {
  std::vector<double> loss_trace;  // one entry per step (pre-update loss)
  double initial_loss = 0;
  double final_loss = 0;
  double theta_grad_step0 = 0;  // gradient reaching the raw-angle path at step 0
  bool aborted = false;
  std::string diagnostic;
};

TrainDemoResult train_demo(const TrainDemoConfig& config, std::ostream* log = nullptr);

std::string train_result_to_json(const TrainDemoConfig& config, const TrainDemoResult& result);

}  // namespace crossd

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crossd/pipeline.hpp"

namespace crossd {

struct BenchConfig {
  std::vector<std::array<std::size_t, 4>> shapes{{2, 8, 32, 32}};  // B×C×H×W
  int repeats = 20;
  int warmup = 3;
  std::size_t kernel = 3;
  std::uint64_t seed = 42;
  bool use_f32 = true;
  RotationMode mode = RotationMode::BatchMean;
  int threads = 1;
};

struct BenchEntry {
  std::array<std::size_t, 4> shape;
  std::string op;  // conv2d | crossd | acs | conv3d
  double median_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
  int repeats = 0;
};

struct BenchReport {
  std::vector<BenchEntry> entries;
  std::string precision;  // f32 | f64
  std::string mode;       // per-sample | batch-mean
  int threads = 1;
  int warmup = 0;
  std::size_t kernel = 3;
  std::uint64_t seed = 0;
};

// Seeded shared inputs: the 2D operators consume x2d, the volumetric ones x3d
// (depth = kernel size), and every operator derives its weights from the same
// bank so the workloads stay comparable.
struct BenchInputs {
  RealTensor x2d;  // B×C×H×W
  RealTensor x3d;  // B×C×D×H×W
  KernelBank5D bank;
  RealTensor w2d;  // mid-slice of the bank
  RotParamHead head;
};

BenchInputs make_bench_inputs(std::array<std::size_t, 4> shape, std::size_t kernel,
                              std::uint64_t seed);

// Forward passes only, monotonic clock, median of repeats after warmup.
BenchReport run_bench(const BenchConfig& config);

// One evaluation of the timed f64 code path, for validation against the
// public operators.
struct BenchSample {
  RealTensor conv2d_out;
  RealTensor crossd_out;
  RealTensor acs_out;
  RealTensor conv3d_out;
};
BenchSample bench_eval_f64(std::array<std::size_t, 4> shape, std::size_t kernel,
                           std::uint64_t seed, RotationMode mode);

std::string report_to_json(const BenchReport& report);
std::string report_to_csv(const BenchReport& report);

}  // namespace crossd

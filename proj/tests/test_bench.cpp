#include <doctest.h>

#include <cmath>

#include "crossd/bench.hpp"
#include "crossd/checks.hpp"
#include "crossd/pipeline.hpp"

using namespace crossd;

namespace {

double max_abs_diff(const RealTensor& a, const RealTensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("input generation is deterministic per seed") {
  const BenchInputs a = make_bench_inputs({2, 4, 8, 8}, 3, 99);
  const BenchInputs b = make_bench_inputs({2, 4, 8, 8}, 3, 99);
  CHECK(a.x2d.values() == b.x2d.values());
  CHECK(a.x3d.values() == b.x3d.values());
  CHECK(a.bank.weights.values() == b.bank.weights.values());
  CHECK(a.head.conv_weights.values() == b.head.conv_weights.values());

  const BenchInputs c = make_bench_inputs({2, 4, 8, 8}, 3, 100);
  CHECK(a.x2d.values() != c.x2d.values());
}

TEST_CASE("the timed f64 path reproduces the public operators") {
  const std::array<std::size_t, 4> shape{2, 4, 8, 8};
  const std::size_t K = 3;
  const std::uint64_t seed = 7;
  const BenchSample sample = bench_eval_f64(shape, K, seed, RotationMode::BatchMean);
  const BenchInputs in = make_bench_inputs(shape, K, seed);

  const ConvGeometry g2 = ConvGeometry::same(K, 2);
  const ConvGeometry g3 = ConvGeometry::same(K, 3);
  CHECK(max_abs_diff(sample.conv2d_out, conv2d(in.x2d, in.w2d, g2)) <= 1e-12);
  CHECK(max_abs_diff(sample.conv3d_out, conv3d(in.x3d, in.bank, g3)) <= 1e-12);
  CHECK(max_abs_diff(sample.acs_out, acs_conv3d(in.x3d, in.w2d, g3)) <= 1e-12);
  CHECK(max_abs_diff(sample.crossd_out,
                     crossd_forward_2d(in.x2d, in.bank, in.head, g2, RotationMode::BatchMean)) <=
        1e-12);
}

TEST_CASE("per-sample timed path also matches the public pipeline") {
  const std::array<std::size_t, 4> shape{2, 4, 6, 6};
  const BenchSample sample = bench_eval_f64(shape, 3, 11, RotationMode::PerSample);
  const BenchInputs in = make_bench_inputs(shape, 3, 11);
  CHECK(max_abs_diff(sample.crossd_out,
                     crossd_forward_2d(in.x2d, in.bank, in.head, ConvGeometry::same(3, 2),
                                       RotationMode::PerSample)) <= 1e-12);
}

TEST_CASE("bench reports all four operators with positive times") {
  BenchConfig config;
  config.shapes = {{1, 4, 8, 8}};
  config.repeats = 3;
  config.warmup = 0;
  const BenchReport report = run_bench(config);
  REQUIRE(report.entries.size() == 4);
  CHECK(report.entries[0].op == "conv2d");
  CHECK(report.entries[1].op == "crossd");
  CHECK(report.entries[2].op == "acs");
  CHECK(report.entries[3].op == "conv3d");
  for (const auto& e : report.entries) {
    CHECK(e.median_ms > 0.0);
    CHECK(e.min_ms > 0.0);
    CHECK(e.max_ms >= e.min_ms);
    CHECK(e.repeats == 3);
  }
  CHECK(report.precision == "f32");
}

TEST_CASE("bench validates its configuration") {
  BenchConfig bad;
  bad.repeats = 2;
  CHECK_THROWS_AS(run_bench(bad), config_error);

  BenchConfig even;
  even.kernel = 4;
  CHECK_THROWS_AS(run_bench(even), config_error);

  BenchConfig empty;
  empty.shapes.clear();
  CHECK_THROWS_AS(run_bench(empty), config_error);
}

TEST_CASE("csv report carries the documented columns") {
  BenchReport report;
  report.entries.push_back({{1, 2, 3, 4}, "conv2d", 1.5, 1.0, 2.0, 3});
  const std::string csv = report_to_csv(report);
  CHECK(csv.rfind("shape,operator,median_ms,min_ms,max_ms,repeats\n", 0) == 0);
  CHECK(csv.find("1x2x3x4,conv2d,1.5,1,2,3") != std::string::npos);
}

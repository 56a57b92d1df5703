#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossd/bench.hpp"
#include "crossd/checks.hpp"
#include "crossd/pipeline.hpp"
#include "crossd/rng.hpp"
#include "crossd/train_demo.hpp"
#include "crossd/transfer.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::array<std::size_t, 4>> parse_shapes(const std::string& text) {
  std::vector<std::array<std::size_t, 4>> shapes;
  std::stringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    std::array<std::size_t, 4> shape{};
    std::stringstream dims(item);
    std::string dim;
    std::size_t n = 0;
    while (std::getline(dims, dim, 'x')) {
      if (n >= 4) throw UsageError("shape has too many extents: " + item);
      try {
        const long long v = std::stoll(dim);
        if (v < 1) throw UsageError("shape extents must be >= 1: " + item);
        shape[n++] = static_cast<std::size_t>(v);
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception&) {
        throw UsageError("malformed shape: " + item);
      }
    }
    if (n != 4) throw UsageError("shape must be BxCxHxW: " + item);
    shapes.push_back(shape);
  }
  if (shapes.empty()) throw UsageError("no shapes given");
  return shapes;
}

crossd::RotationParams parse_rotation(const std::string& text) {
  std::stringstream parts(text);
  std::string item;
  std::vector<double> v;
  while (std::getline(parts, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("malformed rotation component: " + item);
    }
  }
  if (v.size() != 4) throw UsageError("rotation must be kx,ky,kz,angle");
  crossd::RotationParams p;
  const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (norm < 1e-8) {
    p.axis = {0.0, 0.0, 1.0};
    p.degenerate_axis = true;
  } else {
    p.axis = {v[0] / norm, v[1] / norm, v[2] / norm};
  }
  p.angle = std::clamp(v[3], -crossd::kMaxAngle, crossd::kMaxAngle);
  return p;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw crossd::io_error("cannot open for writing: " + out_path);
  f << text << "\n";
}

int cmd_bench(const std::string& shapes, int repeats, int warmup, std::size_t kernel,
              std::uint64_t seed, int threads, const std::string& precision,
              const std::string& format, const std::string& mode, const std::string& out_path) {
  crossd::BenchConfig config;
  config.shapes = parse_shapes(shapes);
  config.repeats = repeats;
  config.warmup = warmup;
  config.kernel = kernel;
  config.seed = seed;
  config.threads = threads;
  if (precision == "f32") {
    config.use_f32 = true;
  } else if (precision == "f64") {
    config.use_f32 = false;
  } else {
    throw UsageError("precision must be f32 or f64");
  }
  if (mode == "per-sample") {
    config.mode = crossd::RotationMode::PerSample;
  } else if (mode == "batch-mean") {
    config.mode = crossd::RotationMode::BatchMean;
  } else {
    throw UsageError("mode must be per-sample or batch-mean");
  }
  if (format != "json" && format != "csv") {
    throw UsageError("format must be json or csv");
  }

  const crossd::BenchReport report = crossd::run_bench(config);
  write_text(out_path, format == "json" ? crossd::report_to_json(report)
                                        : crossd::report_to_csv(report));
  return 0;
}

int cmd_check(const std::string& suite, std::uint64_t seed, bool corrupt_vjp) {
  const auto results = crossd::checks::run_checks(suite, seed, corrupt_vjp);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s (%s)\n", r.suite.c_str(), r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("%zu checks, %s\n", results.size(), all_pass ? "all passed" : "FAILURES present");
  return all_pass ? 0 : 1;
}

int cmd_train_demo(int steps, double lr, std::uint64_t seed, const std::string& out_path) {
  if (steps < 1) throw UsageError("train-demo needs at least one step");
  crossd::TrainDemoConfig config;
  config.steps = steps;
  config.lr = lr;
  config.seed = seed;
  const crossd::TrainDemoResult result = crossd::train_demo(config, &std::cout);
  if (result.aborted) {
    std::cerr << "train-demo aborted: " << result.diagnostic << "\n";
    return 1;
  }
  write_text(out_path, crossd::train_result_to_json(config, result));
  return 0;
}

int cmd_export(const std::string& out_path, const std::string& in_path, std::size_t c_out,
               std::size_t c_in, std::size_t kernel, std::uint64_t seed,
               const std::string& rotate) {
  crossd::KernelBank5D bank;
  std::vector<crossd::NamedTensor> extra;
  if (!in_path.empty()) {
    const auto records = crossd::load_archive(in_path);
    bool found = false;
    for (const auto& rec : records) {
      if (rec.name == "bank") {
        bank = crossd::KernelBank5D{rec.tensor, 1, std::nullopt};
        found = true;
      } else {
        extra.push_back(rec);
      }
    }
    if (!found) throw crossd::format_error("input archive has no 'bank' record");
  } else {
    crossd::Rng rng(seed);
    bank = crossd::KernelBank5D{
        crossd::uniform_tensor({c_out, c_in, kernel, kernel, kernel}, rng), 1, std::nullopt};
    const crossd::RotParamHead head = crossd::RotParamHead::random(c_in, 3, rng);
    extra.push_back({"head.weights", head.conv_weights});
    extra.push_back({"head.bias", crossd::RealTensor::from_values(
                                      {4}, {head.conv_bias[0], head.conv_bias[1],
                                            head.conv_bias[2], head.conv_bias[3]})});
  }
  bank.validate();

  std::vector<crossd::NamedTensor> records;
  if (rotate.empty()) {
    records.push_back({"bank", bank.weights});
  } else {
    const crossd::RotationParams p = parse_rotation(rotate);
    records.push_back({"bank", crossd::derive_3d_kernels(bank, p).weights});
    records.push_back({"kernel2d", crossd::derive_2d_kernels(bank, p)});
  }
  records.insert(records.end(), extra.begin(), extra.end());
  crossd::save_archive(out_path, records);
  std::printf("wrote %zu records to %s\n", records.size(), out_path.c_str());
  return 0;
}

int cmd_import(const std::string& in_path, const std::string& out_path) {
  const auto records = crossd::load_archive(in_path);
  for (const auto& rec : records) {
    std::string dims;
    for (std::size_t i = 0; i < rec.tensor.rank(); ++i) {
      dims += (i ? "x" : "") + std::to_string(rec.tensor.shape()[i]);
    }
    std::printf("%-16s %-14s l2=%.12g\n", rec.name.c_str(), dims.c_str(),
                crossd::l2_norm(rec.tensor));
  }
  if (!out_path.empty()) {
    crossd::save_archive(out_path, records);
    std::printf("re-exported %zu records to %s\n", records.size(), out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-dimensional dynamic convolution toolkit"};
  app.require_subcommand(1);

  // bench
  std::string shapes = "2x8x32x32";
  int repeats = 20, warmup = 3, threads = 1;
  std::size_t kernel = 3;
  std::uint64_t seed = 42;
  std::string precision = "f32", format = "json", mode = "batch-mean", out_path;
  auto* bench = app.add_subcommand("bench", "time conv2d/crossd/acs/conv3d on shared inputs");
  bench->add_option("--shapes", shapes, "comma-separated BxCxHxW list");
  bench->add_option("--repeats", repeats, "timed repeats per operator (>= 3)");
  bench->add_option("--warmup", warmup, "untimed warmup runs");
  bench->add_option("--kernel", kernel, "odd kernel size");
  bench->add_option("--seed", seed, "input generation seed");
  bench->add_option("--threads", threads, "worker threads")->envname("CROSSD_THREADS");
  bench->add_option("--precision", precision, "f32 | f64");
  bench->add_option("--format", format, "json | csv");
  bench->add_option("--mode", mode, "per-sample | batch-mean");
  bench->add_option("--out", out_path, "write the report here instead of stdout");

  // check
  std::string suite = "all";
  std::uint64_t check_seed = 42;
  bool corrupt_vjp = false;
  auto* check = app.add_subcommand("check", "run the module invariant suites");
  check->add_option("suite", suite, "all | spectral | conv | grad | transfer");
  check->add_option("--seed", check_seed, "suite seed");
  check->add_flag("--corrupt-vjp", corrupt_vjp, "negative-control hook: flip one VJP sign")
      ->group("");  // hidden

  // train-demo
  int steps = 200;
  double lr = 0.05;
  std::uint64_t train_seed = 7;
  std::string train_out;
  auto* train = app.add_subcommand("train-demo", "train a toy classifier end to end");
  train->add_option("--steps", steps, "SGD steps");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--seed", train_seed, "task + init seed");
  train->add_option("--out", train_out, "write the JSON loss trace here");

  // export / import
  std::string exp_out, exp_in, rotate;
  std::size_t exp_cout = 4, exp_cin = 2, exp_kernel = 3;
  std::uint64_t exp_seed = 42;
  auto* exp = app.add_subcommand("export", "write a weight archive (optionally rotated)");
  exp->add_option("--out", exp_out, "archive path")->required();
  exp->add_option("--in", exp_in, "source archive (default: generate a seeded bank)");
  exp->add_option("--cout", exp_cout, "generated bank output channels");
  exp->add_option("--cin", exp_cin, "generated bank input channels");
  exp->add_option("--kernel", exp_kernel, "generated bank kernel size (odd)");
  exp->add_option("--seed", exp_seed, "generation seed");
  exp->add_option("--rotate", rotate, "kx,ky,kz,angle: store the rotated bank and 2D kernels");

  std::string imp_in, imp_out;
  auto* imp = app.add_subcommand("import", "validate and summarize a weight archive");
  imp->add_option("--in", imp_in, "archive path")->required();
  imp->add_option("--out", imp_out, "re-export the records here (byte-identical)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bench->parsed()) {
      return cmd_bench(shapes, repeats, warmup, kernel, seed, threads, precision, format, mode,
                       out_path);
    }
    if (check->parsed()) {
      return cmd_check(suite, check_seed, corrupt_vjp);
    }
    if (train->parsed()) {
      return cmd_train_demo(steps, lr, train_seed, train_out);
    }
    if (exp->parsed()) {
      return cmd_export(exp_out, exp_in, exp_cout, exp_cin, exp_kernel, exp_seed, rotate);
    }
    if (imp->parsed()) {
      return cmd_import(imp_in, imp_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const crossd::config_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const crossd::shape_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include "crossd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "crossd/detail/kernels.hpp"
#include "crossd/rng.hpp"

namespace crossd {

BenchInputs make_bench_inputs(std::array<std::size_t, 4> shape, std::size_t kernel,
                              std::uint64_t seed) {
  const auto [B, C, H, W] = shape;
  Rng rng(seed);
  BenchInputs in;
  in.x2d = uniform_tensor({B, C, H, W}, rng);
  in.x3d = uniform_tensor({B, C, kernel, H, W}, rng);
  in.bank = KernelBank5D{uniform_tensor({C, C, kernel, kernel, kernel}, rng, -0.5, 0.5), 1,
                         std::nullopt};
  in.w2d = extract_mid_slice(in.bank.weights);
  in.head = RotParamHead::random(C, 3, rng, 0.2);
  return in;
}

namespace {

// Raw-buffer realization of the four measured operators; instantiated at
// float and double so both precisions run the same code.
template <class T>
struct OperatorSet {
  std::size_t B, C, H, W, K;
  RotationMode mode;

  std::vector<T> x2d, x3d, bank_w, w2d, head_w;
  std::array<T, 4> head_b{};

  // preallocated outputs and scratch
  std::vector<T> y2d, y_crossd, y_acs, y3d, feats, dyn_w2d;

  OperatorSet(const BenchInputs& in, RotationMode m) : mode(m) {
    B = in.x2d.shape()[0];
    C = in.x2d.shape()[1];
    H = in.x2d.shape()[2];
    W = in.x2d.shape()[3];
    K = in.bank.kernel();
    const auto cast = [](const RealTensor& t, std::vector<T>& out) {
      out.resize(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<T>(t.data()[i]);
    };
    cast(in.x2d, x2d);
    cast(in.x3d, x3d);
    cast(in.bank.weights, bank_w);
    cast(in.w2d, w2d);
    cast(in.head.conv_weights, head_w);
    for (int i = 0; i < 4; ++i) head_b[i] = static_cast<T>(in.head.conv_bias[i]);

    y2d.resize(B * C * H * W);
    y_crossd.resize(B * C * H * W);
    y_acs.resize(B * C * K * H * W);
    y3d.resize(B * C * K * H * W);
    feats.resize(B * 4 * H * W);
    dyn_w2d.resize(C * C * K * K);
  }

  void run_conv2d() {
    detail::conv2d_buf<T>(x2d.data(), B, C, H, W, w2d.data(), C, C, K, K, 1, 1, K / 2, K / 2, 1,
                          nullptr, y2d.data(), H, W);
  }

  void run_conv3d() {
    detail::conv3d_buf<T>(x3d.data(), B, C, K, H, W, bank_w.data(), C, C, K, K, K, 1, 1, 1,
                          K / 2, K / 2, K / 2, 1, nullptr, y3d.data(), K, H, W);
  }

  void run_acs() {
    const auto split = acs_channel_split(C);
    const std::size_t half = K / 2;
    std::size_t first = 0;
    std::vector<T> packed;
    std::vector<T> part_out;
    for (std::size_t view = 0; view < 3; ++view) {
      const std::size_t part = split[view];
      if (part == 0) continue;
      std::size_t Kd = K, Kh = K, Kw = K, pd = half, ph = half, pw = half;
      if (view == 0) {
        Kd = 1;
        pd = 0;
      } else if (view == 1) {
        Kh = 1;
        ph = 0;
      } else {
        Kw = 1;
        pw = 0;
      }
      packed.assign(part * C * K * K, T(0));
      for (std::size_t co = 0; co < part; ++co)
        for (std::size_t ci = 0; ci < C; ++ci)
          for (std::size_t i = 0; i < K * K; ++i)
            packed[(co * C + ci) * K * K + i] = w2d[((first + co) * C + ci) * K * K + i];
      part_out.assign(B * part * K * H * W, T(0));
      detail::conv3d_buf<T>(x3d.data(), B, C, K, H, W, packed.data(), part, C, Kd, Kh, Kw, 1, 1,
                            1, pd, ph, pw, 1, nullptr, part_out.data(), K, H, W);
      const std::size_t vol = K * H * W;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < part; ++co)
          std::copy_n(part_out.data() + (b * part + co) * vol, vol,
                      y_acs.data() + (b * C + first + co) * vol);
      first += part;
    }
  }

  RotationParams params_from_raw(const Vec4& raw) const {
    RawRotationVector rv;
    rv.r = raw;
    return normalize_rotation(rv);
  }

  void rotate_and_slice(const RotationParams& p, T* out_w2d) {
    const std::vector<double> freq = dft_frequencies(K);
    const Mat3 r = rodrigues_approx(p);
    const std::size_t vol = K * K * K;
    std::vector<std::complex<T>> phase(vol);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j)
        for (std::size_t l = 0; l < K; ++l, ++idx) {
          const double fsum = (r.m[0][0] + r.m[1][0] + r.m[2][0]) * freq[i] +
                              (r.m[0][1] + r.m[1][1] + r.m[2][1]) * freq[j] +
                              (r.m[0][2] + r.m[1][2] + r.m[2][2]) * freq[l];
          const double arg = -two_pi * fsum;
          phase[idx] = std::complex<T>(static_cast<T>(std::cos(arg)),
                                       static_cast<T>(std::sin(arg)));
        }

    const detail::DftPlan<T> plan(K);
    std::vector<std::complex<T>> work(vol);
    const std::size_t mid = K / 2;
    for (std::size_t kidx = 0; kidx < C * C; ++kidx) {
      const T* src = bank_w.data() + kidx * vol;
      for (std::size_t i = 0; i < vol; ++i) work[i] = std::complex<T>(src[i], T(0));
      detail::fft3_buf<T>(work.data(), K, false, plan);
      for (std::size_t i = 0; i < vol; ++i) work[i] *= phase[i];
      detail::fft3_buf<T>(work.data(), K, true, plan);
      for (std::size_t i = 0; i < K * K; ++i) {
        out_w2d[kidx * K * K + i] = work[mid * K * K + i].real();
      }
    }
  }

  void aggregate_raws(std::vector<Vec4>& raws) const {
    const std::size_t hw = H * W;
    raws.assign(B, Vec4{});
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t c = 0; c < 4; ++c) {
        const T* f = feats.data() + (b * 4 + c) * hw;
        double m = static_cast<double>(f[0]);
        for (std::size_t i = 1; i < hw; ++i) m = std::max(m, static_cast<double>(f[i]));
        double den = 0.0, num = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
          const double e = std::exp(static_cast<double>(f[i]) - m);
          den += e;
          num += static_cast<double>(f[i]) * e;
        }
        raws[b][c] = num / den;
      }
    }
  }

  void run_crossd() {
    detail::conv2d_buf<T>(x2d.data(), B, C, H, W, head_w.data(), 4, C, 3, 3, 1, 1, 1, 1, 1,
                          head_b.data(), feats.data(), H, W);
    std::vector<Vec4> raws;
    aggregate_raws(raws);

    if (mode == RotationMode::BatchMean) {
      Vec4 mean{};
      for (const auto& raw : raws)
        for (int c = 0; c < 4; ++c) mean[c] += raw[c];
      for (int c = 0; c < 4; ++c) mean[c] /= static_cast<double>(B);
      rotate_and_slice(params_from_raw(mean), dyn_w2d.data());
      detail::conv2d_buf<T>(x2d.data(), B, C, H, W, dyn_w2d.data(), C, C, K, K, 1, 1, K / 2,
                            K / 2, 1, nullptr, y_crossd.data(), H, W);
      return;
    }
    for (std::size_t b = 0; b < B; ++b) {
      rotate_and_slice(params_from_raw(raws[b]), dyn_w2d.data());
      detail::conv2d_buf<T>(x2d.data() + b * C * H * W, 1, C, H, W, dyn_w2d.data(), C, C, K, K,
                            1, 1, K / 2, K / 2, 1, nullptr, y_crossd.data() + b * C * H * W, H,
                            W);
    }
  }
};

using Clock = std::chrono::steady_clock;

template <class F>
double time_ms(F&& fn) {
  const auto start = Clock::now();
  fn();
  const auto stop = Clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start).count();
  return std::max(ms, 1e-6);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class T>
void bench_shape(const BenchConfig& config, std::array<std::size_t, 4> shape,
                 std::vector<BenchEntry>& entries) {
  const BenchInputs inputs = make_bench_inputs(shape, config.kernel, config.seed);
  OperatorSet<T> ops(inputs, config.mode);

  struct Op {
    const char* name;
    void (OperatorSet<T>::*run)();
  };
  const Op list[] = {{"conv2d", &OperatorSet<T>::run_conv2d},
                     {"crossd", &OperatorSet<T>::run_crossd},
                     {"acs", &OperatorSet<T>::run_acs},
                     {"conv3d", &OperatorSet<T>::run_conv3d}};
  for (const Op& op : list) {
    for (int i = 0; i < config.warmup; ++i) (ops.*op.run)();
    std::vector<double> times;
    times.reserve(config.repeats);
    for (int i = 0; i < config.repeats; ++i) times.push_back(time_ms([&] { (ops.*op.run)(); }));
    BenchEntry e;
    e.shape = shape;
    e.op = op.name;
    e.median_ms = median(times);
    e.min_ms = *std::min_element(times.begin(), times.end());
    e.max_ms = *std::max_element(times.begin(), times.end());
    e.repeats = config.repeats;
    entries.push_back(e);
  }
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  if (config.repeats < 3) {
    throw config_error("bench needs at least 3 repeats for a meaningful median");
  }
  if (config.shapes.empty()) {
    throw config_error("bench needs at least one input shape");
  }
  if (config.kernel % 2 == 0) {
    throw config_error("bench kernel size must be odd");
  }
  const unsigned previous_budget = thread_budget();
  set_thread_budget(static_cast<unsigned>(config.threads));

  BenchReport report;
  report.precision = config.use_f32 ? "f32" : "f64";
  report.mode = config.mode == RotationMode::BatchMean ? "batch-mean" : "per-sample";
  report.threads = config.threads;
  report.warmup = config.warmup;
  report.kernel = config.kernel;
  report.seed = config.seed;
  for (const auto& shape : config.shapes) {
    if (config.use_f32) {
      bench_shape<float>(config, shape, report.entries);
    } else {
      bench_shape<double>(config, shape, report.entries);
    }
  }
  set_thread_budget(previous_budget);
  return report;
}

BenchSample bench_eval_f64(std::array<std::size_t, 4> shape, std::size_t kernel,
                           std::uint64_t seed, RotationMode mode) {
  const BenchInputs inputs = make_bench_inputs(shape, kernel, seed);
  OperatorSet<double> ops(inputs, mode);
  ops.run_conv2d();
  ops.run_crossd();
  ops.run_acs();
  ops.run_conv3d();
  const auto [B, C, H, W] = shape;
  BenchSample s;
  s.conv2d_out = RealTensor::from_values({B, C, H, W}, ops.y2d);
  s.crossd_out = RealTensor::from_values({B, C, H, W}, ops.y_crossd);
  s.acs_out = RealTensor::from_values({B, C, kernel, H, W}, ops.y_acs);
  s.conv3d_out = RealTensor::from_values({B, C, kernel, H, W}, ops.y3d);
  return s;
}

namespace {

std::string shape_string(const std::array<std::size_t, 4>& s) {
  std::ostringstream os;
  os << s[0] << "x" << s[1] << "x" << s[2] << "x" << s[3];
  return os.str();
}

}  // namespace

std::string report_to_json(const BenchReport& report) {
  nlohmann::json j;
  j["precision"] = report.precision;
  j["mode"] = report.mode;
  j["threads"] = report.threads;
  j["warmup"] = report.warmup;
  j["kernel"] = report.kernel;
  j["seed"] = report.seed;
  j["results"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json r;
    r["shape"] = e.shape;
    r["operator"] = e.op;
    r["median_ms"] = e.median_ms;
    r["min_ms"] = e.min_ms;
    r["max_ms"] = e.max_ms;
    r["repeats"] = e.repeats;
    j["results"].push_back(r);
  }
  return j.dump(2);
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream os;
  os << "shape,operator,median_ms,min_ms,max_ms,repeats\n";
  for (const auto& e : report.entries) {
    os << shape_string(e.shape) << "," << e.op << "," << e.median_ms << "," << e.min_ms << ","
       << e.max_ms << "," << e.repeats << "\n";
  }
  return os.str();
}

}  // namespace crossd

#include "crossd/checks.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "crossd/autograd.hpp"
#include "crossd/pipeline.hpp"
#include "crossd/rng.hpp"
#include "crossd/spectral.hpp"
#include "crossd/transfer.hpp"

namespace crossd::checks {

namespace {

std::ptrdiff_t spos(std::size_t out, std::size_t stride, std::size_t pad, std::size_t k) {
  return static_cast<std::ptrdiff_t>(out * stride + k) - static_cast<std::ptrdiff_t>(pad);
}

bool inside(std::ptrdiff_t i, std::size_t extent) {
  return i >= 0 && i < static_cast<std::ptrdiff_t>(extent);
}

}  // namespace

RealTensor conv2d_ref(const RealTensor& x, const RealTensor& w, const ConvGeometry& geom,
                      std::size_t groups, const std::vector<double>* bias) {
  const std::size_t B = x.shape()[0], H = x.shape()[2], W = x.shape()[3];
  const std::size_t Cout = w.shape()[0], CinG = w.shape()[1], Kh = w.shape()[2], Kw = w.shape()[3];
  const std::size_t Ho = conv_out_extent(H, Kh, geom.stride[0], geom.padding[0]);
  const std::size_t Wo = conv_out_extent(W, Kw, geom.stride[1], geom.padding[1]);
  const std::size_t cout_per_g = Cout / groups;

  RealTensor y = RealTensor::zeros({B, Cout, Ho, Wo});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < Cout; ++co)
      for (std::size_t oh = 0; oh < Ho; ++oh)
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          double acc = bias ? (*bias)[co] : 0.0;
          for (std::size_t cl = 0; cl < CinG; ++cl)
            for (std::size_t kh = 0; kh < Kh; ++kh)
              for (std::size_t kw = 0; kw < Kw; ++kw) {
                const std::ptrdiff_t ih = spos(oh, geom.stride[0], geom.padding[0], kh);
                const std::ptrdiff_t iw = spos(ow, geom.stride[1], geom.padding[1], kw);
                if (!inside(ih, H) || !inside(iw, W)) continue;
                const std::size_t ci = (co / cout_per_g) * CinG + cl;
                acc += x(b, ci, static_cast<std::size_t>(ih), static_cast<std::size_t>(iw)) *
                       w(co, cl, kh, kw);
              }
          y(b, co, oh, ow) = acc;
        }
  return y;
}

RealTensor conv3d_ref(const RealTensor& x, const RealTensor& w5d, const ConvGeometry& geom,
                      std::size_t groups, const std::vector<double>* bias) {
  const std::size_t B = x.shape()[0];
  const std::size_t D = x.shape()[2], H = x.shape()[3], W = x.shape()[4];
  const std::size_t Cout = w5d.shape()[0], CinG = w5d.shape()[1];
  const std::size_t Kd = w5d.shape()[2], Kh = w5d.shape()[3], Kw = w5d.shape()[4];
  const std::size_t Do = conv_out_extent(D, Kd, geom.stride[0], geom.padding[0]);
  const std::size_t Ho = conv_out_extent(H, Kh, geom.stride[1], geom.padding[1]);
  const std::size_t Wo = conv_out_extent(W, Kw, geom.stride[2], geom.padding[2]);
  const std::size_t cout_per_g = Cout / groups;

  RealTensor y = RealTensor::zeros({B, Cout, Do, Ho, Wo});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < Cout; ++co)
      for (std::size_t od = 0; od < Do; ++od)
        for (std::size_t oh = 0; oh < Ho; ++oh)
          for (std::size_t ow = 0; ow < Wo; ++ow) {
            double acc = bias ? (*bias)[co] : 0.0;
            for (std::size_t cl = 0; cl < CinG; ++cl)
              for (std::size_t kd = 0; kd < Kd; ++kd)
                for (std::size_t kh = 0; kh < Kh; ++kh)
                  for (std::size_t kw = 0; kw < Kw; ++kw) {
                    const std::ptrdiff_t id = spos(od, geom.stride[0], geom.padding[0], kd);
                    const std::ptrdiff_t ih = spos(oh, geom.stride[1], geom.padding[1], kh);
                    const std::ptrdiff_t iw = spos(ow, geom.stride[2], geom.padding[2], kw);
                    if (!inside(id, D) || !inside(ih, H) || !inside(iw, W)) continue;
                    const std::size_t ci = (co / cout_per_g) * CinG + cl;
                    acc += x(b, ci, static_cast<std::size_t>(id), static_cast<std::size_t>(ih),
                             static_cast<std::size_t>(iw)) *
                           w5d(co, cl, kd, kh, kw);
                  }
            y(b, co, od, oh, ow) = acc;
          }
  return y;
}

RealTensor acs_conv3d_ref(const RealTensor& x, const RealTensor& w2d, const ConvGeometry& geom) {
  const std::size_t B = x.shape()[0], Cin = x.shape()[1];
  const std::size_t D = x.shape()[2], H = x.shape()[3], W = x.shape()[4];
  const std::size_t Cout = w2d.shape()[0], K = w2d.shape()[2];
  const std::size_t half = K / 2;
  const auto split = acs_channel_split(Cout);
  const std::size_t Do = conv_out_extent(D, K, geom.stride[0], geom.padding[0]);
  const std::size_t Ho = conv_out_extent(H, K, geom.stride[1], geom.padding[1]);
  const std::size_t Wo = conv_out_extent(W, K, geom.stride[2], geom.padding[2]);

  RealTensor y = RealTensor::zeros({B, Cout, Do, Ho, Wo});
  std::size_t first = 0;
  for (std::size_t view = 0; view < 3; ++view) {
    for (std::size_t c = 0; c < split[view]; ++c) {
      const std::size_t co = first + c;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t od = 0; od < Do; ++od)
          for (std::size_t oh = 0; oh < Ho; ++oh)
            for (std::size_t ow = 0; ow < Wo; ++ow) {
              double acc = 0.0;
              for (std::size_t ci = 0; ci < Cin; ++ci)
                for (std::size_t i = 0; i < K; ++i)
                  for (std::size_t j = 0; j < K; ++j) {
                    std::ptrdiff_t id, ih, iw;
                    if (view == 0) {  // kernel spans H×W, swept along D
                      id = spos(od, geom.stride[0], geom.padding[0] - half, 0);
                      ih = spos(oh, geom.stride[1], geom.padding[1], i);
                      iw = spos(ow, geom.stride[2], geom.padding[2], j);
                    } else if (view == 1) {  // spans D×W, swept along H
                      id = spos(od, geom.stride[0], geom.padding[0], i);
                      ih = spos(oh, geom.stride[1], geom.padding[1] - half, 0);
                      iw = spos(ow, geom.stride[2], geom.padding[2], j);
                    } else {  // spans D×H, swept along W
                      id = spos(od, geom.stride[0], geom.padding[0], i);
                      ih = spos(oh, geom.stride[1], geom.padding[1], j);
                      iw = spos(ow, geom.stride[2], geom.padding[2] - half, 0);
                    }
                    if (!inside(id, D) || !inside(ih, H) || !inside(iw, W)) continue;
                    acc += x(b, ci, static_cast<std::size_t>(id), static_cast<std::size_t>(ih),
                             static_cast<std::size_t>(iw)) *
                           w2d(co, ci, i, j);
                  }
              y(b, co, od, oh, ow) = acc;
            }
    }
    first += split[view];
  }
  return y;
}

ComplexTensor dft3_ref(const RealTensor& volume) {
  const std::size_t K = volume.shape()[0];
  ComplexTensor spec = ComplexTensor::zeros(volume.shape());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k1 = 0; k1 < K; ++k1)
    for (std::size_t k2 = 0; k2 < K; ++k2)
      for (std::size_t k3 = 0; k3 < K; ++k3) {
        std::complex<double> acc(0, 0);
        for (std::size_t n1 = 0; n1 < K; ++n1)
          for (std::size_t n2 = 0; n2 < K; ++n2)
            for (std::size_t n3 = 0; n3 < K; ++n3) {
              const double arg = -two_pi *
                                 static_cast<double>(k1 * n1 + k2 * n2 + k3 * n3) /
                                 static_cast<double>(K);
              acc += volume(n1, n2, n3) * std::complex<double>(std::cos(arg), std::sin(arg));
            }
        spec.data()[(k1 * K + k2) * K + k3] = acc;
      }
  return spec;
}

RealTensor idft3_real_ref(const ComplexTensor& spectrum) {
  const std::size_t K = spectrum.shape()[0];
  RealTensor out = RealTensor::zeros(spectrum.shape());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double norm = 1.0 / static_cast<double>(K * K * K);
  for (std::size_t n1 = 0; n1 < K; ++n1)
    for (std::size_t n2 = 0; n2 < K; ++n2)
      for (std::size_t n3 = 0; n3 < K; ++n3) {
        std::complex<double> acc(0, 0);
        for (std::size_t k1 = 0; k1 < K; ++k1)
          for (std::size_t k2 = 0; k2 < K; ++k2)
            for (std::size_t k3 = 0; k3 < K; ++k3) {
              const double arg = two_pi *
                                 static_cast<double>(k1 * n1 + k2 * n2 + k3 * n3) /
                                 static_cast<double>(K);
              acc += spectrum.data()[(k1 * K + k2) * K + k3] *
                     std::complex<double>(std::cos(arg), std::sin(arg));
            }
        out(n1, n2, n3) = (acc * norm).real();
      }
  return out;
}

RealTensor fractional_shift_ref(const RealTensor& volume, const Vec3& shift) {
  const std::size_t K = volume.shape()[0];
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> freq(K);
  for (std::size_t i = 0; i < K; ++i) {
    freq[i] = ((i <= K / 2) ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(K)) /
              static_cast<double>(K);
  }

  std::vector<std::complex<double>> v(volume.size());
  for (std::size_t i = 0; i < volume.size(); ++i) v[i] = volume.data()[i];

  const std::size_t strides[3] = {K * K, K, 1};
  std::vector<std::complex<double>> line(K), spec(K);
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = strides[axis];
    // enumerate all K*K lines along this axis
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = 0; b < K; ++b) {
        std::size_t base;
        if (axis == 0)
          base = a * K + b;
        else if (axis == 1)
          base = a * K * K + b;
        else
          base = (a * K + b) * K;
        for (std::size_t n = 0; n < K; ++n) line[n] = v[base + n * stride];
        for (std::size_t k = 0; k < K; ++k) {
          std::complex<double> acc(0, 0);
          for (std::size_t n = 0; n < K; ++n) {
            const double arg = -two_pi * static_cast<double>(k * n) / static_cast<double>(K);
            acc += line[n] * std::complex<double>(std::cos(arg), std::sin(arg));
          }
          const double ph = -two_pi * freq[k] * shift[axis];
          spec[k] = acc * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        for (std::size_t n = 0; n < K; ++n) {
          std::complex<double> acc(0, 0);
          for (std::size_t k = 0; k < K; ++k) {
            const double arg = two_pi * static_cast<double>(k * n) / static_cast<double>(K);
            acc += spec[k] * std::complex<double>(std::cos(arg), std::sin(arg));
          }
          v[base + n * stride] = acc / static_cast<double>(K);
        }
      }
    }
  }

  RealTensor out = RealTensor::zeros(volume.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = v[i].real();
  return out;
}

std::vector<Vec4> aggregate_ref(const RealTensor& features) {
  const std::size_t B = features.shape()[0];
  const std::size_t hw = features.shape()[2] * features.shape()[3];
  std::vector<Vec4> out(B, Vec4{});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double* f = features.data() + (b * 4 + c) * hw;
      double den = 0.0;
      for (std::size_t i = 0; i < hw; ++i) den += std::exp(f[i]);
      double acc = 0.0;
      for (std::size_t i = 0; i < hw; ++i) acc += f[i] * std::exp(f[i]) / den;
      out[b][c] = acc;
    }
  }
  return out;
}

// ---- invariant suites -------------------------------------------------------

namespace {

double max_abs_diff(const RealTensor& a, const RealTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

struct SuiteRecorder {
  std::vector<CheckResult>& out;
  std::string suite;

  void record(const std::string& name, bool pass, const std::string& detail) {
    out.push_back({suite, name, pass, detail});
  }
  void bound(const std::string& name, double value, double limit) {
    record(name, value <= limit, "max " + fmt(value) + " (limit " + fmt(limit) + ")");
  }
};

KernelBank5D random_bank(Rng& rng, std::size_t co, std::size_t ci, std::size_t k) {
  return KernelBank5D{uniform_tensor({co, ci, k, k, k}, rng), 1, std::nullopt};
}

RotationParams random_rotation(Rng& rng) {
  RawRotationVector raw;
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (double& v : raw.r) v = dist(rng);
  return normalize_rotation(raw);
}

RealTensor roll_bank(const RealTensor& weights, long long s) {
  const std::size_t k = weights.shape()[2];
  const std::size_t vol = k * k * k;
  RealTensor out = RealTensor::zeros(weights.shape());
  const std::size_t n_kernels = weights.size() / vol;
  for (std::size_t kidx = 0; kidx < n_kernels; ++kidx) {
    RealTensor one = RealTensor::from_values(
        {k, k, k},
        std::vector<double>(weights.data() + kidx * vol, weights.data() + (kidx + 1) * vol));
    const RealTensor rolled = roll(one, {s, s, s});
    for (std::size_t i = 0; i < vol; ++i) out.data()[kidx * vol + i] = rolled.data()[i];
  }
  return out;
}

void spectral_suite(SuiteRecorder& rec, Rng& rng) {
  {
    const RealTensor v = uniform_tensor({5, 5, 5}, rng);
    const auto [back, resid] = ifft3_real(fft3(v));
    rec.bound("fft3/ifft3 round trip", std::max(max_abs_diff(v, back), resid), 1e-12);
  }
  {
    const RealTensor v = uniform_tensor({3, 3, 3}, rng);
    const ComplexTensor fast = fft3(v);
    const ComplexTensor naive = dft3_ref(v);
    double m = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      m = std::max(m, std::abs(fast.data()[i] - naive.data()[i]));
    }
    rec.bound("fft3 vs naive DFT oracle", m, 1e-10);
  }
  {
    double worst = 0.0;
    for (std::size_t k : {std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
      const KernelBank5D bank = random_bank(rng, 2, 2, k);
      const RotatedBank rot = rotate_bank(bank, RotationParams{});
      worst = std::max(worst, max_abs_diff(rot.weights, roll_bank(bank.weights, 1)));
    }
    rec.bound("shift theorem: theta=0 equals unit circular roll", worst, 1e-10);
  }
  {
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const KernelBank5D bank = random_bank(rng, 2, 2, 5);
      const RotationParams p = random_rotation(rng);
      const RotatedBank rot = rotate_bank(bank, p);
      const Vec3 s = shift_vector(p);
      const std::size_t vol = 125;
      for (std::size_t kidx = 0; kidx < 4; ++kidx) {
        const RealTensor one = RealTensor::from_values(
            {5, 5, 5}, std::vector<double>(bank.weights.data() + kidx * vol,
                                           bank.weights.data() + (kidx + 1) * vol));
        const RealTensor want = fractional_shift_ref(one, s);
        const RealTensor got = RealTensor::from_values(
            {5, 5, 5}, std::vector<double>(rot.weights.data() + kidx * vol,
                                           rot.weights.data() + (kidx + 1) * vol));
        worst = std::max(worst, max_abs_diff(want, got));
      }
    }
    rec.bound("fractional shift along R^T(1,1,1) vs per-axis DFT oracle", worst, 1e-8);
  }
  {
    double worst_ratio = 0.0, worst_resid = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const KernelBank5D bank = random_bank(rng, 3, 2, 3);
      const RotationParams p = random_rotation(rng);
      const RotatedBank rot = rotate_bank(bank, p);
      worst_ratio = std::max(worst_ratio,
                             std::abs(l2_norm(rot.weights) / l2_norm(bank.weights) - 1.0));
      worst_resid = std::max(worst_resid, rot.max_imag_residual);
    }
    rec.bound("unitarity: norm ratio deviation", worst_ratio, 1e-6);
    rec.bound("inverse-transform imaginary residual", worst_resid, 1e-8);
  }
  {
    const KernelBank5D u1 = random_bank(rng, 2, 1, 3);
    const KernelBank5D u2 = random_bank(rng, 2, 1, 3);
    const RotationParams p = random_rotation(rng);
    const double a = 0.7, b = -1.3;
    KernelBank5D mix{add(scale(u1.weights, a), scale(u2.weights, b)), 1, std::nullopt};
    const RealTensor want = add(scale(rotate_bank(u1, p).weights, a),
                                scale(rotate_bank(u2, p).weights, b));
    rec.bound("rotate_bank linearity", max_abs_diff(rotate_bank(mix, p).weights, want), 1e-10);
  }
  {
    bool threw = false;
    try {
      freq_grid(4);
    } catch (const unsupported_kernel_error&) {
      threw = true;
    }
    rec.record("even kernel size rejected", threw, threw ? "throws as specified" : "no error raised");
  }
}

void conv_suite(SuiteRecorder& rec, Rng& rng) {
  {
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      std::uniform_int_distribution<std::size_t> ext(4, 8), ker(1, 3), pad(0, 2), str(1, 2);
      const std::size_t H = ext(rng), W = ext(rng), Kh = ker(rng), Kw = ker(rng);
      const ConvGeometry g{{str(rng), str(rng)}, {pad(rng), pad(rng)}};
      if (H + 2 * g.padding[0] < Kh || W + 2 * g.padding[1] < Kw) continue;
      const RealTensor x = uniform_tensor({2, 3, H, W}, rng);
      const RealTensor w = uniform_tensor({4, 3, Kh, Kw}, rng);
      worst = std::max(worst, max_abs_diff(conv2d(x, w, g), conv2d_ref(x, w, g)));
    }
    rec.bound("conv2d vs nested-loop oracle", worst, 1e-12);
  }
  {
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const RealTensor x = uniform_tensor({1, 2, 5, 6, 5}, rng);
      const KernelBank5D w{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
      const ConvGeometry g = ConvGeometry::same(3, 3);
      worst = std::max(worst, max_abs_diff(conv3d(x, w, g), conv3d_ref(x, w.weights, g)));
    }
    rec.bound("conv3d vs nested-loop oracle", worst, 1e-12);
  }
  {
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const RealTensor x = uniform_tensor({1, 2, 5, 5, 5}, rng);
      const RealTensor w = uniform_tensor({5, 2, 3, 3}, rng);
      const ConvGeometry g = ConvGeometry::same(3, 3);
      worst = std::max(worst, max_abs_diff(acs_conv3d(x, w, g), acs_conv3d_ref(x, w, g)));
    }
    rec.bound("acs_conv3d vs swept-2D oracle", worst, 1e-12);
  }
  {
    const auto split = acs_channel_split(8);
    const bool ok = split[0] == 3 && split[1] == 3 && split[2] == 2;
    rec.record("acs channel partition (8 -> 3,3,2)", ok, "got " + std::to_string(split[0]) + "," +
                                                             std::to_string(split[1]) + "," +
                                                             std::to_string(split[2]));
  }
  {
    bool ok = true;
    for (std::size_t s = 1; s <= 3 && ok; ++s) {
      for (std::size_t p = 0; p <= 2 && ok; ++p) {
        if (7 + 2 * p < 3) continue;
        const RealTensor x = uniform_tensor({1, 1, 7, 7}, rng);
        const RealTensor w = uniform_tensor({1, 1, 3, 3}, rng);
        const RealTensor y = conv2d(x, w, ConvGeometry{{s, s}, {p, p}});
        ok = y.shape()[2] == (7 + 2 * p - 3) / s + 1;
      }
    }
    rec.record("output extent formula", ok, ok ? "all stride/pad combinations" : "mismatch");
  }
  {
    Rng seeded(101);
    const RealTensor x = uniform_tensor({2, 2, 6, 6}, seeded);
    const KernelBank5D bank = random_bank(seeded, 3, 2, 3);
    const RotParamHead head = RotParamHead::zero(2);
    const ConvGeometry g = ConvGeometry::same(3, 2);
    const RealTensor y = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
    const RealTensor want = conv2d(x, extract_mid_slice(roll_bank(bank.weights, 1)), g);
    rec.bound("crossd zero head equals rolled mid-slice conv", max_abs_diff(y, want), 1e-10);
    const RealTensor y2 = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
    rec.record("crossd forward bitwise reproducible", max_abs_diff(y, y2) == 0.0,
               "two invocations compared");
  }
}

void grad_suite(SuiteRecorder& rec, Rng& rng, bool corrupt_vjp) {
  {
    // adjoint consistency: <u, J dx> == <J^T u, dx> for every primitive
    double worst = 0.0;
    const auto rel_gap = [](double a, double b) {
      return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
    };
    {
      const RealTensor x = uniform_tensor({1, 2, 5, 5}, rng);
      const RealTensor w = uniform_tensor({2, 2, 3, 3}, rng);
      const ConvGeometry g = ConvGeometry::same(3, 2);
      const RealTensor u = uniform_tensor({1, 2, 5, 5}, rng);
      const RealTensor dx = uniform_tensor(x.shape(), rng);
      const RealTensor dw = uniform_tensor(w.shape(), rng);
      const Conv2dGrads back = vjp_conv2d(u, x, w, g);
      double lhs = 0.0, rhs = 0.0;
      const RealTensor jx = conv2d(dx, w, g);
      for (std::size_t i = 0; i < u.size(); ++i) lhs += u.data()[i] * jx.data()[i];
      for (std::size_t i = 0; i < dx.size(); ++i) rhs += back.x.data()[i] * dx.data()[i];
      worst = std::max(worst, rel_gap(lhs, rhs));
      const RealTensor jw = conv2d(x, dw, g);
      lhs = rhs = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) lhs += u.data()[i] * jw.data()[i];
      for (std::size_t i = 0; i < dw.size(); ++i) rhs += back.w.data()[i] * dw.data()[i];
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    {
      const RealTensor f = uniform_tensor({2, 4, 3, 3}, rng);
      const RealTensor df = uniform_tensor(f.shape(), rng);
      std::vector<Vec4> u(2);
      std::uniform_real_distribution<double> dist(-1, 1);
      for (auto& v : u)
        for (double& c : v) c = dist(rng);
      const std::vector<Vec4> jd = jvp_aggregate(df, f);
      const RealTensor jt = vjp_aggregate(u, f);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t b = 0; b < 2; ++b)
        for (int c = 0; c < 4; ++c) lhs += u[b][c] * jd[b][c];
      for (std::size_t i = 0; i < df.size(); ++i) rhs += jt.data()[i] * df.data()[i];
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    {
      std::uniform_real_distribution<double> dist(-1, 1);
      RawRotationVector raw, draw;
      for (double& v : raw.r) v = dist(rng);
      for (double& v : draw.r) v = dist(rng);
      Vec3 ua{dist(rng), dist(rng), dist(rng)};
      const double uth = dist(rng);
      Vec3 da;
      double dth;
      jvp_normalize(draw, raw, da, dth);
      const RawRotationVector gr = vjp_normalize(ua, uth, raw);
      double lhs = ua[0] * da[0] + ua[1] * da[1] + ua[2] * da[2] + uth * dth;
      double rhs = 0.0;
      for (int c = 0; c < 4; ++c) rhs += gr.r[c] * draw.r[c];
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    {
      std::uniform_real_distribution<double> dist(-1, 1);
      const RotationParams p = random_rotation(rng);
      Mat3 u;
      Vec3 da{dist(rng), dist(rng), dist(rng)};
      const double dth = dist(rng);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) u.m[i][j] = dist(rng);
      const Mat3 jd = jvp_rodrigues(da, dth, p);
      Vec3 ga;
      double gth;
      vjp_rodrigues(u, p, ga, gth);
      double lhs = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) lhs += u.m[i][j] * jd.m[i][j];
      const double rhs = ga[0] * da[0] + ga[1] * da[1] + ga[2] * da[2] + gth * dth;
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    {
      std::uniform_real_distribution<double> dist(-1, 1);
      const KernelBank5D bank = random_bank(rng, 2, 1, 3);
      const RotationParams p = random_rotation(rng);
      const RealTensor u = uniform_tensor(bank.weights.shape(), rng);
      const RealTensor du = uniform_tensor(bank.weights.shape(), rng);
      const Vec3 da{dist(rng), dist(rng), dist(rng)};
      const double dth = dist(rng);
      const RotateBankGrads back = vjp_rotate_bank(u, bank, p);
      // bank path (linear)
      const KernelBank5D dbank{du, 1, std::nullopt};
      const RealTensor jd_bank = rotate_bank(dbank, p).weights;
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) lhs += u.data()[i] * jd_bank.data()[i];
      for (std::size_t i = 0; i < du.size(); ++i) rhs += back.bank.data()[i] * du.data()[i];
      worst = std::max(worst, rel_gap(lhs, rhs));
      // parameter path
      const RealTensor jd_p = jvp_rotate_bank_params(bank, p, da, dth);
      lhs = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) lhs += u.data()[i] * jd_p.data()[i];
      rhs = back.axis[0] * da[0] + back.axis[1] * da[1] + back.axis[2] * da[2] + back.angle * dth;
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    {
      const RealTensor u2 = uniform_tensor({2, 1, 3, 3}, rng);
      const RealTensor d5 = uniform_tensor({2, 1, 3, 3, 3}, rng);
      const RealTensor jd = extract_mid_slice(d5);
      const RealTensor jt = vjp_mid_slice(u2, 3);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < u2.size(); ++i) lhs += u2.data()[i] * jd.data()[i];
      for (std::size_t i = 0; i < d5.size(); ++i) rhs += jt.data()[i] * d5.data()[i];
      worst = std::max(worst, rel_gap(lhs, rhs));
    }
    rec.bound("adjoint dot-product consistency (all primitives)", worst, 1e-8);
  }
  {
    // theta=0 gradient of rotate_bank is the inverse unit roll
    const KernelBank5D bank = random_bank(rng, 2, 2, 3);
    const RealTensor u = uniform_tensor(bank.weights.shape(), rng);
    const RotateBankGrads back = vjp_rotate_bank(u, bank, RotationParams{});
    rec.bound("rotate_bank adjoint at theta=0 equals inverse roll",
              max_abs_diff(back.bank, roll_bank(u, -1)), 1e-10);
  }
  {
    GradCheckConfig cfg;
    cfg.corrupt_vjp = corrupt_vjp;
    const GradReport report = grad_check(cfg, 2024);
    std::string detail = "worst rel err " + fmt(report.worst());
    if (!report.finite) detail = "non-finite at " + report.failure_location;
    rec.record("pipeline gradient vs central finite differences", report.pass(), detail);
  }
}

void transfer_suite(SuiteRecorder& rec, Rng& rng) {
  {
    std::vector<NamedTensor> tensors;
    tensors.push_back({"a", uniform_tensor({3}, rng)});
    tensors.push_back({"b", uniform_tensor({2, 4, 3}, rng)});
    tensors.push_back({"c", uniform_tensor({2, 1, 3, 3, 3}, rng)});
    const auto bytes = encode_archive(tensors);
    const auto loaded = decode_archive(bytes);
    bool ok = loaded.size() == tensors.size();
    for (std::size_t i = 0; ok && i < tensors.size(); ++i) {
      ok = loaded[i].name == tensors[i].name &&
           loaded[i].tensor.shape() == tensors[i].tensor.shape() &&
           loaded[i].tensor.values() == tensors[i].tensor.values();
    }
    rec.record("archive round trip bitwise lossless", ok, "ranks 1,3,5");
    const auto empty = encode_archive({});
    rec.record("empty archive is exactly 12 bytes", empty.size() == 12,
               std::to_string(empty.size()) + " bytes");
    auto corrupt = bytes;
    corrupt[0] = 'Y';
    bool threw = false;
    try {
      decode_archive(corrupt);
    } catch (const format_error&) {
      threw = true;
    }
    rec.record("bad magic rejected", threw, threw ? "format error raised" : "accepted bad magic");
    auto truncated = bytes;
    truncated.resize(bytes.size() - 5);
    threw = false;
    try {
      decode_archive(truncated);
    } catch (const corruption_error&) {
      threw = true;
    }
    rec.record("truncated payload rejected", threw,
               threw ? "corruption error raised" : "accepted truncation");
  }
  {
    const KernelBank5D bank = random_bank(rng, 2, 2, 5);
    const RotationParams p = random_rotation(rng);
    const RealTensor k2d = derive_2d_kernels(bank, p);
    const RealTensor mid = extract_mid_slice(derive_3d_kernels(bank, p).weights);
    rec.record("2D export equals mid-slice of 3D export",
               k2d.values() == mid.values(), "bitwise comparison");
  }
}

}  // namespace

std::vector<CheckResult> run_checks(std::string_view suite, std::uint64_t seed, bool corrupt_vjp) {
  std::vector<CheckResult> results;
  const bool all = suite == "all";
  if (all || suite == "spectral") {
    Rng rng(seed);
    SuiteRecorder rec{results, "spectral"};
    spectral_suite(rec, rng);
  }
  if (all || suite == "conv") {
    Rng rng(seed + 1);
    SuiteRecorder rec{results, "conv"};
    conv_suite(rec, rng);
  }
  if (all || suite == "grad") {
    Rng rng(seed + 2);
    SuiteRecorder rec{results, "grad"};
    grad_suite(rec, rng, corrupt_vjp);
  }
  if (all || suite == "transfer") {
    Rng rng(seed + 3);
    SuiteRecorder rec{results, "transfer"};
    transfer_suite(rec, rng);
  }
  if (results.empty()) {
    throw config_error("unknown check suite: " + std::string(suite));
  }
  return results;
}

}  // namespace crossd::checks

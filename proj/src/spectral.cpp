#include "crossd/spectral.hpp"

#include <cmath>
#include <numbers>

#include "crossd/detail/kernels.hpp"
#include "crossd/detail/parallel.hpp"

namespace crossd {

std::vector<double> dft_frequencies(std::size_t k) {
  if (k == 0) throw shape_error("kernel size must be >= 1");
  if (k % 2 == 0) {
    // The Nyquist bin of an even-length grid has no conjugate partner, so a
    // fractional phase shift would leave a genuinely complex kernel.
    throw unsupported_kernel_error("even kernel sizes are not supported");
  }
  std::vector<double> f(k);
  const std::size_t half = k / 2;
  for (std::size_t i = 0; i < k; ++i) {
    const double num = (i <= half) ? static_cast<double>(i)
                                   : static_cast<double>(i) - static_cast<double>(k);
    f[i] = num / static_cast<double>(k);
  }
  return f;
}

FreqGrid freq_grid(std::size_t k) {
  const std::vector<double> f = dft_frequencies(k);
  FreqGrid g;
  g.k = k;
  g.fx = RealTensor::zeros({k, k, k});
  g.fy = RealTensor::zeros({k, k, k});
  g.fz = RealTensor::zeros({k, k, k});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) {
        g.fx(i, j, l) = f[i];
        g.fy(i, j, l) = f[j];
        g.fz(i, j, l) = f[l];
      }
    }
  }
  return g;
}

FreqGrid rotate_freqs(const RotationMatrix& r, const FreqGrid& g) {
  FreqGrid out;
  out.k = g.k;
  out.fx = RealTensor::zeros(g.fx.shape());
  out.fy = RealTensor::zeros(g.fy.shape());
  out.fz = RealTensor::zeros(g.fz.shape());
  for (std::size_t i = 0; i < g.fx.size(); ++i) {
    const Vec3 f{g.fx.data()[i], g.fy.data()[i], g.fz.data()[i]};
    const Vec3 fr = matmul3(r, f);
    out.fx.data()[i] = fr[0];
    out.fy.data()[i] = fr[1];
    out.fz.data()[i] = fr[2];
  }
  return out;
}

PhaseField phase_factor(const FreqGrid& rotated) {
  PhaseField p;
  p.phi = ComplexTensor::zeros(rotated.fx.shape());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < p.phi.size(); ++i) {
    const double arg = -two_pi * (rotated.fx.data()[i] + rotated.fy.data()[i] + rotated.fz.data()[i]);
    p.phi.data()[i] = std::complex<double>(std::cos(arg), std::sin(arg));
  }
  return p;
}

namespace {

void check_cubic3(const Shape& s) {
  if (s.size() != 3 || s[0] != s[1] || s[1] != s[2]) {
    throw shape_error("expected a K×K×K volume");
  }
}

}  // namespace

ComplexTensor fft3(const RealTensor& kernel) {
  check_cubic3(kernel.shape());
  const std::size_t k = kernel.shape()[0];
  ComplexTensor spec = ComplexTensor::zeros(kernel.shape());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    spec.data()[i] = std::complex<double>(kernel.data()[i], 0.0);
  }
  detail::fft3_buf<double>(spec.data(), k, false);
  return spec;
}

std::pair<RealTensor, double> ifft3_real(const ComplexTensor& spectrum) {
  check_cubic3(spectrum.shape());
  const std::size_t k = spectrum.shape()[0];
  ComplexTensor work = spectrum;
  detail::fft3_buf<double>(work.data(), k, true);
  RealTensor out = RealTensor::zeros(spectrum.shape());
  double resid = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    out.data()[i] = work.data()[i].real();
    resid = std::max(resid, std::abs(work.data()[i].imag()));
  }
  return {std::move(out), resid};
}

RotatedBank rotate_bank(const KernelBank5D& bank, const RotationParams& p) {
  bank.validate();
  const std::size_t k = bank.kernel();
  const FreqGrid grid = rotate_freqs(rodrigues_approx(p), freq_grid(k));
  const PhaseField phase = phase_factor(grid);

  const std::size_t n_kernels = bank.c_out() * bank.c_in_per_group();
  const std::size_t vol = k * k * k;
  RotatedBank out;
  out.weights = RealTensor::zeros(bank.weights.shape());
  std::vector<double> residuals(n_kernels, 0.0);

  const detail::DftPlan<double> plan(k);
  detail::parallel_for(n_kernels, [&](std::size_t kidx) {
    std::vector<std::complex<double>> work(vol);
    const double* src = bank.weights.data() + kidx * vol;
    for (std::size_t i = 0; i < vol; ++i) work[i] = std::complex<double>(src[i], 0.0);
    detail::fft3_buf<double>(work.data(), k, false, plan);
    for (std::size_t i = 0; i < vol; ++i) work[i] *= phase.phi.data()[i];
    detail::fft3_buf<double>(work.data(), k, true, plan);
    double* dst = out.weights.data() + kidx * vol;
    double resid = 0.0;
    for (std::size_t i = 0; i < vol; ++i) {
      dst[i] = work[i].real();
      resid = std::max(resid, std::abs(work[i].imag()));
    }
    residuals[kidx] = resid;
  });

  for (double r : residuals) out.max_imag_residual = std::max(out.max_imag_residual, r);
  return out;
}

Vec3 shift_vector(const RotationParams& p) {
  const Mat3 r = rodrigues_approx(p);
  Vec3 s{};
  for (int a = 0; a < 3; ++a) {
    s[a] = r.m[0][a] + r.m[1][a] + r.m[2][a];  // (R^T · 1)_a
  }
  return s;
}

RealTensor extract_mid_slice(const RealTensor& bank_weights) {
  if (bank_weights.rank() != 5) {
    throw shape_error("mid-slice extraction expects a rank-5 bank");
  }
  const std::size_t k = bank_weights.shape()[2];
  return slice_axis(bank_weights, 2, k / 2);
}

RealTensor extract_mid_slice(const RotatedBank& rotated) {
  return extract_mid_slice(rotated.weights);
}

}  // namespace crossd

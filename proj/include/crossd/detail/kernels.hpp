#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "crossd/detail/parallel.hpp"

// Raw-buffer compute cores. The public f64 operators and the f32 benchmark
// path both instantiate these, so the benchmark measures the shipping code.

namespace crossd::detail {

// Cross-correlation (kernel not flipped), zero padding, grouped channels.
// x: B×Cin×H×W, w: Cout×CinG×Kh×Kw, y: B×Cout×Ho×Wo. bias may be null.
template <class T>
void conv2d_buf(const T* x, std::size_t B, std::size_t Cin, std::size_t H, std::size_t W,
                const T* w, std::size_t Cout, std::size_t CinG, std::size_t Kh, std::size_t Kw,
                std::size_t sh, std::size_t sw, std::size_t ph, std::size_t pw,
                std::size_t groups, const T* bias, T* y, std::size_t Ho, std::size_t Wo) {
  const std::size_t cout_per_g = Cout / groups;
  parallel_for(B * Cout, [&](std::size_t job) {
    const std::size_t b = job / Cout;
    const std::size_t co = job % Cout;
    const std::size_t g = co / cout_per_g;
    const T* xb = x + b * Cin * H * W;
    const T* wo = w + co * CinG * Kh * Kw;
    T* yo = y + (b * Cout + co) * Ho * Wo;
    for (std::size_t oh = 0; oh < Ho; ++oh) {
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        T acc = bias ? bias[co] : T(0);
        for (std::size_t cl = 0; cl < CinG; ++cl) {
          const T* xc = xb + (g * CinG + cl) * H * W;
          const T* wc = wo + cl * Kh * Kw;
          for (std::size_t kh = 0; kh < Kh; ++kh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * sh + kh) - static_cast<std::ptrdiff_t>(ph);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            const T* xrow = xc + static_cast<std::size_t>(ih) * W;
            const T* wrow = wc + kh * Kw;
            for (std::size_t kw = 0; kw < Kw; ++kw) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * sw + kw) - static_cast<std::ptrdiff_t>(pw);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
              acc += xrow[static_cast<std::size_t>(iw)] * wrow[kw];
            }
          }
        }
        yo[oh * Wo + ow] = acc;
      }
    }
  });
}

// x: B×Cin×D×H×W, w: Cout×CinG×Kd×Kh×Kw, y: B×Cout×Do×Ho×Wo.
template <class T>
void conv3d_buf(const T* x, std::size_t B, std::size_t Cin, std::size_t D, std::size_t H, std::size_t W,
                const T* w, std::size_t Cout, std::size_t CinG,
                std::size_t Kd, std::size_t Kh, std::size_t Kw,
                std::size_t sd, std::size_t sh, std::size_t sw,
                std::size_t pd, std::size_t ph, std::size_t pw,
                std::size_t groups, const T* bias, T* y,
                std::size_t Do, std::size_t Ho, std::size_t Wo) {
  const std::size_t cout_per_g = Cout / groups;
  parallel_for(B * Cout, [&](std::size_t job) {
    const std::size_t b = job / Cout;
    const std::size_t co = job % Cout;
    const std::size_t g = co / cout_per_g;
    const T* xb = x + b * Cin * D * H * W;
    const T* wo = w + co * CinG * Kd * Kh * Kw;
    T* yo = y + (b * Cout + co) * Do * Ho * Wo;
    for (std::size_t od = 0; od < Do; ++od) {
      for (std::size_t oh = 0; oh < Ho; ++oh) {
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          T acc = bias ? bias[co] : T(0);
          for (std::size_t cl = 0; cl < CinG; ++cl) {
            const T* xc = xb + (g * CinG + cl) * D * H * W;
            const T* wc = wo + cl * Kd * Kh * Kw;
            for (std::size_t kd = 0; kd < Kd; ++kd) {
              const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(od * sd + kd) - static_cast<std::ptrdiff_t>(pd);
              if (id < 0 || id >= static_cast<std::ptrdiff_t>(D)) continue;
              for (std::size_t kh = 0; kh < Kh; ++kh) {
                const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * sh + kh) - static_cast<std::ptrdiff_t>(ph);
                if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                const T* xrow = xc + (static_cast<std::size_t>(id) * H + static_cast<std::size_t>(ih)) * W;
                const T* wrow = wc + (kd * Kh + kh) * Kw;
                for (std::size_t kw = 0; kw < Kw; ++kw) {
                  const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * sw + kw) - static_cast<std::ptrdiff_t>(pw);
                  if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                  acc += xrow[static_cast<std::size_t>(iw)] * wrow[kw];
                }
              }
            }
          }
          yo[(od * Ho + oh) * Wo + ow] = acc;
        }
      }
    }
  });
}

// Direct DFT for one axis length. Kernel extents are tiny (<= 7), where the
// direct transform beats a general FFT on communication cost alone.
template <class T>
struct DftPlan {
  std::size_t n = 0;
  std::vector<std::complex<T>> twiddle;  // exp(-2*pi*i*k/n)

  explicit DftPlan(std::size_t length) : n(length), twiddle(length) {
    const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = step * static_cast<double>(k);
      twiddle[k] = std::complex<T>(static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a)));
    }
  }

  // scratch must hold n entries. inverse uses conjugate twiddles, unscaled.
  void transform(std::complex<T>* line, std::size_t stride, std::complex<T>* scratch,
                 bool inverse) const {
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<T> acc(0, 0);
      std::size_t tw_index = 0;
      for (std::size_t j = 0; j < n; ++j) {
        std::complex<T> t = twiddle[tw_index];
        if (inverse) t = std::conj(t);
        acc += line[j * stride] * t;
        tw_index += k;
        if (tw_index >= n) tw_index -= n;
      }
      scratch[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) line[k * stride] = scratch[k];
  }
};

// In-place 3D DFT of a K×K×K volume. Inverse applies the 1/K^3 factor.
template <class T>
void fft3_buf(std::complex<T>* v, std::size_t K, bool inverse, const DftPlan<T>& plan) {
  std::vector<std::complex<T>> scratch(K);
  // axis 2: contiguous lines
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      plan.transform(v + (i * K + j) * K, 1, scratch.data(), inverse);
  // axis 1: stride K
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t l = 0; l < K; ++l)
      plan.transform(v + i * K * K + l, K, scratch.data(), inverse);
  // axis 0: stride K*K
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t l = 0; l < K; ++l)
      plan.transform(v + j * K + l, K * K, scratch.data(), inverse);
  if (inverse) {
    const T norm = T(1) / static_cast<T>(K * K * K);
    const std::size_t total = K * K * K;
    for (std::size_t i = 0; i < total; ++i) v[i] *= norm;
  }
}

template <class T>
void fft3_buf(std::complex<T>* v, std::size_t K, bool inverse) {
  DftPlan<T> plan(K);
  fft3_buf(v, K, inverse, plan);
}

}  // namespace crossd::detail

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "crossd/conv.hpp"
#include "crossd/rotation.hpp"
#include "crossd/tensor.hpp"

namespace crossd {

struct unsupported_kernel_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-axis DFT frequencies in cycles per sample, broadcast to the cube.
// fx varies along kernel axis 0, fy along axis 1, fz along axis 2.
struct FreqGrid {
  std::size_t k = 0;
  RealTensor fx, fy, fz;  // each K×K×K
};

// Unit-modulus spectrum multiplier exp(-2*pi*i*(fx' + fy' + fz')).
struct PhaseField {
  ComplexTensor phi;  // K×K×K
};

struct RotatedBank {
  RealTensor weights;            // same shape as the source bank
  double max_imag_residual = 0;  // worst |Im| discarded by the inverse transform
};

// Signed DFT frequency ladder for odd K: 0, 1/K, ..., -1/K.
std::vector<double> dft_frequencies(std::size_t k);

FreqGrid freq_grid(std::size_t k);
FreqGrid rotate_freqs(const RotationMatrix& r, const FreqGrid& g);
PhaseField phase_factor(const FreqGrid& rotated);

// Unnormalized forward 3D DFT; the inverse carries the 1/K^3 factor.
ComplexTensor fft3(const RealTensor& kernel);
std::pair<RealTensor, double> ifft3_real(const ComplexTensor& spectrum);

// The full Eq-chain per kernel: FFT, phase multiply, inverse FFT, real part.
RotatedBank rotate_bank(const KernelBank5D& bank, const RotationParams& p);

// Effective circular shift the phase field applies, in samples: R^T · (1,1,1).
Vec3 shift_vector(const RotationParams& p);

// Depth slice at index floor(K/2) of every kernel: Cout × Cin/G × K × K.
RealTensor extract_mid_slice(const RealTensor& bank_weights);
RealTensor extract_mid_slice(const RotatedBank& rotated);

}  // namespace crossd

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crossd/conv.hpp"
#include "crossd/rotation.hpp"
#include "crossd/tensor.hpp"

// Brute-force reference implementations and the invariant suites behind the
// `check` subcommand. Everything here is written as plain nested loops or
// naive DFT sums, independent of the library's compute kernels, so it can
// serve as an oracle for them.

namespace crossd::checks {

RealTensor conv2d_ref(const RealTensor& x, const RealTensor& w, const ConvGeometry& geom,
                      std::size_t groups = 1, const std::vector<double>* bias = nullptr);
RealTensor conv3d_ref(const RealTensor& x, const RealTensor& w5d, const ConvGeometry& geom,
                      std::size_t groups = 1, const std::vector<double>* bias = nullptr);
RealTensor acs_conv3d_ref(const RealTensor& x, const RealTensor& w2d, const ConvGeometry& geom);

// O(K^6) direct DFT of a K×K×K volume and its inverse.
ComplexTensor dft3_ref(const RealTensor& volume);
RealTensor idft3_real_ref(const ComplexTensor& spectrum);

// Circular sub-sample translation via per-axis naive DFT interpolation.
RealTensor fractional_shift_ref(const RealTensor& volume, const Vec3& shift);

// Explicit-sum realization of the softmax-weighted aggregation.
std::vector<Vec4> aggregate_ref(const RealTensor& features);

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

// suite: all | spectral | conv | grad | transfer
std::vector<CheckResult> run_checks(std::string_view suite, std::uint64_t seed,
                                    bool corrupt_vjp = false);

}  // namespace crossd::checks

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "crossd/rng.hpp"
#include "crossd/tensor.hpp"

namespace crossd {

// Rotations are limited to at most 45 degrees either way.
inline constexpr double kMaxAngle = 0.7853981633974483;  // pi/4

// The secondary network: a single same-padded stride-1 convolution with four
// output channels (three axis components and one angle).
struct RotParamHead {
  RealTensor conv_weights;  // 4 × Cin × Kh × Kh
  Vec4 conv_bias{};

  std::size_t in_channels() const { return conv_weights.shape().at(1); }
  std::size_t kernel() const { return conv_weights.shape().at(2); }

  static RotParamHead zero(std::size_t c_in, std::size_t kernel = 3);
  static RotParamHead random(std::size_t c_in, std::size_t kernel, Rng& rng, double scale = 0.1);
};

struct RawRotationVector {
  Vec4 r{};  // kx, ky, kz, theta_raw
};

struct RotationParams {
  Vec3 axis{0.0, 0.0, 1.0};  // unit length
  double angle = 0.0;        // radians, |angle| <= pi/4
  bool degenerate_axis = false;
};

using RotationMatrix = Mat3;

// 4-channel spatial map from the secondary network, same H×W as the input.
RealTensor head_forward(const RotParamHead& head, const RealTensor& x);

// Softmax-weighted sum over spatial positions, per channel, per sample.
std::vector<RawRotationVector> aggregate_rotation_params(const RealTensor& features);

// Unit axis (fallback (0,0,1) for near-zero raw axes) and angle
// (pi/4)*tanh(theta_raw).
RotationParams normalize_rotation(const RawRotationVector& raw);

// Skew-symmetric cross-product matrix of the axis.
Mat3 skew(const Vec3& axis);

// Small-angle rotation matrix: exactly I + angle * skew(axis).
RotationMatrix rodrigues_approx(const RotationParams& p);

}  // namespace crossd

#include "crossd/rotation.hpp"

#include <cmath>

#include "crossd/conv.hpp"

namespace crossd {

RotParamHead RotParamHead::zero(std::size_t c_in, std::size_t kernel) {
  RotParamHead head;
  head.conv_weights = RealTensor::zeros({4, c_in, kernel, kernel});
  return head;
}

RotParamHead RotParamHead::random(std::size_t c_in, std::size_t kernel, Rng& rng, double scale) {
  RotParamHead head;
  head.conv_weights = uniform_tensor({4, c_in, kernel, kernel}, rng, -scale, scale);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& b : head.conv_bias) b = dist(rng);
  return head;
}

RealTensor head_forward(const RotParamHead& head, const RealTensor& x) {
  if (x.rank() != 4) throw shape_error("head input must be B×C×H×W");
  if (head.conv_weights.rank() != 4 || head.conv_weights.shape()[0] != 4) {
    throw shape_error("head must have exactly 4 output channels");
  }
  if (x.shape()[1] != head.in_channels()) {
    throw shape_error("head input channel count mismatch");
  }
  const std::size_t kh = head.kernel();
  if (x.shape()[2] < kh || x.shape()[3] < kh) {
    throw shape_error("head input smaller than its kernel");
  }
  const std::vector<double> bias(head.conv_bias.begin(), head.conv_bias.end());
  return conv2d(x, head.conv_weights, ConvGeometry::same(kh, 2), 1, &bias);
}

std::vector<RawRotationVector> aggregate_rotation_params(const RealTensor& features) {
  if (features.rank() != 4 || features.shape()[1] != 4) {
    throw shape_error("aggregation expects B×4×H×W features");
  }
  const std::size_t B = features.shape()[0];
  const std::size_t hw = features.shape()[2] * features.shape()[3];
  std::vector<RawRotationVector> out(B);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double* f = features.data() + (b * 4 + c) * hw;
      double m = f[0];
      for (std::size_t i = 1; i < hw; ++i) m = std::max(m, f[i]);
      double den = 0.0;
      for (std::size_t i = 0; i < hw; ++i) den += std::exp(f[i] - m);
      double num = 0.0;
      for (std::size_t i = 0; i < hw; ++i) num += f[i] * std::exp(f[i] - m);
      out[b].r[c] = num / den;
    }
  }
  return out;
}

RotationParams normalize_rotation(const RawRotationVector& raw) {
  RotationParams p;
  const double kx = raw.r[0], ky = raw.r[1], kz = raw.r[2];
  const double norm = std::sqrt(kx * kx + ky * ky + kz * kz);
  if (norm < 1e-8) {
    p.axis = {0.0, 0.0, 1.0};
    p.degenerate_axis = true;
  } else {
    p.axis = {kx / norm, ky / norm, kz / norm};
  }
  p.angle = kMaxAngle * std::tanh(raw.r[3]);
  return p;
}

Mat3 skew(const Vec3& axis) {
  Mat3 k;
  k.m[0][1] = -axis[2];
  k.m[0][2] = axis[1];
  k.m[1][0] = axis[2];
  k.m[1][2] = -axis[0];
  k.m[2][0] = -axis[1];
  k.m[2][1] = axis[0];
  return k;
}

RotationMatrix rodrigues_approx(const RotationParams& p) {
  const Mat3 k = skew(p.axis);
  Mat3 r = Mat3::identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.m[i][j] += p.angle * k.m[i][j];
    }
  }
  return r;
}

}  // namespace crossd

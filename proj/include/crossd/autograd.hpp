#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossd/pipeline.hpp"

namespace crossd {

// ---- per-primitive vector-Jacobian products -------------------------------

struct Conv2dGrads {
  RealTensor x;
  RealTensor w;
  std::vector<double> bias;  // always computed; ignore when the forward had none
};

struct Conv3dGrads {
  RealTensor x;
  RealTensor w;
  std::vector<double> bias;
};

Conv2dGrads vjp_conv2d(const RealTensor& upstream, const RealTensor& x, const RealTensor& w,
                       const ConvGeometry& geom, std::size_t groups = 1);
Conv3dGrads vjp_conv3d(const RealTensor& upstream, const RealTensor& x, const KernelBank5D& w,
                       const ConvGeometry& geom);

// upstream: one 4-vector per sample; returns grad wrt the B×4×H×W features.
RealTensor vjp_aggregate(const std::vector<Vec4>& upstream, const RealTensor& features);
std::vector<Vec4> jvp_aggregate(const RealTensor& d_features, const RealTensor& features);

// Gradient through axis normalization and the tanh angle squashing. The
// degenerate fallback axis is locally constant: zero gradient on the axis path.
RawRotationVector vjp_normalize(const Vec3& upstream_axis, double upstream_angle,
                                const RawRotationVector& raw);
void jvp_normalize(const RawRotationVector& d_raw, const RawRotationVector& raw,
                   Vec3& d_axis, double& d_angle);

// Adjoint of R = I + angle*skew(axis).
void vjp_rodrigues(const Mat3& upstream, const RotationParams& p, Vec3& grad_axis,
                   double& grad_angle);
Mat3 jvp_rodrigues(const Vec3& d_axis, double d_angle, const RotationParams& p);

struct RotateBankGrads {
  RealTensor bank;
  Vec3 axis{};
  double angle = 0.0;
};

RotateBankGrads vjp_rotate_bank(const RealTensor& upstream, const KernelBank5D& bank,
                                const RotationParams& p);
// Directional derivative of rotate_bank along (d_axis, d_angle), bank fixed.
RealTensor jvp_rotate_bank_params(const KernelBank5D& bank, const RotationParams& p,
                                  const Vec3& d_axis, double d_angle);

// Adjoint of mid-slice extraction: scatter into the middle depth plane.
RealTensor vjp_mid_slice(const RealTensor& upstream, std::size_t kernel);

// ---- full-pipeline tape ----------------------------------------------------

// Saved intermediates from one crossd_forward_2d evaluation, in application
// order; the backward pass replays them in reverse.
struct PipelineTape {
  RotationMode mode = RotationMode::PerSample;
  ConvGeometry geom;
  RealTensor x;
  RealTensor feats;
  std::vector<RawRotationVector> raws;
  RawRotationVector raw_mean;                // batch-mean mode only
  std::vector<RotationParams> params;        // B entries, or 1 in batch-mean mode
  std::vector<RealTensor> kernels2d;         // matching params
  RealTensor y;
};

// Test hooks: deliberate corruptions for negative controls.
struct VjpHooks {
  bool flip_normalize_angle_sign = false;
};

RealTensor crossd_forward_2d_tape(const RealTensor& x, const KernelBank5D& bank,
                                  const RotParamHead& head, const ConvGeometry& geom,
                                  RotationMode mode, PipelineTape& tape);

struct PipelineGrads {
  RealTensor bank_w;
  std::vector<double> bank_bias;
  RealTensor head_w;
  Vec4 head_b{};
  RealTensor x;
};

PipelineGrads crossd_backward(const RealTensor& upstream, const PipelineTape& tape,
                              const KernelBank5D& bank, const RotParamHead& head,
                              const VjpHooks* hooks = nullptr);

// ---- finite-difference certification ----------------------------------------

struct GradCheckConfig {
  std::size_t batch = 1;
  std::size_t c_in = 1;
  std::size_t c_out = 2;
  std::size_t kernel = 3;
  std::size_t height = 5;
  std::size_t width = 5;
  std::size_t head_kernel = 3;
  RotationMode mode = RotationMode::PerSample;
  double step = 1e-5;
  double threshold = 1e-4;
  bool zero_head = false;    // exercise the degenerate-axis fallback
  bool corrupt_vjp = false;  // negative-control hook
};

struct GradReport {
  struct Entry {
    std::string parameter;
    double max_rel_err = 0.0;
  };
  std::vector<Entry> entries;
  double step = 1e-5;
  double threshold = 1e-4;
  bool finite = true;
  std::string failure_location;

  double worst() const;
  bool pass() const;
};

// Compares the analytic pipeline gradients against central finite differences
// for every leaf parameter (bank weights, head weights, head bias).
GradReport grad_check(const GradCheckConfig& config, std::uint64_t seed);

}  // namespace crossd

#pragma once

#include "crossd/conv.hpp"
#include "crossd/rotation.hpp"
#include "crossd/spectral.hpp"

namespace crossd {

// Per-sample: every batch element is convolved with its own rotated kernel.
// Batch-mean: raw rotation vectors are averaged before normalization and one
// kernel serves the whole batch.
enum class RotationMode { PerSample, BatchMean };

RawRotationVector mean_raw(const std::vector<RawRotationVector>& raws);

// Head -> aggregation -> normalization -> bank rotation -> mid-slice -> conv2d.
RealTensor crossd_forward_2d(const RealTensor& x, const KernelBank5D& bank,
                             const RotParamHead& head, const ConvGeometry& geom,
                             RotationMode mode = RotationMode::PerSample);

// The rotated bank used directly as a genuine 3D kernel.
RealTensor crossd_forward_3d(const RealTensor& x, const KernelBank5D& bank,
                             const RotationParams& p, const ConvGeometry& geom);

}  // namespace crossd

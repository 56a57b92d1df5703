#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "crossd/tensor.hpp"

namespace crossd {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stride and zero-padding per spatial axis.
struct ConvGeometry {
  std::vector<std::size_t> stride;
  std::vector<std::size_t> padding;

  // stride 1, padding floor(kernel/2) on every spatial axis
  static ConvGeometry same(std::size_t kernel, std::size_t spatial_rank);
  // stride 1, padding 0
  static ConvGeometry valid(std::size_t spatial_rank);
};

// Output extent floor((in + 2p - k)/s) + 1; throws shape_error when < 1.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t padding);

// The learnable 3D weight bank shared by the 2D and 3D convolution paths.
struct KernelBank5D {
  RealTensor weights;  // Cout × Cin/G × K × K × K
  std::size_t groups = 1;
  std::optional<std::vector<double>> bias;  // length Cout

  std::size_t c_out() const { return weights.shape().at(0); }
  std::size_t c_in_per_group() const { return weights.shape().at(1); }
  std::size_t kernel() const { return weights.shape().at(2); }
  void validate() const;
};

// Cross-correlation (kernel not flipped) with zero padding.
// x: B×Cin×H×W, w: Cout×Cin/G×Kh×Kw -> B×Cout×Ho×Wo.
RealTensor conv2d(const RealTensor& x, const RealTensor& w, const ConvGeometry& geom,
                  std::size_t groups = 1, const std::vector<double>* bias = nullptr);

// x: B×Cin×D×H×W -> B×Cout×Do×Ho×Wo.
RealTensor conv3d(const RealTensor& x, const KernelBank5D& w, const ConvGeometry& geom);

// Contiguous output-channel partition for the three orthogonal views:
// ceil(C/3), ceil(rest/2), remainder.
std::array<std::size_t, 3> acs_channel_split(std::size_t c_out);

// Applies 2D kernels along the axial, coronal and sagittal views of a volume.
// Each partition convolves with the kernel given extent 1 along its view axis;
// geom is interpreted as for a cubic K×K×K conv3d, so the view-axis padding is
// reduced by floor(K/2) (it must not go negative).
// x: B×Cin×D×H×W, w2d: Cout×Cin×K×K.
RealTensor acs_conv3d(const RealTensor& x, const RealTensor& w2d, const ConvGeometry& geom);

}  // namespace crossd

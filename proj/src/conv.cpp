#include "crossd/conv.hpp"

#include <string>

#include "crossd/detail/kernels.hpp"

namespace crossd {

ConvGeometry ConvGeometry::same(std::size_t kernel, std::size_t spatial_rank) {
  return ConvGeometry{std::vector<std::size_t>(spatial_rank, 1),
                      std::vector<std::size_t>(spatial_rank, kernel / 2)};
}

ConvGeometry ConvGeometry::valid(std::size_t spatial_rank) {
  return ConvGeometry{std::vector<std::size_t>(spatial_rank, 1),
                      std::vector<std::size_t>(spatial_rank, 0)};
}

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t padding) {
  if (stride == 0) {
    throw shape_error("stride must be >= 1");
  }
  const std::size_t padded = in + 2 * padding;
  if (padded < kernel) {
    throw shape_error("kernel does not fit padded input (output extent < 1)");
  }
  return (padded - kernel) / stride + 1;
}

void KernelBank5D::validate() const {
  if (weights.rank() != 5) {
    throw shape_error("kernel bank must have rank 5");
  }
  const std::size_t k = weights.shape()[2];
  if (weights.shape()[3] != k || weights.shape()[4] != k) {
    throw shape_error("kernel bank must be cubic (K×K×K)");
  }
  if (k % 2 == 0) {
    throw shape_error("kernel bank size must be odd");
  }
  if (groups == 0 || c_out() % groups != 0) {
    throw shape_error("output channels must divide evenly into groups");
  }
  if (bias && bias->size() != c_out()) {
    throw shape_error("bias length must equal output channel count");
  }
}

namespace {

void check_geom_rank(const ConvGeometry& geom, std::size_t spatial_rank) {
  if (geom.stride.size() != spatial_rank || geom.padding.size() != spatial_rank) {
    throw shape_error("geometry rank does not match spatial rank");
  }
}

}  // namespace

RealTensor conv2d(const RealTensor& x, const RealTensor& w, const ConvGeometry& geom,
                  std::size_t groups, const std::vector<double>* bias) {
  if (x.rank() != 4) throw shape_error("conv2d input must be B×C×H×W");
  if (w.rank() != 4) throw shape_error("conv2d weights must be Cout×Cin/G×Kh×Kw");
  check_geom_rank(geom, 2);

  const std::size_t B = x.shape()[0], Cin = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const std::size_t Cout = w.shape()[0], CinG = w.shape()[1], Kh = w.shape()[2], Kw = w.shape()[3];
  if (groups == 0 || Cin % groups != 0 || Cout % groups != 0) {
    throw shape_error("channel counts must divide evenly into groups");
  }
  if (CinG != Cin / groups) {
    throw shape_error("weight channel extent does not match input channels / groups");
  }
  if (bias && bias->size() != Cout) {
    throw shape_error("bias length must equal output channel count");
  }
  const std::size_t Ho = conv_out_extent(H, Kh, geom.stride[0], geom.padding[0]);
  const std::size_t Wo = conv_out_extent(W, Kw, geom.stride[1], geom.padding[1]);

  RealTensor y = RealTensor::zeros({B, Cout, Ho, Wo});
  detail::conv2d_buf<double>(x.data(), B, Cin, H, W, w.data(), Cout, CinG, Kh, Kw,
                             geom.stride[0], geom.stride[1], geom.padding[0], geom.padding[1],
                             groups, bias ? bias->data() : nullptr, y.data(), Ho, Wo);
  return y;
}

RealTensor conv3d(const RealTensor& x, const KernelBank5D& w, const ConvGeometry& geom) {
  w.validate();
  if (x.rank() != 5) throw shape_error("conv3d input must be B×C×D×H×W");
  check_geom_rank(geom, 3);

  const std::size_t B = x.shape()[0], Cin = x.shape()[1];
  const std::size_t D = x.shape()[2], H = x.shape()[3], W = x.shape()[4];
  const std::size_t Cout = w.c_out(), CinG = w.c_in_per_group(), K = w.kernel();
  if (Cin % w.groups != 0 || CinG != Cin / w.groups) {
    throw shape_error("weight channel extent does not match input channels / groups");
  }
  const std::size_t Do = conv_out_extent(D, K, geom.stride[0], geom.padding[0]);
  const std::size_t Ho = conv_out_extent(H, K, geom.stride[1], geom.padding[1]);
  const std::size_t Wo = conv_out_extent(W, K, geom.stride[2], geom.padding[2]);

  RealTensor y = RealTensor::zeros({B, Cout, Do, Ho, Wo});
  detail::conv3d_buf<double>(x.data(), B, Cin, D, H, W, w.weights.data(), Cout, CinG, K, K, K,
                             geom.stride[0], geom.stride[1], geom.stride[2],
                             geom.padding[0], geom.padding[1], geom.padding[2], w.groups,
                             w.bias ? w.bias->data() : nullptr, y.data(), Do, Ho, Wo);
  return y;
}

std::array<std::size_t, 3> acs_channel_split(std::size_t c_out) {
  if (c_out < 3) {
    throw config_error("axial/coronal/sagittal split needs at least 3 output channels");
  }
  const std::size_t a = (c_out + 2) / 3;
  const std::size_t b = (c_out - a + 1) / 2;
  return {a, b, c_out - a - b};
}

RealTensor acs_conv3d(const RealTensor& x, const RealTensor& w2d, const ConvGeometry& geom) {
  if (x.rank() != 5) throw shape_error("acs_conv3d input must be B×C×D×H×W");
  if (w2d.rank() != 4) throw shape_error("acs_conv3d weights must be Cout×Cin×K×K");
  check_geom_rank(geom, 3);

  const std::size_t B = x.shape()[0], Cin = x.shape()[1];
  const std::size_t D = x.shape()[2], H = x.shape()[3], W = x.shape()[4];
  const std::size_t Cout = w2d.shape()[0], K = w2d.shape()[2];
  if (w2d.shape()[1] != Cin) throw shape_error("weight channel extent does not match input");
  if (w2d.shape()[3] != K) throw shape_error("acs kernels must be square");

  const auto split = acs_channel_split(Cout);
  const std::size_t half = K / 2;
  for (std::size_t a = 0; a < 3; ++a) {
    if (geom.padding[a] < half) {
      throw config_error("acs_conv3d needs padding >= floor(K/2) on every axis");
    }
  }
  const std::size_t Do = conv_out_extent(D, K, geom.stride[0], geom.padding[0]);
  const std::size_t Ho = conv_out_extent(H, K, geom.stride[1], geom.padding[1]);
  const std::size_t Wo = conv_out_extent(W, K, geom.stride[2], geom.padding[2]);

  RealTensor y = RealTensor::zeros({B, Cout, Do, Ho, Wo});
  const std::size_t out_vol = Do * Ho * Wo;

  std::size_t first = 0;
  for (std::size_t view = 0; view < 3; ++view) {
    const std::size_t part = split[view];
    if (part == 0) {
      continue;
    }
    // kernel extent 1 along the view axis, K on the in-plane axes
    std::size_t Kd = K, Kh = K, Kw = K;
    std::size_t pd = geom.padding[0], ph = geom.padding[1], pw = geom.padding[2];
    if (view == 0) {
      Kd = 1;
      pd -= half;
    } else if (view == 1) {
      Kh = 1;
      ph -= half;
    } else {
      Kw = 1;
      pw -= half;
    }

    // repack the part's 2D kernels into the oriented 3D layout
    RealTensor wk = RealTensor::zeros({part, Cin, Kd, Kh, Kw});
    for (std::size_t co = 0; co < part; ++co) {
      for (std::size_t ci = 0; ci < Cin; ++ci) {
        for (std::size_t i = 0; i < K; ++i) {
          for (std::size_t j = 0; j < K; ++j) {
            const double v = w2d(first + co, ci, i, j);
            if (view == 0) {
              wk(co, ci, std::size_t{0}, i, j) = v;
            } else if (view == 1) {
              wk(co, ci, i, std::size_t{0}, j) = v;
            } else {
              wk(co, ci, i, j, std::size_t{0}) = v;
            }
          }
        }
      }
    }

    RealTensor part_out = RealTensor::zeros({B, part, Do, Ho, Wo});
    detail::conv3d_buf<double>(x.data(), B, Cin, D, H, W, wk.data(), part, Cin, Kd, Kh, Kw,
                               geom.stride[0], geom.stride[1], geom.stride[2], pd, ph, pw, 1,
                               nullptr, part_out.data(), Do, Ho, Wo);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t co = 0; co < part; ++co) {
        const double* src = part_out.data() + (b * part + co) * out_vol;
        double* dst = y.data() + (b * Cout + first + co) * out_vol;
        for (std::size_t i = 0; i < out_vol; ++i) dst[i] = src[i];
      }
    }
    first += part;
  }
  return y;
}

}  // namespace crossd

#include "crossd/pipeline.hpp"

namespace crossd {

RawRotationVector mean_raw(const std::vector<RawRotationVector>& raws) {
  RawRotationVector mean;
  for (const auto& raw : raws) {
    for (int c = 0; c < 4; ++c) mean.r[c] += raw.r[c];
  }
  for (int c = 0; c < 4; ++c) mean.r[c] /= static_cast<double>(raws.size());
  return mean;
}

namespace {

RealTensor sample_view(const RealTensor& x, std::size_t b) {
  const std::size_t per = x.size() / x.shape()[0];
  std::vector<double> v(x.data() + b * per, x.data() + (b + 1) * per);
  Shape s = x.shape();
  s[0] = 1;
  return RealTensor::from_values(std::move(s), std::move(v));
}

}  // namespace

RealTensor crossd_forward_2d(const RealTensor& x, const KernelBank5D& bank,
                             const RotParamHead& head, const ConvGeometry& geom,
                             RotationMode mode) {
  bank.validate();
  const RealTensor feats = head_forward(head, x);
  const std::vector<RawRotationVector> raws = aggregate_rotation_params(feats);
  const std::vector<double>* bias = bank.bias ? &*bank.bias : nullptr;

  if (mode == RotationMode::BatchMean) {
    const RotationParams p = normalize_rotation(mean_raw(raws));
    const RealTensor kernel2d = extract_mid_slice(rotate_bank(bank, p));
    return conv2d(x, kernel2d, geom, bank.groups, bias);
  }

  const std::size_t B = x.shape()[0];
  RealTensor y;
  for (std::size_t b = 0; b < B; ++b) {
    const RotationParams p = normalize_rotation(raws[b]);
    const RealTensor kernel2d = extract_mid_slice(rotate_bank(bank, p));
    const RealTensor yb = conv2d(sample_view(x, b), kernel2d, geom, bank.groups, bias);
    if (b == 0) {
      Shape s = yb.shape();
      s[0] = B;
      y = RealTensor::zeros(s);
    }
    const std::size_t per = yb.size();
    for (std::size_t i = 0; i < per; ++i) y.data()[b * per + i] = yb.data()[i];
  }
  return y;
}

RealTensor crossd_forward_3d(const RealTensor& x, const KernelBank5D& bank,
                             const RotationParams& p, const ConvGeometry& geom) {
  KernelBank5D rotated{rotate_bank(bank, p).weights, bank.groups, bank.bias};
  return conv3d(x, rotated, geom);
}

}  // namespace crossd

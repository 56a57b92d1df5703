#include "crossd/tensor.hpp"

#include <cmath>
#include <utility>

namespace crossd {

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) {
      throw shape_error("tensor extents must be >= 1");
    }
    n *= e;
  }
  return n;
}

RealTensor RealTensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

RealTensor RealTensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

RealTensor RealTensor::full(Shape shape, double value) {
  RealTensor t;
  const std::size_t n = shape_product(shape);
  t.shape_ = std::move(shape);
  t.data_.assign(n, value);
  return t;
}

RealTensor RealTensor::from_values(Shape shape, std::vector<double> values) {
  const std::size_t n = shape_product(shape);
  if (values.size() != n) {
    throw shape_error("value count does not match shape product");
  }
  RealTensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

std::size_t RealTensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw index_error("axis out of range");
  }
  return shape_[axis];
}

std::vector<std::size_t> RealTensor::strides() const {
  std::vector<std::size_t> s(shape_.size(), 1);
  for (std::size_t i = shape_.size(); i-- > 1;) {
    s[i - 1] = s[i] * shape_[i];
  }
  return s;
}

std::size_t RealTensor::offset(const std::vector<std::size_t>& index) const {
  if (index.size() != shape_.size()) {
    throw index_error("index rank does not match tensor rank");
  }
  std::size_t off = 0;
  for (std::size_t a = 0; a < index.size(); ++a) {
    if (index[a] >= shape_[a]) {
      throw index_error("index out of range");
    }
    off = off * shape_[a] + index[a];
  }
  return off;
}

std::size_t RealTensor::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw index_error("index rank does not match tensor rank");
  }
  std::size_t off = 0;
  std::size_t a = 0;
  for (std::size_t i : index) {
    if (i >= shape_[a]) {
      throw index_error("index out of range");
    }
    off = off * shape_[a] + i;
    ++a;
  }
  return off;
}

ComplexTensor ComplexTensor::zeros(Shape shape) {
  ComplexTensor t;
  const std::size_t n = shape_product(shape);
  t.shape_ = std::move(shape);
  t.data_.assign(n, std::complex<double>(0.0, 0.0));
  return t;
}

ComplexTensor ComplexTensor::from_values(Shape shape, std::vector<std::complex<double>> values) {
  const std::size_t n = shape_product(shape);
  if (values.size() != n) {
    throw shape_error("value count does not match shape product");
  }
  ComplexTensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

RealTensor slice_axis(const RealTensor& t, std::size_t axis, std::size_t pos) {
  if (axis >= t.rank()) {
    throw index_error("slice axis out of range");
  }
  if (pos >= t.shape()[axis]) {
    throw index_error("slice position out of range");
  }
  Shape out_shape;
  out_shape.reserve(t.rank() - 1);
  for (std::size_t a = 0; a < t.rank(); ++a) {
    if (a != axis) out_shape.push_back(t.shape()[a]);
  }
  if (out_shape.empty()) out_shape.push_back(1);  // rank-1 input degenerates to a scalar-ish tensor

  // outer × extent(axis) × inner decomposition of the row-major layout
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= t.shape()[a];
  for (std::size_t a = axis + 1; a < t.rank(); ++a) inner *= t.shape()[a];
  const std::size_t ext = t.shape()[axis];

  RealTensor out = RealTensor::zeros(out_shape);
  const double* src = t.data();
  double* dst = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* plane = src + (o * ext + pos) * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      dst[o * inner + i] = plane[i];
    }
  }
  return out;
}

RealTensor roll(const RealTensor& t, const std::vector<long long>& shifts) {
  if (shifts.size() != t.rank()) {
    throw shape_error("roll needs one shift per axis");
  }
  const std::size_t rank = t.rank();
  std::vector<std::size_t> norm(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    const long long ext = static_cast<long long>(t.shape()[a]);
    long long s = shifts[a] % ext;
    if (s < 0) s += ext;
    norm[a] = static_cast<std::size_t>(s);
  }

  RealTensor out = RealTensor::zeros(t.shape());
  const auto strides = t.strides();
  const double* src = t.data();
  double* dst = out.data();
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::size_t dst_off = 0;
    for (std::size_t a = 0; a < rank; ++a) {
      dst_off += ((idx[a] + norm[a]) % t.shape()[a]) * strides[a];
    }
    dst[dst_off] = src[flat];
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < t.shape()[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

double l2_norm(const RealTensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v * v;
  return std::sqrt(acc);
}

RealTensor add(const RealTensor& a, const RealTensor& b) {
  if (!a.same_shape(b)) {
    throw shape_error("elementwise add: shape mismatch");
  }
  RealTensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

RealTensor mul(const RealTensor& a, const RealTensor& b) {
  if (!a.same_shape(b)) {
    throw shape_error("elementwise mul: shape mismatch");
  }
  RealTensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

RealTensor scale(const RealTensor& a, double c) {
  RealTensor out = a;
  for (double& v : out.values()) v *= c;
  return out;
}

Mat3 Mat3::identity() {
  Mat3 r;
  r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
  return r;
}

Vec3 matmul3(const Mat3& a, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = a.m[i][0] * v[0] + a.m[i][1] * v[1] + a.m[i][2] * v[2];
  }
  return out;
}

}  // namespace crossd

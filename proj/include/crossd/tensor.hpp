#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace crossd {

using Shape = std::vector<std::size_t>;

struct shape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct index_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validates extents (all >= 1) and returns their product.
std::size_t shape_product(const Shape& shape);

// Dense row-major tensor of 64-bit floats. Operations return new tensors;
// in-place mutation through data() is reserved for single-owner code
// (construction, optimizer updates).
class RealTensor {
 public:
  RealTensor() = default;

  static RealTensor zeros(Shape shape);
  static RealTensor ones(Shape shape);
  static RealTensor full(Shape shape, double value);
  static RealTensor from_values(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool same_shape(const RealTensor& other) const { return shape_ == other.shape_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  // Row-major strides: stride of the last axis is 1.
  std::vector<std::size_t> strides() const;

  std::size_t offset(const std::vector<std::size_t>& index) const;

  template <class... Ix>
  double& operator()(Ix... ix) {
    return data_[flat_index({static_cast<std::size_t>(ix)...})];
  }
  template <class... Ix>
  const double& operator()(Ix... ix) const {
    return data_[flat_index({static_cast<std::size_t>(ix)...})];
  }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

// Dense row-major tensor of complex doubles (interleaved re/im pairs).
class ComplexTensor {
 public:
  ComplexTensor() = default;

  static ComplexTensor zeros(Shape shape);
  static ComplexTensor from_values(Shape shape, std::vector<std::complex<double>> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::complex<double>* data() { return data_.data(); }
  const std::complex<double>* data() const { return data_.data(); }
  std::vector<std::complex<double>>& values() { return data_; }
  const std::vector<std::complex<double>>& values() const { return data_; }

 private:
  Shape shape_;
  std::vector<std::complex<double>> data_;
};

RealTensor slice_axis(const RealTensor& t, std::size_t axis, std::size_t pos);

// Circular shift: the element at index i moves to (i + shift) mod extent,
// per axis. shifts.size() must equal t.rank().
RealTensor roll(const RealTensor& t, const std::vector<long long>& shifts);

double l2_norm(const RealTensor& t);

RealTensor add(const RealTensor& a, const RealTensor& b);
RealTensor mul(const RealTensor& a, const RealTensor& b);
RealTensor scale(const RealTensor& a, double c);

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

struct Mat3 {
  double m[3][3]{};
  static Mat3 identity();
};

Vec3 matmul3(const Mat3& a, const Vec3& v);

}  // namespace crossd

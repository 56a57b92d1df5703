#include <doctest.h>

#include <cmath>

#include "crossd/rng.hpp"
#include "crossd/tensor.hpp"

using namespace crossd;

TEST_CASE("constructors fill as requested") {
  const RealTensor z = RealTensor::zeros({2, 2});
  for (double v : z.values()) CHECK(v == 0.0);

  const RealTensor o = RealTensor::ones({3});
  CHECK(o.values() == std::vector<double>{1, 1, 1});

  const RealTensor f = RealTensor::from_values({2}, {5, 7});
  CHECK(f(std::size_t{0}) == 5);
  CHECK(f(std::size_t{1}) == 7);
}

TEST_CASE("invalid shapes are rejected") {
  CHECK_THROWS_AS(RealTensor::zeros({2, 0, 3}), shape_error);
  CHECK_THROWS_AS(RealTensor::from_values({2}, {1, 2, 3}), shape_error);
}

TEST_CASE("slice_axis extracts the fixed-position plane") {
  RealTensor t = RealTensor::zeros({3, 3, 3});
  for (std::size_t i = 0; i < 27; ++i) t.data()[i] = static_cast<double>(i);

  const RealTensor mid = slice_axis(t, 2, 1);
  REQUIRE(mid.shape() == Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(mid(i, j) == t(i, j, std::size_t{1}));
    }
  }

  CHECK_THROWS_AS(slice_axis(t, 2, 3), index_error);
}

TEST_CASE("slice_axis matches nested-loop extraction on random input") {
  Rng rng(7);
  const RealTensor t = uniform_tensor({4, 3, 5}, rng);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const RealTensor s = slice_axis(t, axis, 0);
    std::size_t flat = 0;
    for (std::size_t i = 0; i < t.shape()[0]; ++i) {
      for (std::size_t j = 0; j < t.shape()[1]; ++j) {
        for (std::size_t l = 0; l < t.shape()[2]; ++l) {
          const bool keep = (axis == 0 && i == 0) || (axis == 1 && j == 0) || (axis == 2 && l == 0);
          if (keep) CHECK(s.data()[flat++] == t(i, j, l));
        }
      }
    }
    CHECK(flat == s.size());
  }
}

TEST_CASE("roll moves element i to i+shift") {
  const RealTensor t = RealTensor::from_values({3}, {1, 2, 3});
  CHECK(roll(t, {1}).values() == std::vector<double>{3, 1, 2});
  CHECK(roll(t, {0}).values() == t.values());
  CHECK(roll(roll(t, {2}), {-2}).values() == t.values());
}

TEST_CASE("roll composes additively") {
  Rng rng(11);
  std::uniform_int_distribution<long long> shift(-9, 9);
  for (int rep = 0; rep < 20; ++rep) {
    const RealTensor t = uniform_tensor({3, 4, 2}, rng);
    const std::vector<long long> s1{shift(rng), shift(rng), shift(rng)};
    const std::vector<long long> s2{shift(rng), shift(rng), shift(rng)};
    const std::vector<long long> sum{s1[0] + s2[0], s1[1] + s2[1], s1[2] + s2[2]};
    CHECK(roll(roll(t, s1), s2).values() == roll(t, sum).values());
  }
}

TEST_CASE("l2_norm") {
  CHECK(l2_norm(RealTensor::from_values({2}, {3, 4})) == doctest::Approx(5.0).epsilon(1e-15));

  Rng rng(13);
  const RealTensor t = uniform_tensor({4, 4}, rng);
  double sq = 0.0;
  for (double v : t.values()) sq += v * v;
  const double n = l2_norm(t);
  CHECK(std::abs(n * n - sq) <= 1e-12 * sq);
}

TEST_CASE("elementwise ops require matching shapes") {
  const RealTensor a = RealTensor::ones({2, 2});
  const RealTensor b = RealTensor::ones({4});
  CHECK_THROWS_AS(add(a, b), shape_error);
  CHECK_THROWS_AS(mul(a, b), shape_error);
  CHECK(add(a, a).values() == std::vector<double>{2, 2, 2, 2});
  CHECK(mul(scale(a, 3.0), a).values() == std::vector<double>{3, 3, 3, 3});
}

TEST_CASE("matmul3") {
  const Vec3 v{1, 2, 3};
  const Vec3 same = matmul3(Mat3::identity(), v);
  CHECK(same == v);

  Mat3 rz = Mat3::identity();  // I + 0.1 * skew(z)
  rz.m[0][1] = -0.1;
  rz.m[1][0] = 0.1;
  const Vec3 r = matmul3(rz, Vec3{1, 0, 0});
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.1);
  CHECK(r[2] == 0.0);
}

TEST_CASE("row-major round trip over random shapes") {
  Rng rng(17);
  std::uniform_int_distribution<std::size_t> rank_dist(1, 5);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t rank = rank_dist(rng);
    std::uniform_int_distribution<std::size_t> ext(1, rank >= 4 ? 4 : 8);
    Shape shape(rank);
    for (auto& e : shape) e = ext(rng);

    RealTensor t = RealTensor::zeros(shape);
    std::vector<std::size_t> idx(rank, 0);
    double v = 0.0;
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      t.data()[t.offset(idx)] = v++;
      for (std::size_t a = rank; a-- > 0;) {
        if (++idx[a] < shape[a]) break;
        idx[a] = 0;
      }
    }
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      CHECK(t.data()[flat] == static_cast<double>(flat));
    }
  }
}

TEST_CASE("strides follow the row-major rule") {
  const RealTensor t = RealTensor::zeros({2, 3, 4});
  CHECK(t.strides() == std::vector<std::size_t>{12, 4, 1});
  CHECK(t.offset({1, 2, 3}) == 23);
  CHECK_THROWS_AS(t.offset({1, 3, 0}), index_error);
}

#include <doctest.h>

#include <cmath>

#include "crossd/checks.hpp"
#include "crossd/detail/parallel.hpp"
#include "crossd/pipeline.hpp"
#include "crossd/rng.hpp"

using namespace crossd;

namespace {

double max_abs_diff(const RealTensor& a, const RealTensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

RealTensor roll_each_kernel(const RealTensor& bank, long long s) {
  const std::size_t k = bank.shape()[2];
  const std::size_t vol = k * k * k;
  RealTensor out = RealTensor::zeros(bank.shape());
  for (std::size_t kidx = 0; kidx < bank.size() / vol; ++kidx) {
    const RealTensor one = RealTensor::from_values(
        {k, k, k}, std::vector<double>(bank.data() + kidx * vol, bank.data() + (kidx + 1) * vol));
    const RealTensor rolled = roll(one, {s, s, s});
    std::copy(rolled.data(), rolled.data() + vol, out.data() + kidx * vol);
  }
  return out;
}

}  // namespace

TEST_CASE("conv2d of all-ones with an all-ones 3x3 kernel sums to 9") {
  const RealTensor y = conv2d(RealTensor::ones({1, 1, 3, 3}), RealTensor::ones({1, 1, 3, 3}),
                              ConvGeometry::valid(2));
  REQUIRE(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y.values()[0] == 9.0);
}

TEST_CASE("conv2d with a centered delta kernel and same padding is the identity") {
  Rng rng(83);
  const RealTensor x = uniform_tensor({2, 1, 5, 5}, rng);
  RealTensor delta = RealTensor::zeros({1, 1, 3, 3});
  delta(std::size_t{0}, std::size_t{0}, std::size_t{1}, std::size_t{1}) = 1.0;
  CHECK(max_abs_diff(conv2d(x, delta, ConvGeometry::same(3, 2)), x) == 0.0);
}

TEST_CASE("conv2d matches the nested-loop oracle across geometries") {
  Rng rng(89);
  std::uniform_int_distribution<std::size_t> ext(4, 8), ker(1, 3), pad(0, 2), str(1, 2);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t H = ext(rng), W = ext(rng), Kh = ker(rng), Kw = ker(rng);
    const ConvGeometry g{{str(rng), str(rng)}, {pad(rng), pad(rng)}};
    if (H + 2 * g.padding[0] < Kh || W + 2 * g.padding[1] < Kw) continue;
    const bool grouped = rep % 3 == 0;
    const std::size_t groups = grouped ? 2 : 1;
    const RealTensor x = uniform_tensor({2, 4, H, W}, rng);
    const RealTensor w = uniform_tensor({4, 4 / groups, Kh, Kw}, rng);
    std::vector<double> bias{0.3, -0.4, 1.1, 0.0};
    const RealTensor got = conv2d(x, w, g, groups, &bias);
    const RealTensor want = checks::conv2d_ref(x, w, g, groups, &bias);
    CHECK(max_abs_diff(got, want) <= 1e-12);
  }
}

TEST_CASE("conv2d rejects impossible geometry") {
  CHECK_THROWS_AS(conv2d(RealTensor::ones({1, 1, 2, 2}), RealTensor::ones({1, 1, 3, 3}),
                         ConvGeometry::valid(2)),
                  shape_error);
  CHECK_THROWS_AS(conv2d(RealTensor::ones({1, 2, 5, 5}), RealTensor::ones({1, 1, 3, 3}),
                         ConvGeometry::same(3, 2)),
                  shape_error);
}

TEST_CASE("conv2d is linear in both arguments") {
  Rng rng(97);
  const RealTensor x = uniform_tensor({1, 2, 5, 5}, rng);
  const RealTensor w1 = uniform_tensor({2, 2, 3, 3}, rng);
  const RealTensor w2 = uniform_tensor({2, 2, 3, 3}, rng);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const double a = 0.6, b = -1.4;
  const RealTensor got = conv2d(x, add(scale(w1, a), scale(w2, b)), g);
  const RealTensor want = add(scale(conv2d(x, w1, g), a), scale(conv2d(x, w2, g), b));
  CHECK(max_abs_diff(got, want) <= 1e-12);
}

TEST_CASE("conv3d basics and oracle") {
  const KernelBank5D ones{RealTensor::ones({1, 1, 3, 3, 3}), 1, std::nullopt};
  const RealTensor y =
      conv3d(RealTensor::ones({1, 1, 3, 3, 3}), ones, ConvGeometry::valid(3));
  REQUIRE(y.shape() == Shape{1, 1, 1, 1, 1});
  CHECK(y.values()[0] == 27.0);

  Rng rng(101);
  const RealTensor x = uniform_tensor({1, 2, 4, 5, 4}, rng);
  RealTensor delta = RealTensor::zeros({2, 2, 3, 3, 3});
  // one centered delta per matching in/out channel pair
  delta(std::size_t{0}, std::size_t{0}, std::size_t{1}, std::size_t{1}, std::size_t{1}) = 1.0;
  delta(std::size_t{1}, std::size_t{1}, std::size_t{1}, std::size_t{1}, std::size_t{1}) = 1.0;
  const KernelBank5D id{delta, 1, std::nullopt};
  CHECK(max_abs_diff(conv3d(x, id, ConvGeometry::same(3, 3)), x) == 0.0);

  for (int rep = 0; rep < 5; ++rep) {
    const RealTensor xr = uniform_tensor({2, 2, 4, 4, 5}, rng);
    const KernelBank5D w{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
    const ConvGeometry g{{1, 2, 1}, {1, 1, 2}};
    CHECK(max_abs_diff(conv3d(xr, w, g), checks::conv3d_ref(xr, w.weights, g)) <= 1e-12);
  }

  // grouped, with bias
  const RealTensor xg = uniform_tensor({1, 4, 4, 4, 4}, rng);
  const KernelBank5D wg{uniform_tensor({4, 2, 3, 3, 3}, rng), 2,
                        std::vector<double>{0.1, -0.2, 0.3, 0.0}};
  const ConvGeometry gg = ConvGeometry::same(3, 3);
  const std::vector<double> bias = *wg.bias;
  CHECK(max_abs_diff(conv3d(xg, wg, gg), checks::conv3d_ref(xg, wg.weights, gg, 2, &bias)) <=
        1e-12);
}

TEST_CASE("acs channel partition") {
  CHECK(acs_channel_split(3) == std::array<std::size_t, 3>{1, 1, 1});
  CHECK(acs_channel_split(8) == std::array<std::size_t, 3>{3, 3, 2});
  CHECK(acs_channel_split(4) == std::array<std::size_t, 3>{2, 1, 1});
  CHECK_THROWS_AS(acs_channel_split(2), config_error);
  CHECK_THROWS_AS(
      acs_conv3d(RealTensor::ones({1, 1, 3, 3, 3}), RealTensor::ones({2, 1, 3, 3}),
                 ConvGeometry::same(3, 3)),
      config_error);
}

TEST_CASE("acs with delta kernels reproduces the volume in every part") {
  Rng rng(103);
  const RealTensor x = uniform_tensor({1, 1, 4, 4, 4}, rng);
  RealTensor w = RealTensor::zeros({3, 1, 3, 3});
  for (std::size_t co = 0; co < 3; ++co) w(co, std::size_t{0}, std::size_t{1}, std::size_t{1}) = 1.0;
  const RealTensor y = acs_conv3d(x, w, ConvGeometry::same(3, 3));
  REQUIRE(y.shape() == Shape{1, 3, 4, 4, 4});
  for (std::size_t co = 0; co < 3; ++co) {
    for (std::size_t i = 0; i < 64; ++i) {
      CHECK(y.data()[co * 64 + i] == x.data()[i]);
    }
  }
}

TEST_CASE("acs with one kernel per view matches the swept conv2d oracle") {
  Rng rng(107);
  const RealTensor x = uniform_tensor({1, 2, 4, 4, 4}, rng);
  const RealTensor w = uniform_tensor({3, 2, 3, 3}, rng);
  const ConvGeometry g = ConvGeometry::same(3, 3);
  const RealTensor got = acs_conv3d(x, w, g);
  const RealTensor want = checks::acs_conv3d_ref(x, w, g);
  CHECK(max_abs_diff(got, want) <= 1e-12);

  // the axial part is literally a conv2d swept along depth
  const ConvGeometry g2 = ConvGeometry::same(3, 2);
  for (std::size_t d = 0; d < 4; ++d) {
    RealTensor slice = RealTensor::zeros({1, 2, 4, 4});
    for (std::size_t ci = 0; ci < 2; ++ci)
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) slice(std::size_t{0}, ci, i, j) = x(std::size_t{0}, ci, d, i, j);
    RealTensor w0 = RealTensor::zeros({1, 2, 3, 3});
    std::copy(w.data(), w.data() + 18, w0.data());
    const RealTensor plane = conv2d(slice, w0, g2);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(got(std::size_t{0}, std::size_t{0}, d, i, j) ==
              doctest::Approx(plane(std::size_t{0}, std::size_t{0}, i, j)).epsilon(1e-14));
  }
}

TEST_CASE("acs random instances match the oracle") {
  Rng rng(109);
  for (int rep = 0; rep < 5; ++rep) {
    const RealTensor x = uniform_tensor({2, 2, 5, 4, 5}, rng);
    const RealTensor w = uniform_tensor({5, 2, 3, 3}, rng);
    const ConvGeometry g = ConvGeometry::same(3, 3);
    CHECK(max_abs_diff(acs_conv3d(x, w, g), checks::acs_conv3d_ref(x, w, g)) <= 1e-12);
  }
}

TEST_CASE("crossd forward with a zero head reduces to the rolled mid-slice conv") {
  Rng rng(113);
  const RealTensor x = uniform_tensor({2, 2, 6, 6}, rng);
  const KernelBank5D bank{uniform_tensor({3, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const RotParamHead head = RotParamHead::zero(2);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor y = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  const RealTensor want = conv2d(x, extract_mid_slice(roll_each_kernel(bank.weights, 1)), g);
  CHECK(max_abs_diff(y, want) <= 1e-10);
}

TEST_CASE("per-sample and batch-mean agree exactly for B=1") {
  Rng rng(127);
  const RealTensor x = uniform_tensor({1, 2, 5, 5}, rng);
  const KernelBank5D bank{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const RotParamHead head = RotParamHead::random(2, 3, rng, 0.5);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor a = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  const RealTensor b = crossd_forward_2d(x, bank, head, g, RotationMode::BatchMean);
  CHECK(a.values() == b.values());
}

TEST_CASE("K=1 bank with zero head scales the input") {
  Rng rng(131);
  const RealTensor x = uniform_tensor({1, 1, 4, 4}, rng);
  const KernelBank5D bank{RealTensor::from_values({1, 1, 1, 1, 1}, {2.5}), 1, std::nullopt};
  const RotParamHead head = RotParamHead::zero(1);
  const ConvGeometry g = ConvGeometry::same(1, 2);
  const RealTensor y = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  CHECK(max_abs_diff(y, scale(x, 2.5)) <= 1e-14);
}

TEST_CASE("crossd 3D path at theta=0 is a conv3d with the rolled bank") {
  Rng rng(137);
  const RealTensor x = uniform_tensor({1, 2, 4, 4, 4}, rng);
  const KernelBank5D bank{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const ConvGeometry g = ConvGeometry::same(3, 3);
  const RealTensor y = crossd_forward_3d(x, bank, RotationParams{}, g);
  const KernelBank5D rolled{roll_each_kernel(bank.weights, 1), 1, std::nullopt};
  CHECK(max_abs_diff(y, conv3d(x, rolled, g)) <= 1e-10);
}

TEST_CASE("a delta bank placed to compensate the unit roll is the exact identity") {
  Rng rng(911);
  const RealTensor x = uniform_tensor({1, 1, 4, 4, 4}, rng);
  // delta at (0,0,0) rolls to the kernel center (1,1,1) at theta=0
  RealTensor w = RealTensor::zeros({1, 1, 3, 3, 3});
  w.data()[0] = 1.0;
  const KernelBank5D bank{w, 1, std::nullopt};
  const RealTensor y = crossd_forward_3d(x, bank, RotationParams{}, ConvGeometry::same(3, 3));
  REQUIRE(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(y.data()[i] - x.data()[i]) <= 1e-12);
  }
}

TEST_CASE("results are independent of the thread budget") {
  Rng rng(919);
  const RealTensor x = uniform_tensor({2, 4, 8, 8}, rng);
  const RealTensor w = uniform_tensor({4, 4, 3, 3}, rng);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor serial = conv2d(x, w, g);
  set_thread_budget(3);
  const RealTensor threaded = conv2d(x, w, g);
  set_thread_budget(1);
  CHECK(serial.values() == threaded.values());
}

TEST_CASE("bank bias is added after the dynamic convolution") {
  Rng rng(929);
  const RealTensor x = uniform_tensor({1, 1, 5, 5}, rng);
  KernelBank5D bank{uniform_tensor({2, 1, 3, 3, 3}, rng), 1, std::nullopt};
  const RotParamHead head = RotParamHead::zero(1);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor plain = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  bank.bias = std::vector<double>{0.25, -1.5};
  const RealTensor biased = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 25; ++i) {
      CHECK(biased.data()[c * 25 + i] ==
            doctest::Approx(plain.data()[c * 25 + i] + (*bank.bias)[c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("2D and 3D paths agree on a single-slice volume") {
  Rng rng(139);
  const RealTensor x2 = uniform_tensor({1, 2, 5, 5}, rng);
  RealTensor x3 = RealTensor::zeros({1, 2, 1, 5, 5});
  std::copy(x2.data(), x2.data() + x2.size(), x3.data());
  const KernelBank5D bank{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const RotParamHead head = RotParamHead::zero(2);

  // zero head -> degenerate axis fallback with theta=0
  const RealTensor y2 =
      crossd_forward_2d(x2, bank, head, ConvGeometry::same(3, 2), RotationMode::PerSample);
  const RealTensor y3 = crossd_forward_3d(x3, bank, RotationParams{}, ConvGeometry::same(3, 3));
  REQUIRE(y3.shape() == Shape{1, 2, 1, 5, 5});
  CHECK(max_abs_diff(y2, RealTensor::from_values({1, 2, 5, 5}, y3.values())) <= 1e-12);
}

TEST_CASE("output shapes follow the geometry formula") {
  Rng rng(149);
  for (std::size_t s : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    for (std::size_t p : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
      const RealTensor x = uniform_tensor({1, 1, 9, 8}, rng);
      const RealTensor w = uniform_tensor({1, 1, 3, 3}, rng);
      const RealTensor y = conv2d(x, w, ConvGeometry{{s, s}, {p, p}});
      CHECK(y.shape()[2] == (9 + 2 * p - 3) / s + 1);
      CHECK(y.shape()[3] == (8 + 2 * p - 3) / s + 1);
    }
  }
}

TEST_CASE("crossd forward is bitwise reproducible") {
  Rng rng(151);
  const RealTensor x = uniform_tensor({2, 2, 6, 6}, rng);
  const KernelBank5D bank{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const RotParamHead head = RotParamHead::zero(2);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor a = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  const RealTensor b = crossd_forward_2d(x, bank, head, g, RotationMode::PerSample);
  CHECK(a.values() == b.values());
}

TEST_CASE("even kernels are rejected end to end") {
  const KernelBank5D bank{RealTensor::ones({1, 1, 4, 4, 4}), 1, std::nullopt};
  CHECK_THROWS_AS(
      crossd_forward_2d(RealTensor::ones({1, 1, 5, 5}), bank, RotParamHead::zero(1),
                        ConvGeometry::same(4, 2), RotationMode::PerSample),
      shape_error);  // bank validation rejects even K before the spectral path runs
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unistd.h>

#include "crossd/checks.hpp"
#include "crossd/pipeline.hpp"
#include "crossd/rng.hpp"
#include "crossd/spectral.hpp"
#include "crossd/transfer.hpp"

using namespace crossd;

namespace {

std::filesystem::path temp_file(const char* tag) {
  return std::filesystem::temp_directory_path() /
         (std::string("crossd_test_") + tag + "_" + std::to_string(::getpid()) + ".xdcw");
}

}  // namespace

TEST_CASE("archive round trip is bitwise lossless for ranks 1 through 5") {
  Rng rng(307);
  std::vector<NamedTensor> tensors;
  tensors.push_back({"r1", uniform_tensor({7}, rng)});
  tensors.push_back({"r2", uniform_tensor({3, 4}, rng)});
  tensors.push_back({"r3", uniform_tensor({2, 3, 2}, rng)});
  tensors.push_back({"r4", uniform_tensor({2, 2, 3, 3}, rng)});
  tensors.push_back({"r5", uniform_tensor({2, 1, 3, 3, 3}, rng)});

  const auto path = temp_file("roundtrip");
  save_archive(path, tensors);
  const auto loaded = load_archive(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.size() == tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    CHECK(loaded[i].name == tensors[i].name);
    CHECK(loaded[i].tensor.shape() == tensors[i].tensor.shape());
    CHECK(loaded[i].tensor.values() == tensors[i].tensor.values());
  }
}

TEST_CASE("archive encoding is byte-exact") {
  const std::vector<NamedTensor> tensors{{"t", RealTensor::from_values({2}, {5.0, 7.0})}};
  const auto bytes = encode_archive(tensors);

  const std::vector<std::uint8_t> want{
      'X', 'D', 'C', 'W',       // magic
      1, 0, 0, 0,               // version
      1, 0, 0, 0,               // record count
      1, 0,                     // name length
      't',                      // name
      1,                        // rank
      2, 0, 0, 0,               // extent
      0, 0, 0, 0, 0, 0, 0x14, 0x40,  // 5.0
      0, 0, 0, 0, 0, 0, 0x1c, 0x40,  // 7.0
  };
  CHECK(bytes == want);
}

TEST_CASE("re-encoding identical tensors yields identical bytes") {
  Rng rng(311);
  std::vector<NamedTensor> tensors{{"a", uniform_tensor({4, 4}, rng)}};
  CHECK(encode_archive(tensors) == encode_archive(tensors));
}

TEST_CASE("empty archive is header plus count only") {
  CHECK(encode_archive({}).size() == 12);
  CHECK(decode_archive(encode_archive({})).empty());
}

TEST_CASE("duplicate names are rejected on save") {
  const std::vector<NamedTensor> dup{{"w", RealTensor::ones({2})}, {"w", RealTensor::ones({2})}};
  CHECK_THROWS_AS(encode_archive(dup), format_error);
}

TEST_CASE("malformed archives are rejected with the right error") {
  Rng rng(313);
  auto bytes = encode_archive({{"x", uniform_tensor({3, 3}, rng)}});

  auto bad_magic = bytes;
  bad_magic[0] = 'Y';
  CHECK_THROWS_AS(decode_archive(bad_magic), format_error);

  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_archive(bad_version), version_error);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_archive(truncated), corruption_error);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_archive(trailing), corruption_error);

  CHECK_THROWS_AS(load_archive("/nonexistent/path/archive.xdcw"), io_error);
  CHECK_THROWS_AS(save_archive("/nonexistent/dir/archive.xdcw", {}), io_error);
}

TEST_CASE("derived 2D kernels are the mid-slice of the derived 3D bank") {
  Rng rng(317);
  const KernelBank5D bank{uniform_tensor({3, 2, 5, 5, 5}, rng), 1, std::nullopt};
  const RotationParams p = normalize_rotation({Vec4{0.3, 0.9, -0.4, 0.5}});
  const RealTensor k2d = derive_2d_kernels(bank, p);
  const KernelBank5D k3d = derive_3d_kernels(bank, p);
  CHECK(k2d.values() == extract_mid_slice(k3d.weights).values());
  CHECK(k3d.groups == bank.groups);
}

TEST_CASE("theta=0 derivation rolls the bank") {
  Rng rng(331);
  const KernelBank5D bank{uniform_tensor({2, 1, 3, 3, 3}, rng), 1, std::nullopt};
  const KernelBank5D rolled = derive_3d_kernels(bank, RotationParams{});
  for (std::size_t kidx = 0; kidx < 2; ++kidx) {
    const RealTensor one = RealTensor::from_values(
        {3, 3, 3}, std::vector<double>(bank.weights.data() + kidx * 27,
                                       bank.weights.data() + (kidx + 1) * 27));
    const RealTensor want = roll(one, {1, 1, 1});
    for (std::size_t i = 0; i < 27; ++i) {
      CHECK(std::abs(rolled.weights.data()[kidx * 27 + i] - want.data()[i]) <= 1e-10);
    }
  }
}

TEST_CASE("K=1 derivation is the bank itself for any rotation") {
  const KernelBank5D bank{RealTensor::from_values({2, 1, 1, 1, 1}, {1.5, -0.5}), 1, std::nullopt};
  const RotationParams p = normalize_rotation({Vec4{0.7, 0.2, 0.1, 1.0}});
  const RealTensor k2d = derive_2d_kernels(bank, p);
  CHECK(std::abs(k2d.values()[0] - 1.5) <= 1e-12);
  CHECK(std::abs(k2d.values()[1] + 0.5) <= 1e-12);
}

TEST_CASE("derivation preserves bank energy") {
  Rng rng(337);
  const KernelBank5D bank{uniform_tensor({2, 2, 5, 5, 5}, rng), 1, std::nullopt};
  const RotationParams p = normalize_rotation({Vec4{-0.2, 0.4, 0.9, -0.7}});
  const KernelBank5D out = derive_3d_kernels(bank, p);
  CHECK(std::abs(l2_norm(out.weights) / l2_norm(bank.weights) - 1.0) <= 1e-6);
}

TEST_CASE("exported 2D kernels convolve identically after a disk round trip") {
  Rng rng(347);
  const KernelBank5D bank{uniform_tensor({2, 2, 3, 3, 3}, rng), 1, std::nullopt};
  const RotationParams p = normalize_rotation({Vec4{0.1, -0.6, 0.8, 0.9}});
  const RealTensor kernels = derive_2d_kernels(bank, p);

  const auto path = temp_file("kernels");
  save_archive(path, {{"kernel2d", kernels}});
  const auto loaded = load_archive(path);
  std::filesystem::remove(path);

  const RealTensor x = uniform_tensor({1, 2, 6, 6}, rng);
  const ConvGeometry g = ConvGeometry::same(3, 2);
  const RealTensor a = conv2d(x, kernels, g);
  const RealTensor b = conv2d(x, loaded[0].tensor, g);
  CHECK(a.values() == b.values());
}

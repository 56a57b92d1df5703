#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crossd/conv.hpp"
#include "crossd/rotation.hpp"
#include "crossd/tensor.hpp"

namespace crossd {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct corruption_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct version_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  RealTensor tensor;
};

// On-disk archive layout (all integers little-endian):
//   "XDCW" | u32 version=1 | u32 record count
//   per record: u16 name length, UTF-8 name, u8 rank, u32 extents[rank],
//               f64 payload (row-major)
inline constexpr char kArchiveMagic[4] = {'X', 'D', 'C', 'W'};
inline constexpr std::uint32_t kArchiveVersion = 1;

std::vector<std::uint8_t> encode_archive(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_archive(const std::vector<std::uint8_t>& bytes);

void save_archive(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_archive(const std::filesystem::path& path);

// Frozen-rotation exports: one shared rotation feeds both transfer paths.
RealTensor derive_2d_kernels(const KernelBank5D& bank, const RotationParams& p);
KernelBank5D derive_3d_kernels(const KernelBank5D& bank, const RotationParams& p);

}  // namespace crossd

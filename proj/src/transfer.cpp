#include "crossd/transfer.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include "crossd/spectral.hpp"

namespace crossd {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) {
      throw corruption_error("archive truncated");
    }
  }
  std::uint8_t u8() {
    need(1);
    return bytes[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes[pos]) |
                      static_cast<std::uint16_t>(bytes[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

std::vector<std::uint8_t> encode_archive(const std::vector<NamedTensor>& tensors) {
  std::set<std::string> seen;
  for (const auto& nt : tensors) {
    if (!seen.insert(nt.name).second) {
      throw format_error("duplicate tensor name: " + nt.name);
    }
    if (nt.name.size() > 0xffff) {
      throw format_error("tensor name too long: " + nt.name);
    }
    if (nt.tensor.rank() == 0 || nt.tensor.rank() > 0xff) {
      throw format_error("tensor rank out of range for: " + nt.name);
    }
  }

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kArchiveMagic, kArchiveMagic + 4);
  put_u32(out, kArchiveVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    put_u16(out, static_cast<std::uint16_t>(nt.name.size()));
    out.insert(out.end(), nt.name.begin(), nt.name.end());
    out.push_back(static_cast<std::uint8_t>(nt.tensor.rank()));
    for (std::size_t e : nt.tensor.shape()) {
      put_u32(out, static_cast<std::uint32_t>(e));
    }
    for (double v : nt.tensor.values()) put_f64(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_archive(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), kArchiveMagic, 4) != 0) {
    throw format_error("bad archive magic");
  }
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kArchiveVersion) {
    throw version_error("unsupported archive version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();

  std::vector<NamedTensor> out;
  out.reserve(count);
  std::set<std::string> seen;
  for (std::uint32_t rec = 0; rec < count; ++rec) {
    const std::uint16_t name_len = r.u16();
    std::string name = r.str(name_len);
    if (!seen.insert(name).second) {
      throw corruption_error("duplicate tensor name in archive: " + name);
    }
    const std::uint8_t rank = r.u8();
    if (rank == 0) throw corruption_error("record with rank 0");
    Shape shape(rank);
    std::size_t total = 1;
    for (std::uint8_t a = 0; a < rank; ++a) {
      const std::uint32_t e = r.u32();
      if (e == 0) throw corruption_error("record with zero extent");
      shape[a] = e;
      total *= e;
    }
    std::vector<double> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = r.f64();
    out.push_back({std::move(name), RealTensor::from_values(std::move(shape), std::move(values))});
  }
  if (r.pos != bytes.size()) {
    throw corruption_error("trailing bytes after last record");
  }
  return out;
}

void save_archive(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  const std::vector<std::uint8_t> bytes = encode_archive(tensors);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw io_error("cannot open for writing: " + path.string());
  }
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw io_error("write failed: " + path.string());
  }
}

std::vector<NamedTensor> load_archive(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) {
    throw io_error("cannot open for reading: " + path.string());
  }
  const std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) {
    throw io_error("read failed: " + path.string());
  }
  return decode_archive(bytes);
}

RealTensor derive_2d_kernels(const KernelBank5D& bank, const RotationParams& p) {
  return extract_mid_slice(derive_3d_kernels(bank, p).weights);
}

KernelBank5D derive_3d_kernels(const KernelBank5D& bank, const RotationParams& p) {
  return KernelBank5D{rotate_bank(bank, p).weights, bank.groups, bank.bias};
}

}  // namespace crossd

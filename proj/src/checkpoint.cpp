#include "vecrl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vecrl {

namespace {

constexpr char kMagic[4] = {'S', 'K', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

// The build targets little-endian hosts; serialization writes raw bytes.
static_assert(std::endian::native == std::endian::little,
              "checkpoint format requires a little-endian host");

template <typename T>
void write_raw(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, 4);
  write_raw<std::uint32_t>(out, kVersion);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) write_raw<std::uint64_t>(out, d);
    auto data = t.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: " + path + " is not a tensor checkpoint (bad magic)");
  }
  auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  auto count = read_raw<std::uint32_t>(in);
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name_len = read_raw<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto rank = read_raw<std::uint32_t>(in);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(read_raw<std::uint64_t>(in));
    std::vector<double> data(shape_numel(shape));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor payload in " + path);
    out.emplace_back(std::move(name), Tensor::from_data(std::move(shape), std::move(data)));
  }
  return out;
}

}  // namespace vecrl

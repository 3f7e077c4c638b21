#include "insideout/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

static_assert(std::endian::native == std::endian::little, "tensor blobs assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'I', 'O', 'T', 'E', 'N', 'S', 'R', '1'};

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(fmt::format("truncated tensor file '{}'", path.string()));
  }
  return value;
}

}  // namespace

void write_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write tensor file '{}'", path.string()));
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, tensors.size());
  for (const NamedTensor& t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.cols()));
    out.write(reinterpret_cast<const char*>(t.value.data()),
              static_cast<std::streamsize>(t.value.size() * sizeof(double)));
  }
  if (!out) throw Error(fmt::format("failed writing tensor file '{}'", path.string()));
}

std::vector<NamedTensor> read_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open tensor file '{}'", path.string()));
  char magic[sizeof(kMagic)] = {};
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(fmt::format("'{}' is not a tensor file", path.string()));
  }
  const auto count = get<std::uint64_t>(in, path);
  std::vector<NamedTensor> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = get<std::uint32_t>(in, path);
    if (name_len > 4096) throw ParseError(fmt::format("corrupt tensor name in '{}'", path.string()));
    t.name.resize(name_len);
    if (!in.read(t.name.data(), name_len)) throw ParseError(fmt::format("truncated tensor file '{}'", path.string()));
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows > (1u << 24) || cols > (1u << 24) || rows * cols > (1ull << 28)) {
      throw ParseError(fmt::format("tensor '{}' in '{}' has implausible shape", t.name, path.string()));
    }
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(t.value.data()),
                 static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
      throw ParseError(fmt::format("truncated tensor file '{}'", path.string()));
    }
    tensors.push_back(std::move(t));
  }
  return tensors;
}

}  // namespace insideout

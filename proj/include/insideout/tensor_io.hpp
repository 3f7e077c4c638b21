#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "insideout/linalg.hpp"

namespace insideout {

struct NamedTensor {
  std::string name;
  Matrix value;
};

/// Binary blob: "IOTENSR1", u64 count, then per tensor u32 name length,
/// name bytes, u64 rows, u64 cols, rows*cols little-endian f64 (column-major).
void write_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_tensors(const std::filesystem::path& path);

}  // namespace insideout

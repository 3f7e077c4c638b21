#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace insideout {

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 for content that is produced piecewise.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  void update(const void* data, std::size_t size);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace insideout

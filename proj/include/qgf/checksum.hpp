#pragma once

#include <string>
#include <string_view>

namespace qgf {

/// Incremental SHA-256; digest() returns lower-case hex.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  std::string digest();

 private:
  void* ctx_;
  bool finished_ = false;
  std::string hex_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace qgf

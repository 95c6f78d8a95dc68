#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace p2pagg {

using Digest = std::array<uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const uint8_t> data);
  Sha256& update(std::string_view tag);
  Sha256& update_u64le(uint64_t x);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::span<const uint8_t> data);

}  // namespace p2pagg

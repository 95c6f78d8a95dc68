#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "p2pagg/field.hpp"
#include "p2pagg/hash.hpp"

namespace p2pagg {

// Deterministic PRG: SHA-256 in counter mode over a 32-byte key.
// block_i = H(key || LE64(i)). Single-owner; not shared across threads.
class SeededRng {
 public:
  SeededRng() = default;  // all-zero key; reseat with fork/assignment
  explicit SeededRng(const Digest& key) : key_(key) {}
  static SeededRng from_seed64(uint64_t seed);

  // Child generator with an independent stream: key' = H(key || tag || LE64(idx)).
  SeededRng fork(std::string_view tag, uint64_t idx) const;

  uint64_t next_u64();
  // Unbiased uniform draw in [0, bound); bound >= 1.
  uint64_t below(uint64_t bound);
  void fill_bytes(uint8_t* out, size_t n);
  Digest next_digest();

  // Uniform over [0, p): mask to 61 bits, reject the single value >= p.
  FieldElement field_uniform();

  double uniform01();  // (0, 1]
  double normal();     // standard normal, Box-Muller

 private:
  void refill();

  Digest key_{};
  uint64_t counter_ = 0;
  std::array<uint8_t, 32> block_{};
  unsigned pos_ = 32;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace p2pagg

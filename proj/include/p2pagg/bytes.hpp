#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

namespace p2pagg {

inline void store_le16(uint16_t x, uint8_t* out) {
  out[0] = uint8_t(x);
  out[1] = uint8_t(x >> 8);
}

inline void store_le64(uint64_t x, uint8_t* out) {
  for (int i = 0; i < 8; ++i) out[i] = uint8_t(x >> (8 * i));
}

inline uint16_t load_le16(const uint8_t* p) {
  return uint16_t(p[0] | (uint16_t(p[1]) << 8));
}

inline uint64_t load_le64(const uint8_t* p) {
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= uint64_t(p[i]) << (8 * i);
  return x;
}

inline void append_le16(std::vector<uint8_t>& v, uint16_t x) {
  uint8_t b[2];
  store_le16(x, b);
  v.insert(v.end(), b, b + 2);
}

inline void append_le64(std::vector<uint8_t>& v, uint64_t x) {
  uint8_t b[8];
  store_le64(x, b);
  v.insert(v.end(), b, b + 8);
}

inline void append_bytes(std::vector<uint8_t>& v, std::span<const uint8_t> b) {
  v.insert(v.end(), b.begin(), b.end());
}

inline std::span<const uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

}  // namespace p2pagg

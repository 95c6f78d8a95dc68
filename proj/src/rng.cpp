#include "p2pagg/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "p2pagg/bytes.hpp"

namespace p2pagg {

SeededRng SeededRng::from_seed64(uint64_t seed) {
  Sha256 h;
  h.update("rng0").update_u64le(seed);
  return SeededRng(h.finish());
}

SeededRng SeededRng::fork(std::string_view tag, uint64_t idx) const {
  Sha256 h;
  h.update(std::span<const uint8_t>(key_.data(), key_.size()))
      .update(tag)
      .update_u64le(idx);
  return SeededRng(h.finish());
}

void SeededRng::refill() {
  Sha256 h;
  h.update(std::span<const uint8_t>(key_.data(), key_.size()))
      .update_u64le(counter_);
  block_ = h.finish();
  ++counter_;
  pos_ = 0;
}

uint64_t SeededRng::next_u64() {
  if (pos_ + 8 > block_.size()) refill();
  uint64_t x = load_le64(block_.data() + pos_);
  pos_ += 8;
  return x;
}

uint64_t SeededRng::below(uint64_t bound) {
  // Rejection below the largest multiple of bound.
  uint64_t threshold = (-bound) % bound;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

void SeededRng::fill_bytes(uint8_t* out, size_t n) {
  size_t got = 0;
  while (got < n) {
    if (pos_ >= block_.size()) refill();
    size_t take = std::min(n - got, size_t(block_.size() - pos_));
    std::memcpy(out + got, block_.data() + pos_, take);
    pos_ += unsigned(take);
    got += take;
  }
}

Digest SeededRng::next_digest() {
  Digest d;
  fill_bytes(d.data(), d.size());
  return d;
}

FieldElement SeededRng::field_uniform() {
  for (;;) {
    uint64_t x = next_u64() & kFieldPrime;  // low 61 bits
    if (x < kFieldPrime) return FieldElement{x};
  }
}

double SeededRng::uniform01() {
  // 53 uniform bits, shifted into (0, 1].
  return double((next_u64() >> 11) + 1) * 0x1p-53;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace p2pagg

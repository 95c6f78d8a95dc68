#pragma once

#include <cstdint>

#include "p2pagg/errors.hpp"

namespace p2pagg {

// Prime modulus 2^61 - 1 (Mersenne). Single-word reduction; large enough that
// per-bit sums (<= n per position) and 2^28-scale fixed-point products over
// n <= 10^4 clients never wrap.
inline constexpr uint64_t kFieldPrime = (uint64_t(1) << 61) - 1;

struct FieldElement {
  uint64_t v = 0;  // invariant: v < kFieldPrime

  friend bool operator==(FieldElement a, FieldElement b) { return a.v == b.v; }
  friend bool operator!=(FieldElement a, FieldElement b) { return a.v != b.v; }
};

inline constexpr FieldElement fe(uint64_t x) {
  return FieldElement{x % kFieldPrime};
}

// Signed embedding: negative integers map to p - |x|.
inline constexpr FieldElement fe_signed(int64_t x) {
  if (x >= 0) return fe(uint64_t(x));
  return FieldElement{kFieldPrime - (uint64_t(-x) % kFieldPrime)};
}

// Inverse of fe_signed for values known to be small: elements above p/2 are
// read as negative.
inline constexpr int64_t to_signed(FieldElement a) {
  if (a.v > kFieldPrime / 2) return -int64_t(kFieldPrime - a.v);
  return int64_t(a.v);
}

inline constexpr FieldElement add(FieldElement a, FieldElement b) {
  uint64_t s = a.v + b.v;  // < 2^62, no overflow
  if (s >= kFieldPrime) s -= kFieldPrime;
  return FieldElement{s};
}

inline constexpr FieldElement sub(FieldElement a, FieldElement b) {
  return FieldElement{a.v >= b.v ? a.v - b.v : a.v + kFieldPrime - b.v};
}

inline constexpr FieldElement neg(FieldElement a) {
  return a.v == 0 ? a : FieldElement{kFieldPrime - a.v};
}

inline constexpr FieldElement mul(FieldElement a, FieldElement b) {
  __uint128_t z = (__uint128_t)a.v * b.v;  // < 2^122
  uint64_t lo = uint64_t(z) & kFieldPrime;
  uint64_t hi = uint64_t(z >> 61);  // z = hi*2^61 + lo == hi + lo (mod p)
  uint64_t s = lo + hi;             // < 2^62
  s = (s & kFieldPrime) + (s >> 61);
  if (s >= kFieldPrime) s -= kFieldPrime;
  return FieldElement{s};
}

inline constexpr FieldElement pow_fe(FieldElement a, uint64_t e) {
  FieldElement acc{1};
  FieldElement base = a;
  while (e) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  return acc;
}

// a^(p-2); zero has no inverse.
inline FieldElement inv(FieldElement a) {
  if (a.v == 0) throw Error("no inverse of zero");
  return pow_fe(a, kFieldPrime - 2);
}

inline constexpr FieldElement operator+(FieldElement a, FieldElement b) {
  return add(a, b);
}
inline constexpr FieldElement operator-(FieldElement a, FieldElement b) {
  return sub(a, b);
}
inline constexpr FieldElement operator*(FieldElement a, FieldElement b) {
  return mul(a, b);
}

}  // namespace p2pagg

#pragma once

#include <cstdint>
#include <vector>

namespace p2pagg {

// Quantization boundary between 64-bit model math and exact field arithmetic.
// Two modes: the unsigned box map (clip to [-tau, tau], affine-scale to
// [0, 2^theta - 1]) and sign-magnitude fixed point (|x| * 2^frac with a
// separate sign). All rounding is round-half-even (the process must never
// change the FP rounding mode).

struct FixedPointCodec {
  int theta = 32;     // total bits per coordinate
  int frac = 0;       // fractional bits (sign-magnitude mode)
  double tau = 1.0;   // box half-width (unsigned box mode)
};

// Box mode. Out-of-range deltas saturate to the nearest corner and set
// *saturated.
uint64_t encode_box(const FixedPointCodec& c, double delta,
                    bool* saturated = nullptr);
// Accepts fractional levels (e.g. mean levels across clients).
double decode_box(const FixedPointCodec& c, double level);

// Sign-magnitude mode; sign(0) = +1 so the sign channel stays in {-1, +1}.
struct SignMag {
  uint32_t mag = 0;
  int sign = 1;
};
SignMag encode_signmag(const FixedPointCodec& c, double x,
                       bool* saturated = nullptr);
double decode_signmag(const FixedPointCodec& c, double signed_value);

// Little-endian bit split of one quantization level.
void split_bits(uint64_t q, int theta, uint64_t* out_bits);
uint64_t join_bits(const uint64_t* bits, int theta);

// Slack slots appended to a magnitude vector so its squared sum can hit an
// exact target: greedy square decomposition drops any residue r to at most
// 2*sqrt(r) per slot, so 12 slots provably reach 0 from any r < 2^60.
inline constexpr size_t kUnitSlackValues = 12;

// Makes sum mags_h^2 + sum slack_j^2 == target exactly. Magnitudes above
// budget are first pulled down by -1 steps on the currently largest
// coordinate (ties: lowest index); below budget, +1 steps raise whichever
// coordinate can absorb the largest step without overshooting. The stuck
// state (no step fits the residue) is a fixed point: re-encoding the
// repaired point runs the same repair to the same result, which is what
// makes preimage round-trips exact. The final residue goes into the
// returned kUnitSlackValues slack magnitudes. protect_idx (if < size) is
// never touched -- the x magnitude doubles as the trust score and must
// survive repair. Requires mags[protect_idx]^2 <= target.
std::vector<uint32_t> lattice_repair(std::vector<uint32_t>& mags,
                                     uint64_t target, size_t protect_idx,
                                     uint32_t mag_cap);

}  // namespace p2pagg

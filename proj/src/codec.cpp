#include "p2pagg/codec.hpp"

#include <cmath>

#include "p2pagg/errors.hpp"

namespace p2pagg {

uint64_t encode_box(const FixedPointCodec& c, double delta, bool* saturated) {
  check(c.theta >= 1 && c.theta <= 32, "box codec width out of range");
  check(c.tau > 0, "box radius must be positive");
  double clipped = delta;
  if (clipped < -c.tau) clipped = -c.tau;
  if (clipped > c.tau) clipped = c.tau;
  if (saturated && clipped != delta) *saturated = true;
  const double levels = std::ldexp(1.0, c.theta) - 1.0;  // 2^theta - 1
  double q = std::nearbyint((clipped + c.tau) / (2.0 * c.tau) * levels);
  if (q < 0) q = 0;
  if (q > levels) q = levels;
  return static_cast<uint64_t>(q);
}

double decode_box(const FixedPointCodec& c, double level) {
  const double levels = std::ldexp(1.0, c.theta) - 1.0;
  return level / levels * 2.0 * c.tau - c.tau;
}

SignMag encode_signmag(const FixedPointCodec& c, double x, bool* saturated) {
  check(c.theta >= 2 && c.theta <= 32, "sign-magnitude width out of range");
  check(c.frac >= 0 && c.frac < c.theta, "fractional bits out of range");
  SignMag sm;
  sm.sign = x < 0 ? -1 : 1;  // sign(0) = +1
  double mag = std::nearbyint(std::abs(x) * std::ldexp(1.0, c.frac));
  const double cap = std::ldexp(1.0, c.theta) - 1.0;
  if (mag > cap) {
    mag = cap;
    if (saturated) *saturated = true;
  }
  sm.mag = static_cast<uint32_t>(mag);
  return sm;
}

double decode_signmag(const FixedPointCodec& c, double signed_value) {
  return signed_value * std::ldexp(1.0, -c.frac);
}

void split_bits(uint64_t q, int theta, uint64_t* out_bits) {
  for (int j = 0; j < theta; ++j) out_bits[j] = (q >> j) & 1u;
}

uint64_t join_bits(const uint64_t* bits, int theta) {
  uint64_t q = 0;
  for (int j = 0; j < theta; ++j) q |= (bits[j] & 1u) << j;
  return q;
}

namespace {

uint64_t isqrt_u64(uint64_t n) {
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

std::vector<uint32_t> lattice_repair(std::vector<uint32_t>& mags,
                                     uint64_t target, size_t protect_idx,
                                     uint32_t mag_cap) {
  uint64_t s = 0;
  for (uint32_t m : mags) s += static_cast<uint64_t>(m) * m;

  // Rounding can overshoot the square budget; pull -1 steps off whichever
  // coordinate is currently largest so the loss spreads instead of piling on
  // one coordinate (ties: lowest index).
  while (s > target) {
    size_t h_max = mags.size();
    for (size_t h = 0; h < mags.size(); ++h) {
      if (h == protect_idx || mags[h] == 0) continue;
      if (h_max == mags.size() || mags[h] > mags[h_max]) h_max = h;
    }
    if (h_max == mags.size())
      throw Error("unit-length repair has no free coordinate");
    s -= uint64_t{2} * mags[h_max] - 1;
    --mags[h_max];
  }

  // Raise toward the target while some free coordinate can take a +1 step
  // without overshooting (largest such coordinate first: fewest steps).
  // This caps the slack mass at less than 2*min(free mags)+1, which keeps
  // the point close enough to the sphere that re-encoding its normalized
  // preimage reproduces the exact same magnitudes: the stuck state is a
  // fixed point of the repair, which is what makes round-trips exact.
  for (;;) {
    const uint64_t residue = target - s;
    size_t best = mags.size();
    for (size_t h = 0; h < mags.size(); ++h) {
      if (h == protect_idx || mags[h] >= mag_cap) continue;
      if (uint64_t{2} * mags[h] + 1 > residue) continue;
      if (best == mags.size() || mags[h] > mags[best]) best = h;
    }
    if (best == mags.size()) break;
    s += uint64_t{2} * mags[best] + 1;
    ++mags[best];
  }

  // Greedy square decomposition of the residue: each slot takes the largest
  // square that fits, leaving at most 2*sqrt(residue), so the chain from any
  // residue < 2^60 is exhausted well within kUnitSlackValues slots.
  std::vector<uint32_t> slack(kUnitSlackValues, 0);
  uint64_t diff = target - s;
  for (size_t j = 0; j < kUnitSlackValues; ++j) {
    const uint64_t q = isqrt_u64(diff);
    if (q > mag_cap) throw Error("unit-length slack exceeds magnitude cap");
    slack[j] = static_cast<uint32_t>(q);
    diff -= q * q;
  }
  if (diff != 0) throw Error("unit-length repair did not converge");
  return slack;
}

}  // namespace p2pagg

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2pagg/field.hpp"
#include "p2pagg/rng.hpp"

namespace p2pagg {

struct SharingParams {
  int n = 0;  // party count
  int t = 0;  // polynomial degree / privacy threshold, 1 <= t < n
};

// One party's evaluation of a secret polynomial. party_id in [1, n] is the
// evaluation point; degree is tracked explicitly so multiplication budgets
// are assertable.
struct Share {
  uint16_t party_id = 0;
  uint16_t degree = 0;
  FieldElement value;
};

inline constexpr size_t kShareWireBytes = 12;  // 2 + 2 + 8, little-endian

void serialize_share(const Share& s, std::vector<uint8_t>& out);
Share parse_share(std::span<const uint8_t> in, size_t offset);

// Evaluate c0 + c1 x + ... + ck x^k.
FieldElement eval_poly(std::span<const FieldElement> coeffs, FieldElement x);

// Shares of coeffs[0] at points 1..n from an explicit polynomial.
std::vector<Share> shares_from_coeffs(std::span<const FieldElement> coeffs,
                                      int n, int degree_tag);

// Shares of a uniformly random degree-t polynomial with f(0) = secret.
std::vector<Share> share_secret(FieldElement secret, const SharingParams& p,
                                SeededRng& rng);

// Lagrange-interpolates from the first degree+1 shares and returns f(0);
// every extra share is checked against the interpolated polynomial.
// Throws InsufficientShares / InconsistentSharing.
FieldElement reconstruct_checked(std::span<const Share> shares, int degree);

// Berlekamp-Welch: f(0) of the unique degree-`degree` polynomial agreeing
// with all but <= max_errors of the shares. Requires
// |shares| >= degree + 2*max_errors + 1. Throws Undecodable.
FieldElement reconstruct_corrected(std::span<const Share> shares, int degree,
                                   int max_errors);

Share add_shares(Share a, Share b);
Share sub_shares(Share a, Share b);
Share scale_share(FieldElement c, Share a);
Share add_public(Share a, FieldElement c);

// Pointwise product; degree adds. Requires degree(a)+degree(b) <= n-1.
Share mul_local(Share a, Share b, const SharingParams& p);

// Retag a share at a higher degree (a degree-d polynomial is also degree-d').
Share lift_degree(Share a, int degree);

// Lagrange coefficients for f(0) over the given distinct nonzero points.
std::vector<FieldElement> lagrange_at_zero(std::span<const uint16_t> xs);

}  // namespace p2pagg

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2pagg/field.hpp"
#include "p2pagg/hash.hpp"
#include "p2pagg/rng.hpp"

namespace p2pagg {

// Commit-reveal coin flipping and everything derived from the joint seed:
// committee election, per-round client subsampling, and the public batch-check
// challenges (which the round schedule only reveals after shares are out).

struct Commitment {
  Digest digest{};
};

struct Opening {
  std::vector<uint8_t> value;        // the committed contribution
  std::array<uint8_t, 32> nonce{};
};

struct JointSeed {
  Digest seed{};
};

inline constexpr size_t kContributionBytes = 32;

std::pair<Commitment, Opening> commit(std::span<const uint8_t> value,
                                      SeededRng& rng);
bool verify(const Commitment& c, const Opening& o);

// H("seed" || contribution_1 || ... || contribution_k), openings in peer-id
// order. Openings must already be verified against their commitments.
JointSeed derive_joint_seed(std::span<const Opening> openings);

// Uniform m-subset (ordered) of peer_ids via Fisher-Yates on a PRG keyed
// H("comm" || seed).
std::vector<uint16_t> elect_committee(const JointSeed& seed,
                                      std::span<const uint16_t> peer_ids,
                                      size_t m);

// Per-round uniform k-subset, PRG keyed H("comm" || seed || LE64(round)).
std::vector<uint16_t> subsample_clients(const JointSeed& seed, uint64_t round,
                                        std::span<const uint16_t> peer_ids,
                                        size_t k);

// Public field challenges, PRG keyed H("chal" || seed || LE64(round)).
std::vector<FieldElement> derive_challenges(const JointSeed& seed,
                                            uint64_t round, size_t count);

// The PRG behind derive_challenges; its first draws equal that function's
// output and the committee keeps drawing from it for fallback re-checks.
SeededRng challenge_stream(const JointSeed& seed, uint64_t round);

// Uniform ordered m-subset of `ids` by partial Fisher-Yates.
std::vector<uint16_t> sample_prefix(SeededRng& rng,
                                    std::span<const uint16_t> ids, size_t m);

}  // namespace p2pagg

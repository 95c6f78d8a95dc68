#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2pagg/field.hpp"
#include "p2pagg/kernels.hpp"
#include "p2pagg/rng.hpp"

namespace p2pagg {

// Batched membership checks the committee runs on shared client submissions.
// Each member locally folds its column of the share table into one degree-2t
// share of a challenge-weighted sum that is zero iff every checked term is
// zero; the committee reconstructs that single value.

struct BatchVerdict {
  bool accepted = true;
  FieldElement revealed_check_value;     // reveal of the full-batch check
  std::vector<uint16_t> flagged_clients; // client indices, fallback only
  int reconstructions = 0;               // one per (re)checked subset
};

enum class CheckKind {
  Binary,      // x(1-x) = 0
  Sign,        // (b+1)(b-1) = 0
  UnitLength,  // sum_h mag_h^2 - C = 0, one term per client
};

// A value-major region of the committee share table. Row v, column c sits at
// cells[v * stride + c]; column c belongs to member_ids[c]. Client i owns
// rows [i*per_client, (i+1)*per_client). All entries are degree-t shares.
struct CheckView {
  const FieldElement* cells = nullptr;
  size_t stride = 0;
  std::span<const uint16_t> member_ids;
  size_t clients = 0;
  size_t per_client = 0;
  int degree_t = 0;
  FieldElement unit_c;  // UnitLength only
};

// How many challenges one batch over `clients` needs.
size_t challenge_count(CheckKind kind, size_t clients, size_t per_client);

BatchVerdict batch_binary_check(const CheckView& view,
                                std::span<const FieldElement> challenges,
                                Mode mode);
BatchVerdict batch_sign_check(const CheckView& view,
                              std::span<const FieldElement> challenges,
                              Mode mode);
BatchVerdict batch_unit_length_check(const CheckView& view,
                                     std::span<const FieldElement> challenges,
                                     Mode mode);

// Full-batch check; on rejection, binary-searches client subsets with fresh
// challenges from `challenge_source` and flags the offenders. Every subset
// re-check costs one more reconstruction (counted in the verdict).
BatchVerdict check_and_identify(CheckKind kind, const CheckView& view,
                                SeededRng& challenge_source, Mode mode);

}  // namespace p2pagg

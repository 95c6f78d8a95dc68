#pragma once

#include <span>
#include <string>
#include <vector>

#include "p2pagg/data.hpp"

namespace p2pagg {

// Byzantine client behaviors. All of them act on the pre-encoding update u;
// the submission still goes through the honest F^P, so it lands inside the
// valid set and the committee checks accept it by construction. The coalition
// is omniscient: it sees every honest update of the round.

enum class AttackKind { None, BitFlip, LabelFlip, InnerProduct, LittleEnough };

AttackKind parse_attack_kind(const std::string& name);

struct AttackConfig {
  AttackKind kind = AttackKind::None;
  int f = 0;           // coalition size (the last f peer ids)
  double epsilon = 0.5;  // inner-product scale
  double z = 0;          // deviation multiple; <= 0 picks the percentile rule
};

// z such that Phi(z) = (n - f - s) / (n - f) with s = floor(n/2) + 1 - f:
// the largest deviation still inside the majority envelope.
double little_enough_default_z(size_t n, size_t f);

std::vector<double> attack_bit_flip(std::span<const double> own_update);
// -epsilon * mean(honest updates); zero vector when none are visible.
std::vector<double> attack_inner_product(
    const std::vector<std::vector<double>>& honest, size_t d, double epsilon);
// Per coordinate mean + z * std over honest updates.
std::vector<double> attack_little_enough(
    const std::vector<std::vector<double>>& honest, size_t d, double z);

// Label flip y -> (classes - 1) - y; features shared with the original.
Dataset flip_labels(const Dataset& d);

}  // namespace p2pagg

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "p2pagg/kernels.hpp"

namespace p2pagg {

struct BenchCell {
  std::string protocol;
  size_t d = 0;            // model length
  size_t n = 0;            // contributing clients
  int committee = 0;       // committee size
  int reveal_degree = 0;   // degree of the revealed sharing
  int trials = 0;
  double mean_seconds = 0;  // one member's aggregation work, mean over trials
  uint64_t checksum = 0;    // fold of the outputs; equal across trials
};

// Times one committee member's local aggregation step: combining the
// per-client share columns (plain sums for the bit protocols, recomposition
// plus trust-weighted products for flt) and reconstructing the combined
// values from all committee columns. Validation checks are not part of the
// aggregation step and are excluded. A single share of any payload under a
// degree >= 1 sharing is uniform, so client columns are drawn uniformly; the
// reconstruction input is a genuine sharing because every redundant column
// is verified. Committee size is fixed at 46 for rsa/cc and 121 for flt.
std::vector<BenchCell> run_bench(const std::string& protocol,
                                 std::span<const size_t> dims,
                                 std::span<const size_t> peers, int trials,
                                 uint64_t seed, Mode mode);

std::string bench_csv(std::span<const BenchCell> cells);

// R^2 of the least-squares line through (xs, ys). 1 when ys are constant,
// 0 when xs are constant but ys vary.
double linear_fit_r2(std::span<const double> xs, std::span<const double> ys);

}  // namespace p2pagg

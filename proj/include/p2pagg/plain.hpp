#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace p2pagg {

// Single-server plaintext reference pipelines: the same aggregation rules
// with no sharing, no checks, and no committee, written directly from the
// update formulas. The secure path must match these bit-for-bit in the
// integer sums and (up to one codec step where quantization is involved) in
// the postprocessed weights.

struct PlainSignParams {
  double lambda = 0.5;
  double eta0 = 0.01;
  double gamma = 0.001;
  double rho = 0;
};

struct PlainBoxParams {
  double tau = 1.0;
  double eta = 1.0;
  int theta = 32;
};

struct PlainTrustParams {
  double alpha = 1.0;
  int theta = 16;  // frac = theta - 2
};

// Per-coordinate bit sums S_j = |{i : w_j >= u_ij}|.
std::vector<uint64_t> plain_sign_sums(
    const std::vector<std::vector<double>>& updates, std::span<const double> w);
std::vector<double> plain_sign_post(std::span<const uint64_t> sums,
                                    std::span<const double> w, size_t n,
                                    uint64_t round, const PlainSignParams& p);

// Per-bit-position sums over the box-quantized deltas, d*theta values.
std::vector<uint64_t> plain_box_sums(
    const std::vector<std::vector<double>>& updates, std::span<const double> w,
    const PlainBoxParams& p);
std::vector<double> plain_box_post(std::span<const uint64_t> sums,
                                   std::span<const double> w, size_t n,
                                   const PlainBoxParams& p);

struct PlainTrust {
  std::vector<int64_t> weighted;  // sum_i TS_i * signed magnitude, per coord
  uint64_t sum_ts = 0;
};

// Runs the full client-side encoding (normalize, rotate, sign-magnitude
// lattice point) and aggregates trust-weighted sums in exact integers.
PlainTrust plain_trust_sums(const std::vector<std::vector<double>>& updates,
                            std::span<const double> g0,
                            const PlainTrustParams& p);
std::vector<double> plain_trust_post(const PlainTrust& agg,
                                     std::span<const double> w,
                                     std::span<const double> g0,
                                     const PlainTrustParams& p);

}  // namespace p2pagg

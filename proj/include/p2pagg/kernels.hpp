#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2pagg/field.hpp"
#include "p2pagg/rng.hpp"
#include "p2pagg/sharing.hpp"

// Bulk share-table kernels. Every kernel has a plain serial reference and an
// OpenMP variant; all arithmetic is exact mod p and parallel reductions merge
// fixed-size chunks in index order, so both produce bit-identical results.
// Mode::Parallel falls back to serial when OpenMP is unavailable.

namespace p2pagg {

enum class Mode { Serial, Parallel };

// Worker count for Mode::Parallel: P2PAGG_THREADS if set, else the OpenMP
// default. Always >= 1.
int worker_threads();

// Shares `values.size()` secrets at the evaluation points `xs`. Coefficients
// are drawn from `rng` in value order (t draws per value) regardless of mode,
// so transcripts do not depend on thread count. Output is value-major:
// out[v * xs.size() + j] = f_v(xs[j]).
void share_many(std::span<const FieldElement> values, int t,
                std::span<const uint16_t> xs, SeededRng& rng,
                std::span<FieldElement> out, Mode mode);

// acc[i] += x[i]
void sum_vec(std::span<FieldElement> acc, std::span<const FieldElement> x,
             Mode mode);

// acc[i] += srcs[0][i] + ... + srcs[k-1][i], k <= 8. Grouping several
// sources per pass keeps the sum below 2^64 for one deferred reduction.
void sum_rows(std::span<FieldElement> acc, const FieldElement* const* srcs,
              size_t k, Mode mode);

// sum_i r[i] * x[i] * (1 - x[i])   with x[i] = data[i * stride]
FieldElement dzk_binary_acc(const FieldElement* data, size_t count,
                            size_t stride, std::span<const FieldElement> r,
                            Mode mode);

// sum_i r[i] * (x[i] + 1) * (x[i] - 1)   with x[i] = data[i * stride]
FieldElement dzk_sign_acc(const FieldElement* data, size_t count,
                          size_t stride, std::span<const FieldElement> r,
                          Mode mode);

// sum_c r[c] * (sum_{h<per} x[(c*per+h)*stride]^2 - unit_c)
FieldElement dzk_unit_acc(const FieldElement* data, size_t clients, size_t per,
                          size_t stride, std::span<const FieldElement> r,
                          FieldElement unit_c, Mode mode);

// Base-2 recomposition of bit-share rows into value rows, same width:
// out[h * width + c] = sum_{j<theta} 2^j * bits[(h*theta + j) * width + c].
// Multiplication by 2^j is a 61-bit shift-and-fold, not a generic mul.
void recompose_base2(const FieldElement* bits, size_t coords, int theta,
                     size_t width, std::span<FieldElement> out, Mode mode);

// Precomputed reconstruction weights for a fixed set of online columns.
// Columns are indexed in table order; the first degree+1 columns interpolate
// and the rest are consistency checks.
struct ReconPlan {
  int degree = 0;
  std::vector<uint16_t> xs;            // party id per column
  std::vector<FieldElement> lambda0;   // degree+1 weights for f(0)
  std::vector<FieldElement> extra_w;   // (xs.size()-degree-1) x (degree+1)
};

ReconPlan make_recon_plan(std::span<const uint16_t> xs, int degree);

// Reconstructs `values` secrets from a value-major table (stride
// plan.xs.size()). Checks every extra column and throws InconsistentSharing
// naming the first offending value index (by index order, both modes).
void reconstruct_many(const ReconPlan& plan, const FieldElement* table,
                      size_t values, std::span<FieldElement> out, Mode mode);

}  // namespace p2pagg

#pragma once

#include <gmpxx.h>

#include <string>

namespace p2pagg {

// Exact binomial-tail sizing for the aggregation committee. All probabilities
// are big rationals; comparisons against 2^-security_bits are exact.
struct CommitteePolicy {
  mpq_class p;               // adversarial population fraction, 0 < p
  mpq_class threshold_frac;  // 1/2 (honest majority) or 1/3 (correction width)
  int security_bits = 40;
  mpq_class dropout_frac = 0;  // q, 0 <= q < 1
};

// Pr[X >= k] for X ~ Binomial(m, p), exact.
mpq_class binomial_tail_geq(int m, const mpq_class& p, int k);

// Smallest committee size at dropout 0. The bad event is a strict-majority
// excess X > floor(m * threshold); for threshold <= 1/3 the result is then
// widened to 3*floor(m*threshold)+1 so the tolerated adversary count fits an
// error-correcting reconstruction.
int min_committee_size(const CommitteePolicy& policy);

// Same with dropout q: the effective threshold shrinks to threshold*(1-q)
// for the majority regime and threshold*(1-2q) for the correction regime
// (dropped members cost reconstruction width twice: degree budget and
// redundancy). Reduces to min_committee_size at q = 0.
int min_committee_size_with_dropout(const CommitteePolicy& policy);

// Accepts "a/b", decimals ("0.05"), and plain integers.
mpq_class parse_rational(const std::string& s);

}  // namespace p2pagg

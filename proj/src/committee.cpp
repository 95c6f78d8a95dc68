#include "p2pagg/committee.hpp"

#include <cctype>

#include "p2pagg/errors.hpp"

namespace p2pagg {

namespace {

// Sum_{j>=k} C(m,j) a^j (b-a)^(m-j); the tail probability is this over b^m.
mpz_class tail_numerator(int m, int k, const mpz_class& a, const mpz_class& b) {
  mpz_class acc = 0, bin, pa, pq;
  const mpz_class bma = b - a;
  for (int j = k; j <= m; ++j) {
    mpz_bin_uiui(bin.get_mpz_t(), static_cast<unsigned long>(m),
                 static_cast<unsigned long>(j));
    mpz_pow_ui(pa.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(j));
    mpz_pow_ui(pq.get_mpz_t(), bma.get_mpz_t(),
               static_cast<unsigned long>(m - j));
    acc += bin * pa * pq;
  }
  return acc;
}

// Exact test of Pr[X > floor(m*c)] < 2^-bits for X ~ Binomial(m, p).
bool tail_small_enough(int m, const mpq_class& c, const mpq_class& p,
                       int bits) {
  mpz_class kf = (m * c.get_num()) / c.get_den();  // floor(m*c), c >= 0
  if (kf >= m) return true;                        // exceedance impossible
  int k = static_cast<int>(kf.get_si()) + 1;
  mpz_class num = tail_numerator(m, k, p.get_num(), p.get_den());
  mpz_class lhs;
  mpz_mul_2exp(lhs.get_mpz_t(), num.get_mpz_t(),
               static_cast<mp_bitcnt_t>(bits));
  mpz_class rhs;
  mpz_pow_ui(rhs.get_mpz_t(), p.get_den().get_mpz_t(),
             static_cast<unsigned long>(m));
  return lhs < rhs;
}

int size_for(const mpq_class& p, const mpq_class& thr, int bits,
             const mpq_class& q) {
  check(sgn(p) > 0 && p < thr, "adversarial fraction must lie below threshold");
  check(thr <= mpq_class(1, 2), "threshold above one half");
  check(bits >= 1, "security bits must be positive");
  check(sgn(q) >= 0 && q < 1, "dropout fraction out of range");

  const bool correction_regime = thr <= mpq_class(1, 3);
  mpq_class c = correction_regime ? mpq_class(thr * (1 - 2 * q))
                                  : mpq_class(thr * (1 - q));
  c.canonicalize();
  if (p >= c)
    throw Error("dropout leaves no adversarial margin at this threshold");

  for (int m = 1; m <= 1000000; ++m) {
    if (!tail_small_enough(m, c, p, bits)) continue;
    if (!correction_regime) return m;
    // Widen so the certified adversary count t = floor(m*c) leaves room for
    // degree-t reconstruction with t corrected errors (3t+1 points).
    mpz_class tol = (m * c.get_num()) / c.get_den();
    long t = tol.get_si();
    return static_cast<int>(std::max(static_cast<long>(m), 3 * t + 1));
  }
  throw Error("no committee size below scan limit");
}

}  // namespace

mpq_class binomial_tail_geq(int m, const mpq_class& p, int k) {
  check(m >= 0 && k >= 0 && k <= m, "tail index out of range");
  check(sgn(p) > 0 && p < 1, "probability must lie in (0,1)");
  mpz_class den;
  mpz_pow_ui(den.get_mpz_t(), p.get_den().get_mpz_t(),
             static_cast<unsigned long>(m));
  mpq_class r(tail_numerator(m, k, p.get_num(), p.get_den()), den);
  r.canonicalize();
  return r;
}

int min_committee_size(const CommitteePolicy& policy) {
  check(sgn(policy.dropout_frac) == 0, "dropout must be zero here");
  return size_for(policy.p, policy.threshold_frac, policy.security_bits, 0);
}

int min_committee_size_with_dropout(const CommitteePolicy& policy) {
  return size_for(policy.p, policy.threshold_frac, policy.security_bits,
                  policy.dropout_frac);
}

mpq_class parse_rational(const std::string& s) {
  if (s.empty()) throw ConfigError("empty rational");
  auto slash = s.find('/');
  auto dot = s.find('.');
  try {
    if (slash != std::string::npos) {
      mpq_class r(s, 10);
      // Guard before canonicalize(): GMP raises SIGFPE on a zero denominator.
      if (sgn(r.get_den()) == 0) throw ConfigError("zero denominator: " + s);
      r.canonicalize();
      return r;
    }
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      if (digits.empty()) throw ConfigError("malformed rational: " + s);
      bool neg_sign = !digits.empty() && digits[0] == '-';
      for (size_t i = neg_sign ? 1 : 0; i < digits.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(digits[i])))
          throw ConfigError("malformed rational: " + s);
      mpz_class num(digits.empty() || digits == "-" ? "0" : digits, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10,
                    static_cast<unsigned long>(s.size() - dot - 1));
      mpq_class r(num, den);
      r.canonicalize();
      return r;
    }
    return mpq_class(mpz_class(s, 10));
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed rational: " + s);
  }
}

}  // namespace p2pagg

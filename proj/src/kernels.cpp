#include "p2pagg/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "p2pagg/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace p2pagg {

int worker_threads() {
  static const int n = [] {
    if (const char* env = std::getenv("P2PAGG_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
#ifdef _OPENMP
    return std::max(1, omp_get_max_threads());
#else
    return 1;
#endif
  }();
  return n;
}

namespace {

#ifdef _OPENMP
constexpr bool kHaveOmp = true;
#else
constexpr bool kHaveOmp = false;
#endif

bool parallel(Mode mode) { return kHaveOmp && mode == Mode::Parallel; }

// Fold a <2^125 accumulator into [0, p).
inline FieldElement fold128(__uint128_t z) {
  uint64_t lo = uint64_t(z) & kFieldPrime;
  uint64_t hi = uint64_t(z >> 61);  // < 2^64
  __uint128_t s = (__uint128_t)lo + hi;
  uint64_t l2 = uint64_t(s) & kFieldPrime;
  uint64_t h2 = uint64_t(s >> 61);
  uint64_t r = l2 + h2;
  if (r >= kFieldPrime) r -= kFieldPrime;
  return FieldElement{r};
}

void eval_rows(std::span<const FieldElement> values, int t,
               std::span<const FieldElement> xf,
               std::span<const FieldElement> coeffs,  // values.size() x t
               std::span<FieldElement> out, bool par) {
  const size_t v_count = values.size();
  const size_t width = xf.size();
  const size_t tu = static_cast<size_t>(t);
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static) \
    if (par)
#endif
  for (long long vi = 0; vi < static_cast<long long>(v_count); ++vi) {
    const size_t v = static_cast<size_t>(vi);
    const FieldElement* c = coeffs.data() + v * tu;
    FieldElement* row = out.data() + v * width;
    for (size_t j = 0; j < width; ++j) {
      // Horner over c_t .. c_1, then the constant term.
      FieldElement acc = c[tu - 1];
      for (size_t k = tu - 1; k-- > 0;) acc = add(mul(acc, xf[j]), c[k]);
      row[j] = add(mul(acc, xf[j]), values[v]);
    }
  }
  (void)par;
}

// Ordered chunk reduction: identical grouping in both modes, so the exact
// modular sums match bit for bit.
template <typename Term>
FieldElement chunked_sum(size_t count, bool par, Term&& term) {
  const size_t chunk = 4096;
  const size_t chunks = (count + chunk - 1) / chunk;
  if (chunks <= 1) {
    FieldElement acc = fe(0);
    for (size_t i = 0; i < count; ++i) acc = add(acc, term(i));
    return acc;
  }
  std::vector<FieldElement> partial(chunks, fe(0));
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static) \
    if (par)
#endif
  for (long long ci = 0; ci < static_cast<long long>(chunks); ++ci) {
    const size_t c = static_cast<size_t>(ci);
    const size_t lo = c * chunk, hi = std::min(count, lo + chunk);
    FieldElement acc = fe(0);
    for (size_t i = lo; i < hi; ++i) acc = add(acc, term(i));
    partial[c] = acc;
  }
  (void)par;
  FieldElement total = fe(0);
  for (const FieldElement& x : partial) total = add(total, x);
  return total;
}

}  // namespace

void share_many(std::span<const FieldElement> values, int t,
                std::span<const uint16_t> xs, SeededRng& rng,
                std::span<FieldElement> out, Mode mode) {
  check(t >= 1, "threshold out of range");
  check(out.size() == values.size() * xs.size(), "share_many output size");
  std::vector<FieldElement> xf(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    check(xs[j] != 0, "evaluation point zero");
    xf[j] = fe(xs[j]);
  }
  // Draw all coefficients serially first: the transcript must not depend on
  // the evaluation schedule.
  std::vector<FieldElement> coeffs(values.size() * static_cast<size_t>(t));
  for (FieldElement& c : coeffs) c = rng.field_uniform();
  eval_rows(values, t, xf, coeffs, out, parallel(mode));
}

void sum_vec(std::span<FieldElement> acc, std::span<const FieldElement> x,
             Mode mode) {
  const FieldElement* src = x.data();
  sum_rows(acc, &src, 1, mode);
}

void sum_rows(std::span<FieldElement> acc, const FieldElement* const* srcs,
              size_t k, Mode mode) {
  check(k >= 1 && k <= 8, "source group size out of range");
  const size_t len = acc.size();
  const bool par = parallel(mode) && len >= 8192;
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static) \
    if (par)
#endif
  for (long long ii = 0; ii < static_cast<long long>(len); ++ii) {
    const size_t i = static_cast<size_t>(ii);
    // Up to 9 summands < 2^61 each: fits u64... only 8 do; keep headroom by
    // folding through u128 once at the end.
    __uint128_t s = acc[i].v;
    for (size_t j = 0; j < k; ++j) s += srcs[j][i].v;
    acc[i] = fold128(s);
  }
  (void)par;
}

FieldElement dzk_binary_acc(const FieldElement* data, size_t count,
                            size_t stride, std::span<const FieldElement> r,
                            Mode mode) {
  check(r.size() >= count, "challenge vector too short");
  return chunked_sum(count, parallel(mode), [&](size_t i) {
    FieldElement x = data[i * stride];
    return mul(r[i], mul(x, sub(fe(1), x)));
  });
}

FieldElement dzk_sign_acc(const FieldElement* data, size_t count,
                          size_t stride, std::span<const FieldElement> r,
                          Mode mode) {
  check(r.size() >= count, "challenge vector too short");
  return chunked_sum(count, parallel(mode), [&](size_t i) {
    FieldElement x = data[i * stride];
    return mul(r[i], mul(add(x, fe(1)), sub(x, fe(1))));
  });
}

FieldElement dzk_unit_acc(const FieldElement* data, size_t clients, size_t per,
                          size_t stride, std::span<const FieldElement> r,
                          FieldElement unit_c, Mode mode) {
  check(r.size() >= clients, "challenge vector too short");
  return chunked_sum(clients, parallel(mode), [&](size_t c) {
    FieldElement ssq = fe(0);
    const FieldElement* base = data + c * per * stride;
    for (size_t h = 0; h < per; ++h) {
      FieldElement x = base[h * stride];
      ssq = add(ssq, mul(x, x));
    }
    return mul(r[c], sub(ssq, unit_c));
  });
}

void recompose_base2(const FieldElement* bits, size_t coords, int theta,
                     size_t width, std::span<FieldElement> out, Mode mode) {
  check(out.size() == coords * width, "recompose output size");
  check(theta >= 1 && theta <= 32, "bit width out of range");
  const bool par = parallel(mode) && coords * width >= 4096;
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static) \
    if (par)
#endif
  for (long long hi = 0; hi < static_cast<long long>(coords); ++hi) {
    const size_t h = static_cast<size_t>(hi);
    const FieldElement* row0 = bits + h * static_cast<size_t>(theta) * width;
    FieldElement* dst = out.data() + h * width;
    for (size_t c = 0; c < width; ++c) {
      // sum_j x_j * 2^j with shifts; total < theta * 2^(61+theta) <= 2^97.
      __uint128_t acc = 0;
      for (int j = 0; j < theta; ++j)
        acc += (__uint128_t)row0[static_cast<size_t>(j) * width + c].v << j;
      dst[c] = fold128(acc);
    }
  }
  (void)par;
}

ReconPlan make_recon_plan(std::span<const uint16_t> xs, int degree) {
  const size_t need = static_cast<size_t>(degree) + 1;
  if (xs.size() < need) throw InsufficientShares("insufficient shares");
  ReconPlan plan;
  plan.degree = degree;
  plan.xs.assign(xs.begin(), xs.end());
  std::vector<uint16_t> base(xs.begin(), xs.begin() + static_cast<long>(need));
  plan.lambda0 = lagrange_at_zero(base);
  const size_t extras = xs.size() - need;
  plan.extra_w.resize(extras * need);
  for (size_t e = 0; e < extras; ++e) {
    FieldElement at = fe(xs[need + e]);
    for (size_t i = 0; i < need; ++i) {
      // l_i(at) over the base points
      FieldElement num = fe(1), den = fe(1);
      FieldElement xi = fe(base[i]);
      for (size_t j = 0; j < need; ++j) {
        if (j == i) continue;
        FieldElement xj = fe(base[j]);
        num = mul(num, sub(at, xj));
        den = mul(den, sub(xi, xj));
      }
      plan.extra_w[e * need + i] = mul(num, inv(den));
    }
  }
  return plan;
}

void reconstruct_many(const ReconPlan& plan, const FieldElement* table,
                      size_t values, std::span<FieldElement> out, Mode mode) {
  check(out.size() == values, "reconstruct output size");
  const size_t width = plan.xs.size();
  const size_t need = static_cast<size_t>(plan.degree) + 1;
  const size_t extras = width - need;
  const bool par = parallel(mode) && values >= 512;
  long long first_bad = -1;
#ifdef _OPENMP
#pragma omp parallel num_threads(worker_threads()) if (par)
#endif
  {
    long long local_bad = -1;
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
    for (long long vi = 0; vi < static_cast<long long>(values); ++vi) {
      const size_t v = static_cast<size_t>(vi);
      const FieldElement* row = table + v * width;
      FieldElement f0 = fe(0);
      for (size_t i = 0; i < need; ++i)
        f0 = add(f0, mul(plan.lambda0[i], row[i]));
      out[v] = f0;
      for (size_t e = 0; e < extras; ++e) {
        FieldElement pred = fe(0);
        const FieldElement* w = plan.extra_w.data() + e * need;
        for (size_t i = 0; i < need; ++i) pred = add(pred, mul(w[i], row[i]));
        if (pred != row[need + e]) {
          if (local_bad < 0 || vi < local_bad) local_bad = vi;
          break;
        }
      }
    }
    if (local_bad >= 0) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (first_bad < 0 || local_bad < first_bad) first_bad = local_bad;
      }
    }
  }
  (void)par;
  if (first_bad >= 0)
    throw InconsistentSharing("inconsistent sharing at value index " +
                              std::to_string(first_bad));
}

}  // namespace p2pagg

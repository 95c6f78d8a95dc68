#include "p2pagg/plain.hpp"

#include <cmath>

#include "p2pagg/codec.hpp"
#include "p2pagg/errors.hpp"

namespace p2pagg {

std::vector<uint64_t> plain_sign_sums(
    const std::vector<std::vector<double>>& updates,
    std::span<const double> w) {
  std::vector<uint64_t> sums(w.size(), 0);
  for (const std::vector<double>& u : updates) {
    check(u.size() == w.size(), "update dimension mismatch");
    for (size_t j = 0; j < w.size(); ++j)
      if (w[j] - u[j] >= 0) ++sums[j];  // sign(0) = +1
  }
  return sums;
}

std::vector<double> plain_sign_post(std::span<const uint64_t> sums,
                                    std::span<const double> w, size_t n,
                                    uint64_t round, const PlainSignParams& p) {
  const double eta = p.eta0 / (1.0 + p.gamma * double(round));
  std::vector<double> out(w.begin(), w.end());
  for (size_t j = 0; j < w.size(); ++j) {
    const double sign_sum = 2.0 * double(sums[j]) - double(n);
    out[j] -= eta * (p.rho * w[j] + p.lambda * sign_sum);
  }
  return out;
}

std::vector<uint64_t> plain_box_sums(
    const std::vector<std::vector<double>>& updates, std::span<const double> w,
    const PlainBoxParams& p) {
  const size_t d = w.size();
  const double levels = double((uint64_t{1} << p.theta) - 1);
  std::vector<uint64_t> sums(d * p.theta, 0);
  for (const std::vector<double>& u : updates) {
    check(u.size() == d, "update dimension mismatch");
    for (size_t h = 0; h < d; ++h) {
      double c = u[h] - w[h];
      c = c < -p.tau ? -p.tau : (c > p.tau ? p.tau : c);
      const uint64_t q =
          uint64_t(std::nearbyint((c + p.tau) / (2.0 * p.tau) * levels));
      for (int j = 0; j < p.theta; ++j) sums[h * p.theta + j] += (q >> j) & 1;
    }
  }
  return sums;
}

std::vector<double> plain_box_post(std::span<const uint64_t> sums,
                                   std::span<const double> w, size_t n,
                                   const PlainBoxParams& p) {
  std::vector<double> out(w.begin(), w.end());
  if (n == 0) return out;
  const double levels = double((uint64_t{1} << p.theta) - 1);
  for (size_t h = 0; h < w.size(); ++h) {
    uint64_t s = 0;
    for (int j = 0; j < p.theta; ++j) s += sums[h * p.theta + j] << j;
    const double mean_delta =
        double(s) / double(n) / levels * 2.0 * p.tau - p.tau;
    out[h] += p.eta * mean_delta;
  }
  return out;
}

PlainTrust plain_trust_sums(const std::vector<std::vector<double>>& updates,
                            std::span<const double> g0,
                            const PlainTrustParams& p) {
  const size_t d = g0.size();
  const int frac = p.theta - 2;
  FixedPointCodec codec;
  codec.theta = p.theta;
  codec.frac = frac;

  double g0n = 0;
  for (double v : g0) g0n += v * v;
  g0n = std::sqrt(g0n);
  check(g0n > 0, "degenerate root update");
  std::vector<double> refl(d);
  double vv = 0;
  for (size_t j = 0; j < d; ++j) {
    refl[j] = g0[j] / g0n - (j == 0 ? 1.0 : 0.0);
    vv += refl[j] * refl[j];
  }

  PlainTrust agg;
  agg.weighted.assign(d, 0);
  for (const std::vector<double>& u : updates) {
    check(u.size() == d, "update dimension mismatch");
    double un = 0;
    for (double v : u) un += v * v;
    un = std::sqrt(un);
    std::vector<double> r(d, 0.0);
    if (un < 1e-12) {
      r[1] = 1.0;
    } else {
      for (size_t j = 0; j < d; ++j) r[j] = u[j] / un;
      if (vv > 1e-24) {
        double vx = 0;
        for (size_t j = 0; j < d; ++j) vx += refl[j] * r[j];
        const double s = 2.0 * vx / vv;
        for (size_t j = 0; j < d; ++j) r[j] -= s * refl[j];
      }
      if (r[0] < -0.5 / double(uint64_t{1} << frac)) {
        r.assign(d, 0.0);
        r[1] = 1.0;
      }
    }
    std::vector<uint32_t> mags(d);
    std::vector<int> sgn(d, 1);
    for (size_t h = 0; h < d; ++h) {
      const SignMag sm = encode_signmag(codec, r[h]);
      mags[h] = sm.mag;
      sgn[h] = sm.sign;
    }
    (void)lattice_repair(mags, uint64_t{1} << (2 * frac), 0,
                         (uint32_t{1} << p.theta) - 1);  // slack not aggregated
    for (size_t h = 0; h < d; ++h)
      if (mags[h] == 0) sgn[h] = 1;
    const int64_t ts = int64_t(mags[0]);
    agg.sum_ts += uint64_t(ts);
    agg.weighted[0] += ts * int64_t(mags[0]);
    for (size_t h = 1; h < d; ++h)
      agg.weighted[h] += ts * int64_t(sgn[h]) * int64_t(mags[h]);
  }
  return agg;
}

std::vector<double> plain_trust_post(const PlainTrust& agg,
                                     std::span<const double> w,
                                     std::span<const double> g0,
                                     const PlainTrustParams& p) {
  std::vector<double> out(w.begin(), w.end());
  if (agg.sum_ts == 0) return out;
  const size_t d = w.size();
  const int frac = p.theta - 2;
  double g0n = 0;
  for (double v : g0) g0n += v * v;
  g0n = std::sqrt(g0n);

  std::vector<double> g(d);
  for (size_t h = 0; h < d; ++h)
    g[h] = double(agg.weighted[h]) / double(agg.sum_ts) /
           double(uint64_t{1} << frac);
  std::vector<double> refl(d);
  double vv = 0;
  for (size_t j = 0; j < d; ++j) {
    refl[j] = g0[j] / g0n - (j == 0 ? 1.0 : 0.0);
    vv += refl[j] * refl[j];
  }
  if (vv > 1e-24) {
    double vx = 0;
    for (size_t j = 0; j < d; ++j) vx += refl[j] * g[j];
    const double s = 2.0 * vx / vv;
    for (size_t j = 0; j < d; ++j) g[j] -= s * refl[j];
  }
  for (size_t h = 0; h < d; ++h) out[h] += p.alpha * g0n * g[h];
  return out;
}

}  // namespace p2pagg

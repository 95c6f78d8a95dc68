#include "p2pagg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "p2pagg/errors.hpp"
#include "p2pagg/field.hpp"
#include "p2pagg/rng.hpp"

namespace p2pagg {

namespace {

double seconds_between(std::chrono::steady_clock::time_point a,
                       std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

std::vector<BenchCell> run_bench(const std::string& protocol,
                                 std::span<const size_t> dims,
                                 std::span<const size_t> peers, int trials,
                                 uint64_t seed, Mode mode) {
  const bool is_sign = protocol == "rsa";
  const bool is_box = protocol == "cc";
  const bool is_trust = protocol == "flt";
  if (!is_sign && !is_box && !is_trust)
    throw Error("unknown protocol '" + protocol + "'");
  if (trials < 1) throw Error("trials must be positive");

  const int m = is_trust ? 121 : 46;
  const int t = (m - 1) / (is_trust ? 3 : 2);
  const int reveal_degree = is_trust ? 3 * t : t;
  const int theta = is_box ? 32 : 16;  // protocol defaults

  std::vector<uint16_t> xs(m);
  for (int j = 0; j < m; ++j) xs[j] = uint16_t(j + 1);
  const ReconPlan plan = make_recon_plan(xs, reveal_degree);
  const ReconPlan ts_plan = is_trust ? make_recon_plan(xs, t) : ReconPlan{};

  SeededRng rng = SeededRng::from_seed64(seed);
  std::vector<BenchCell> cells;

  for (size_t d : dims) {
    if (d < 2) throw Error("bench needs d >= 2");
    const size_t col =
        is_sign ? d : is_box ? d * theta : d * theta + (d - 1);
    const size_t reveal = is_sign ? d : is_box ? d * theta : d;

    std::vector<FieldElement> secrets(reveal);
    for (auto& s : secrets) s = rng.field_uniform();
    std::vector<FieldElement> table(reveal * size_t(m));
    SeededRng share_rng = rng.fork("bshr", d);
    share_many(secrets, reveal_degree, xs, share_rng, table, mode);
    std::vector<FieldElement> ts_table(is_trust ? m : 0);
    if (is_trust) {
      const FieldElement ts_sum[1] = {rng.field_uniform()};
      SeededRng ts_rng = rng.fork("btss", d);
      share_many(ts_sum, t, xs, ts_rng, ts_table, mode);
    }

    // Cycled pool of client columns; the sums touch every client slot but the
    // distinct-buffer count stays memory-bounded.
    const size_t pool = 8;
    std::vector<std::vector<FieldElement>> bufs(
        pool, std::vector<FieldElement>(col));
    for (auto& b : bufs)
      for (auto& x : b) x = rng.field_uniform();

    std::vector<FieldElement> acc(reveal);
    std::vector<FieldElement> out(reveal + 1);
    std::vector<FieldElement> mags(is_trust ? d : 0);

    for (size_t n : peers) {
      if (n < 1) throw Error("bench needs n >= 1");
      // Repeat sub-millisecond cells so timer noise stays small.
      const int reps = int(std::max<size_t>(1, size_t(20000) / d));
      std::vector<double> per_trial(trials);
      std::vector<uint64_t> sums(trials);
      for (int trial = 0; trial < trials; ++trial) {
        FieldElement sink{};
        const auto t0 = std::chrono::steady_clock::now();
        for (int rep = 0; rep < reps; ++rep) {
          std::fill(acc.begin(), acc.end(), FieldElement{});
          if (is_trust) {
            FieldElement ts_acc{};
            for (size_t i = 0; i < n; ++i) {
              const FieldElement* c = bufs[i % pool].data();
              recompose_base2(c, d, theta, 1, mags, mode);
              const FieldElement* sgn = c + d * size_t(theta);
              const FieldElement ts = mags[0];
              ts_acc = add(ts_acc, ts);
              acc[0] = add(acc[0], mul(ts, mags[0]));
              for (size_t h = 1; h < d; ++h)
                acc[h] = add(acc[h], mul(ts, mul(sgn[h - 1], mags[h])));
            }
            sink = add(sink, ts_acc);
          } else {
            const FieldElement* srcs[8];
            size_t i = 0;
            while (i < n) {
              const size_t k = std::min<size_t>(8, n - i);
              for (size_t j = 0; j < k; ++j) srcs[j] = bufs[(i + j) % pool].data();
              sum_rows(acc, srcs, k, mode);
              i += k;
            }
          }
          reconstruct_many(plan, table.data(), reveal,
                           std::span(out).first(reveal), mode);
          if (is_trust)
            reconstruct_many(ts_plan, ts_table.data(), 1,
                             std::span(out).subspan(reveal, 1), mode);
          // Fold every output so no store is dead.
          for (size_t h = 0; h < reveal; ++h) {
            sink = add(sink, acc[h]);
            sink = add(sink, out[h]);
          }
          if (is_trust) sink = add(sink, out[reveal]);
        }
        const auto t1 = std::chrono::steady_clock::now();
        per_trial[trial] = seconds_between(t0, t1) / reps;
        sums[trial] = sink.v;
      }
      for (int trial = 1; trial < trials; ++trial)
        if (sums[trial] != sums[0])
          throw Error("bench trials diverged");  // same inputs, same work
      BenchCell cell;
      cell.protocol = protocol;
      cell.d = d;
      cell.n = n;
      cell.committee = m;
      cell.reveal_degree = reveal_degree;
      cell.trials = trials;
      cell.mean_seconds =
          std::accumulate(per_trial.begin(), per_trial.end(), 0.0) / trials;
      cell.checksum = sums[0];
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string bench_csv(std::span<const BenchCell> cells) {
  std::ostringstream os;
  os << "protocol,d,n,committee,reveal_degree,trials,mean_fr_seconds,checksum\n";
  for (const auto& c : cells) {
    os << c.protocol << ',' << c.d << ',' << c.n << ',' << c.committee << ','
       << c.reveal_degree << ',' << c.trials << ','
       << std::setprecision(9) << std::scientific << c.mean_seconds << ','
       << c.checksum << '\n';
    os << std::defaultfloat;
  }
  return os.str();
}

double linear_fit_r2(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error("fit needs matched xs/ys with at least two points");
  const double k = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (syy == 0) return 1.0;
  if (sxx == 0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace p2pagg

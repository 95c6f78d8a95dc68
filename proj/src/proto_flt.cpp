#include <chrono>
#include <cmath>

#include "p2pagg/codec.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/hash.hpp"
#include "p2pagg/protocol.hpp"

// Trust-score weighted aggregation: every peer derives a public root update
// g0, rotates its own normalized update so g0 lands on the x-axis, and
// submits the rotated vector as a sign-magnitude fixed-point unit lattice
// point. The x magnitude then *is* the (clipped) cosine to g0, so the
// committee can weight each update by its trust score with one share
// multiplication per coordinate and reveal sum(TS_i * g_i) plus sum(TS_i).

namespace p2pagg {
namespace {

constexpr double kZeroNorm = 1e-12;

double l2_norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

class TrustProtocol final : public Protocol {
 public:
  TrustProtocol(const Config& cfg, const Learner& learner, size_t d)
      : d_(d),
        learner_(learner),
        alpha_(cfg.get_double("flt.alpha", 1.0)),
        epoch_lr_(cfg.get_double("learner.lr", 0.1)) {
    codec_.theta = static_cast<int>(cfg.get_int("flt.theta", 16));
    check(codec_.theta >= 4 && codec_.theta <= 30, "flt.theta must be 4..30");
    codec_.frac = codec_.theta - 2;  // headroom for degree-3t products
    check(d_ >= 3, "trust-score rotation needs at least 3 coordinates");
    // Weighted sums are bounded by n * 2^(2*frac); keep them far below p/2
    // so signed decoding is unambiguous (checked again per round vs. n).
    check((uint64_t{1} << (2 * codec_.frac)) < (kFieldPrime >> 20),
          "fixed-point width too large for the field");
  }

  std::string name() const override { return "flt"; }
  int degree_divisor() const override { return 3; }
  // The magnitude region carries the model coordinates plus the slack slots
  // that absorb the squared-sum residue; slack is validated like any other
  // magnitude but never aggregated.
  std::vector<size_t> payload_regions() const override {
    return {padded_d() * static_cast<size_t>(codec_.theta), d_ - 1};
  }

  void begin_round(RoundCtx& ctx) const override {
    Sha256 h;
    h.update("rtep");
    h.update(std::span<const uint8_t>(ctx.seed.seed.data(),
                                      ctx.seed.seed.size()));
    h.update_u64le(ctx.round);
    SeededRng pub(h.finish());
    ctx.g0 = local_epoch_delta(learner_, ctx.w, *ctx.train, ctx.root_shard,
                               epoch_lr_, pub);
    ctx.g0_norm = l2_norm(ctx.g0);
    if (ctx.g0_norm < kZeroNorm) {
      ctx.skip_round = true;
      return;
    }
    std::vector<double> v(d_);
    double dev = 0;
    for (size_t j = 0; j < d_; ++j) {
      v[j] = ctx.g0[j] / ctx.g0_norm - (j == 0 ? 1.0 : 0.0);
      dev += v[j] * v[j];
    }
    if (dev > 1e-24) ctx.householder_v = std::move(v);  // else identity
  }

  std::vector<double> client_update(PeerState& peer,
                                    const RoundCtx& ctx) const override {
    return local_epoch_delta(learner_, ctx.w, *ctx.train, peer.shard,
                             epoch_lr_, peer.rng);
  }

  std::vector<FieldElement> preprocess(std::span<const double> u,
                                       const RoundCtx& ctx) const override {
    check(u.size() == d_, "update dimension mismatch");
    const double norm = l2_norm(u);
    std::vector<double> r;
    if (norm < kZeroNorm) {
      r.assign(d_, 0.0);  // degenerate update contributes nothing
      r[1] = 1.0;
    } else {
      std::vector<double> ghat(d_);
      for (size_t j = 0; j < d_; ++j) ghat[j] = u[j] / norm;
      r = apply_reflection(ctx.householder_v, ghat);
      // Negative cosine => canonical zero-weight vector. The threshold is a
      // half quantization step: anything closer to zero encodes to x-mag 0
      // (weight 0) either way, and fp noise from a preimage round trip must
      // not flip the branch.
      if (r[0] < -0.5 / double(uint64_t{1} << codec_.frac)) {
        r.assign(d_, 0.0);
        r[1] = 1.0;
      }
    }
    return encode_rotated(r);
  }

  std::vector<FieldElement> sample_valid(SeededRng& rng,
                                         const RoundCtx&) const override {
    std::vector<double> x(d_);
    double n2 = 0;
    while (n2 == 0) {
      for (double& v : x) v = rng.normal();
      x[0] = std::fabs(x[0]);
      n2 = l2_norm(x);
    }
    for (double& v : x) v /= n2;
    return encode_rotated(x);
  }

  std::vector<double> preimage(std::span<const FieldElement> v,
                               const RoundCtx& ctx) const override {
    const int theta = codec_.theta;
    check(v.size() == padded_d() * static_cast<size_t>(theta) + d_ - 1,
          "valid-set element dimension mismatch");
    std::vector<double> r(d_);
    uint64_t bits[64];
    const double scale = double(uint64_t{1} << codec_.frac);
    for (size_t h = 0; h < d_; ++h) {  // slack rows carry no model mass
      for (int j = 0; j < theta; ++j) {
        check(v[h * theta + j].v <= 1, "bit expected");
        bits[j] = v[h * theta + j].v;
      }
      const double mag = double(join_bits(bits, theta)) / scale;
      double sign = 1.0;
      if (h > 0) {
        const FieldElement s = v[padded_d() * theta + (h - 1)];
        check(s == fe_signed(1) || s == fe_signed(-1), "sign expected");
        sign = s == fe_signed(1) ? 1.0 : -1.0;
      }
      r[h] = sign * mag;
    }
    // Rotate back; the reflection is an involution so F^P re-derives v.
    return apply_reflection(ctx.householder_v, r);
  }

  CommitteeOutput committee_phase(CommitteeCtx& cc) const override {
    const int theta = codec_.theta;
    const RegionTable& bits = cc.regions.at(0);
    const RegionTable& signs = cc.regions.at(1);
    const size_t m = cc.member_points.size();
    const size_t n_slots = cc.client_ids.size();
    check(3 * static_cast<size_t>(cc.t) + 1 <= m,
          "committee too small for degree-3t products");

    std::vector<uint16_t> flagged;
    CheckView bview;
    bview.cells = bits.cells.data();
    bview.stride = m;
    bview.member_ids = cc.member_points;
    bview.clients = n_slots;
    bview.per_client = bits.rows_per_client;
    bview.degree_t = cc.t;
    run_check_phase(cc, CheckKind::Binary, "binary", bview, flagged);

    CheckView sview = bview;
    sview.cells = signs.cells.data();
    sview.per_client = signs.rows_per_client;
    run_check_phase(cc, CheckKind::Sign, "sign", sview, flagged);

    // Per-client magnitude recomposition (slack rows included -- the unit
    // check sums squares over all of them), all member columns at once.
    const size_t pd = padded_d();
    std::vector<FieldElement> mags(n_slots * pd * m);
    for (size_t i = 0; i < n_slots; ++i)
      recompose_base2(bits.cells.data() + i * pd * theta * m, pd, theta, m,
                      std::span<FieldElement>(mags.data() + i * pd * m,
                                              pd * m),
                      cc.mode);

    CheckView uview = bview;
    uview.cells = mags.data();
    uview.per_client = pd;
    uview.unit_c = fe(uint64_t{1} << (2 * codec_.frac));
    run_check_phase(cc, CheckKind::UnitLength, "unit", uview, flagged);

    const std::vector<uint16_t> slots = surviving_slots(n_slots, flagged);
    // TS_i = x-magnitude (row 0); weighted coordinate shares are
    // TS * sign * mag: degree 3t for h > 0, degree 2t for h = 0 (lifting to
    // 3t is a relabeling, values unchanged).
    std::vector<std::vector<FieldElement>> wsums(m);
    std::vector<std::vector<FieldElement>> tsums(m);
    for (size_t c = 0; c < m; ++c) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<FieldElement> acc(d_);
      FieldElement ts_acc;
      for (uint16_t i : slots) {
        const FieldElement* mag = mags.data() + i * pd * m + c;
        const FieldElement* sgn =
            signs.cells.data() + i * (d_ - 1) * m + c;
        const FieldElement ts = mag[0];
        ts_acc = add(ts_acc, ts);
        acc[0] = add(acc[0], mul(ts, mag[0]));
        for (size_t h = 1; h < d_; ++h)
          acc[h] = add(acc[h],
                       mul(ts, mul(sgn[(h - 1) * m], mag[h * m])));
      }
      wsums[c] = std::move(acc);
      tsums[c] = {ts_acc};
      if (cc.member_seconds != nullptr)
        (*cc.member_seconds)[c] +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
    }
    CommitteeOutput out;
    out.revealed = reveal_sums(cc, 3 * cc.t, wsums);
    const std::vector<uint64_t> ts = reveal_sums(cc, cc.t, tsums);
    out.revealed.push_back(ts.at(0));
    out.flagged_slots = std::move(flagged);
    return out;
  }

  void postprocess(std::span<const uint64_t> revealed, const RoundCtx& ctx,
                   size_t contributors, std::vector<double>& w) const override {
    check(revealed.size() == d_ + 1, "aggregate dimension mismatch");
    const uint64_t sum_ts = revealed[d_];
    const uint64_t ts_cap =
        contributors * (uint64_t{1} << codec_.frac);
    check(sum_ts <= ts_cap, "trust-score sum exceeds bound");
    if (sum_ts == 0) return;  // nothing trusted this round
    const double scale = double(uint64_t{1} << codec_.frac);
    std::vector<double> g(d_);
    for (size_t h = 0; h < d_; ++h) {
      const int64_t s = to_signed(FieldElement{revealed[h]});
      g[h] = double(s) / double(sum_ts) / scale;
    }
    g = apply_reflection(ctx.householder_v, g);
    for (size_t h = 0; h < d_; ++h)
      w[h] += alpha_ * ctx.g0_norm * g[h];
  }

 private:
  // Sign-magnitude unit-lattice encoding of an already-rotated unit vector
  // with nonnegative x: theta bit rows per coordinate, then d-1 sign rows
  // (x carries no sign; zero magnitudes get the canonical +1).
  std::vector<FieldElement> encode_rotated(std::span<const double> r) const {
    const int theta = codec_.theta;
    std::vector<uint32_t> mags(d_);
    std::vector<int> sgn(d_, 1);
    for (size_t h = 0; h < d_; ++h) {
      const SignMag sm = encode_signmag(codec_, r[h]);
      mags[h] = sm.mag;
      sgn[h] = sm.sign;
    }
    check(r[0] >= 0 || mags[0] == 0, "x coordinate must be nonnegative");
    const std::vector<uint32_t> slack =
        lattice_repair(mags, uint64_t{1} << (2 * codec_.frac), 0,
                       (uint32_t{1} << theta) - 1);
    for (size_t h = 0; h < d_; ++h)
      if (mags[h] == 0) sgn[h] = 1;  // canonical sign for zero
    mags.insert(mags.end(), slack.begin(), slack.end());
    std::vector<FieldElement> rows(padded_d() * theta + d_ - 1);
    uint64_t bits[64];
    for (size_t h = 0; h < padded_d(); ++h) {
      split_bits(mags[h], theta, bits);
      for (int j = 0; j < theta; ++j) rows[h * theta + j] = fe(bits[j]);
      if (h > 0 && h < d_) rows[padded_d() * theta + (h - 1)] = fe_signed(sgn[h]);
    }
    return rows;
  }

  size_t padded_d() const { return d_ + kUnitSlackValues; }

  size_t d_;
  const Learner& learner_;
  double alpha_;
  double epoch_lr_;
  FixedPointCodec codec_;
};

}  // namespace

std::unique_ptr<Protocol> make_trust_protocol(const Config& cfg,
                                              const Learner& learner,
                                              size_t d) {
  return std::make_unique<TrustProtocol>(cfg, learner, d);
}

}  // namespace p2pagg

#include <chrono>
#include <cmath>

#include "p2pagg/codec.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/protocol.hpp"

// Centered box clipping: clients quantize their clamped momentum step into
// theta bits per coordinate and share every bit; the committee reveals
// per-bit-position sums and peers recompose the mean clipped delta. Clamping
// to [-tau, tau] is the robustness mechanism: no in-V submission can move
// any coordinate of the mean by more than tau/n.

namespace p2pagg {
namespace {

class BoxProtocol final : public Protocol {
 public:
  BoxProtocol(const Config& cfg, const Learner& learner, size_t d)
      : d_(d),
        learner_(learner),
        beta_(cfg.get_double("cc.beta", 0.9)),
        client_lr_(cfg.get_double("cc.client_lr", 1.0)),
        eta_(cfg.get_double("cc.eta", 1.0)) {
    codec_.theta = static_cast<int>(cfg.get_int("cc.theta", 32));
    codec_.tau = cfg.get_double("cc.tau", 1.0);
    check(beta_ >= 0 && beta_ < 1, "cc.beta must be in [0, 1)");
    check(codec_.tau > 0, "cc.tau must be positive");
    check(codec_.theta >= 1 && codec_.theta <= 32, "cc.theta must be 1..32");
  }

  std::string name() const override { return "cc"; }
  int degree_divisor() const override { return 2; }
  std::vector<size_t> payload_regions() const override {
    return {d_ * static_cast<size_t>(codec_.theta)};
  }

  std::vector<double> client_update(PeerState& peer,
                                    const RoundCtx& ctx) const override {
    if (peer.aux.empty()) peer.aux.assign(d_, 0.0);  // momentum m_i^0 = 0
    const std::vector<uint32_t> batch = draw_batch(peer.shard, peer.rng);
    const std::vector<double> g = learner_.grad(ctx.w, *ctx.train, batch);
    std::vector<double> u(d_);
    for (size_t j = 0; j < d_; ++j) {
      peer.aux[j] = (1.0 - beta_) * g[j] + beta_ * peer.aux[j];
      u[j] = ctx.w[j] - client_lr_ * peer.aux[j];  // proposed params
    }
    return u;
  }

  std::vector<FieldElement> preprocess(std::span<const double> u,
                                       const RoundCtx& ctx) const override {
    check(u.size() == d_, "update dimension mismatch");
    const int theta = codec_.theta;
    std::vector<FieldElement> rows(d_ * theta);
    uint64_t bits[64];
    for (size_t h = 0; h < d_; ++h) {
      const uint64_t q = encode_box(codec_, u[h] - ctx.w[h]);
      split_bits(q, theta, bits);
      for (int j = 0; j < theta; ++j) rows[h * theta + j] = fe(bits[j]);
    }
    return rows;
  }

  std::vector<FieldElement> sample_valid(SeededRng& rng,
                                         const RoundCtx&) const override {
    const int theta = codec_.theta;
    std::vector<FieldElement> rows(d_ * theta);
    uint64_t bits[64];
    for (size_t h = 0; h < d_; ++h) {
      const uint64_t q = rng.below(uint64_t{1} << theta);
      split_bits(q, theta, bits);
      for (int j = 0; j < theta; ++j) rows[h * theta + j] = fe(bits[j]);
    }
    return rows;
  }

  std::vector<double> preimage(std::span<const FieldElement> v,
                               const RoundCtx& ctx) const override {
    const int theta = codec_.theta;
    check(v.size() == d_ * static_cast<size_t>(theta),
          "valid-set element dimension mismatch");
    std::vector<double> u(d_);
    uint64_t bits[64];
    for (size_t h = 0; h < d_; ++h) {
      for (int j = 0; j < theta; ++j) {
        check(v[h * theta + j].v <= 1, "bit expected");
        bits[j] = v[h * theta + j].v;
      }
      u[h] = ctx.w[h] + decode_box(codec_, double(join_bits(bits, theta)));
    }
    return u;
  }

  CommitteeOutput committee_phase(CommitteeCtx& cc) const override {
    const RegionTable& bits = cc.regions.at(0);
    const size_t m = cc.member_points.size();
    CheckView view;
    view.cells = bits.cells.data();
    view.stride = m;
    view.member_ids = cc.member_points;
    view.clients = cc.client_ids.size();
    view.per_client = bits.rows_per_client;
    view.degree_t = cc.t;
    std::vector<uint16_t> flagged;
    run_check_phase(cc, CheckKind::Binary, "binary", view, flagged);

    const std::vector<uint16_t> slots =
        surviving_slots(cc.client_ids.size(), flagged);
    std::vector<std::vector<FieldElement>> sums(m);
    for (size_t c = 0; c < m; ++c) {
      const auto t0 = std::chrono::steady_clock::now();
      sums[c] = member_region_sum(cc, bits, slots, c);
      if (cc.member_seconds != nullptr)
        (*cc.member_seconds)[c] +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
    }
    CommitteeOutput out;
    out.revealed = reveal_sums(cc, cc.t, sums);
    out.flagged_slots = std::move(flagged);
    return out;
  }

  void postprocess(std::span<const uint64_t> revealed, const RoundCtx& ctx,
                   size_t contributors, std::vector<double>& w) const override {
    (void)ctx;
    const int theta = codec_.theta;
    check(revealed.size() == d_ * static_cast<size_t>(theta),
          "aggregate dimension mismatch");
    if (contributors == 0) return;
    // s_h <= n * (2^theta - 1): fits uint64 and stays far below p.
    check(static_cast<__uint128_t>(contributors) *
              (((uint64_t{1} << theta) - 1)) < kFieldPrime,
          "recomposed sum could wrap the field");
    for (size_t h = 0; h < d_; ++h) {
      uint64_t s = 0;
      for (int j = 0; j < theta; ++j) {
        check(revealed[h * theta + j] <= contributors,
              "bit sum exceeds client count");
        s += revealed[h * theta + j] << j;
      }
      const double mean_level =
          static_cast<double>(s) / static_cast<double>(contributors);
      const double c = decode_box(codec_, mean_level);
      check(c >= -codec_.tau && c <= codec_.tau,
            "decoded mean delta outside clip box");
      w[h] += eta_ * c;
    }
  }

 private:
  size_t d_;
  const Learner& learner_;
  double beta_, client_lr_, eta_;
  FixedPointCodec codec_;
};

}  // namespace

std::unique_ptr<Protocol> make_box_protocol(const Config& cfg,
                                            const Learner& learner, size_t d) {
  return std::make_unique<BoxProtocol>(cfg, learner, d);
}

}  // namespace p2pagg

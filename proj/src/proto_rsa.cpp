#include <chrono>

#include "p2pagg/errors.hpp"
#include "p2pagg/protocol.hpp"

// Sign-based robust aggregation: clients submit one bit per coordinate
// encoding sign(w - x_i); the committee reveals per-coordinate bit sums and
// every peer takes a signSGD-style step. The l1 penalty lambda pulls local
// params toward the global model, which is what bounds adversarial drift.

namespace p2pagg {
namespace {

class SignProtocol final : public Protocol {
 public:
  SignProtocol(const Config& cfg, const Learner& learner, size_t d)
      : d_(d),
        learner_(learner),
        lambda_(cfg.get_double("rsa.lambda", 0.5)),
        eta0_(cfg.get_double("rsa.eta0", 0.01)),
        gamma_(cfg.get_double("rsa.gamma", 0.001)),
        rho_(cfg.get_double("rsa.rho", 0.0)) {
    check(lambda_ > 0, "rsa.lambda must be positive");
    check(eta0_ > 0 && gamma_ >= 0, "step schedule must be positive");
  }

  std::string name() const override { return "rsa"; }
  int degree_divisor() const override { return 2; }
  std::vector<size_t> payload_regions() const override { return {d_}; }

  std::vector<double> client_update(PeerState& peer,
                                    const RoundCtx& ctx) const override {
    if (peer.aux.empty()) peer.aux = ctx.w;  // x_i^0 = w^0
    std::vector<double> u = peer.aux;        // submit the pre-step params
    const double eta = step(ctx.round);
    const std::vector<uint32_t> batch = draw_batch(peer.shard, peer.rng);
    const std::vector<double> g =
        learner_.grad(peer.aux, *ctx.train, batch);
    for (size_t j = 0; j < d_; ++j) {
      const double s = peer.aux[j] - ctx.w[j] >= 0 ? 1.0 : -1.0;
      peer.aux[j] -= eta * (g[j] + lambda_ * s);
    }
    return u;
  }

  std::vector<FieldElement> preprocess(std::span<const double> u,
                                       const RoundCtx& ctx) const override {
    check(u.size() == d_, "update dimension mismatch");
    std::vector<FieldElement> rows(d_);
    for (size_t j = 0; j < d_; ++j)
      rows[j] = fe(ctx.w[j] - u[j] >= 0 ? 1 : 0);  // b = (sign+1)/2, sign(0)=+1
    return rows;
  }

  std::vector<FieldElement> sample_valid(SeededRng& rng,
                                         const RoundCtx&) const override {
    std::vector<FieldElement> rows(d_);
    for (FieldElement& r : rows) r = fe(rng.below(2));
    return rows;
  }

  std::vector<double> preimage(std::span<const FieldElement> v,
                               const RoundCtx& ctx) const override {
    check(v.size() == d_, "valid-set element dimension mismatch");
    std::vector<double> u(d_);
    for (size_t j = 0; j < d_; ++j) {
      check(v[j].v <= 1, "bit expected");
      u[j] = ctx.w[j] - (v[j].v == 1 ? 1.0 : -1.0);  // u_j = w_j - v_j
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
    check(revealed.size() == d_, "aggregate dimension mismatch");
    const double eta = step(ctx.round);
    const double n = static_cast<double>(contributors);
    for (size_t j = 0; j < d_; ++j) {
      check(revealed[j] <= contributors, "bit sum exceeds client count");
      const double sign_sum = 2.0 * static_cast<double>(revealed[j]) - n;
      w[j] -= eta * (rho_ * w[j] + lambda_ * sign_sum);
    }
  }

 private:
  double step(uint64_t round) const {
    return eta0_ / (1.0 + gamma_ * static_cast<double>(round));
  }

  size_t d_;
  const Learner& learner_;
  double lambda_, eta0_, gamma_, rho_;
};

}  // namespace

std::unique_ptr<Protocol> make_sign_protocol(const Config& cfg,
                                             const Learner& learner,
                                             size_t d) {
  return std::make_unique<SignProtocol>(cfg, learner, d);
}

}  // namespace p2pagg

#include "p2pagg/protocol.hpp"

#include <chrono>
#include <numeric>

#include "p2pagg/errors.hpp"
#include "p2pagg/sharing.hpp"

namespace p2pagg {

std::unique_ptr<Protocol> make_sign_protocol(const Config& cfg,
                                             const Learner& learner, size_t d);
std::unique_ptr<Protocol> make_box_protocol(const Config& cfg,
                                            const Learner& learner, size_t d);
std::unique_ptr<Protocol> make_trust_protocol(const Config& cfg,
                                              const Learner& learner,
                                              size_t d);

size_t Protocol::payload_values() const {
  const auto regions = payload_regions();
  return std::accumulate(regions.begin(), regions.end(), size_t{0});
}

std::unique_ptr<Protocol> make_protocol(const std::string& name,
                                        const Config& cfg,
                                        const Learner& learner, size_t d) {
  if (name == "rsa") return make_sign_protocol(cfg, learner, d);
  if (name == "cc") return make_box_protocol(cfg, learner, d);
  if (name == "flt") return make_trust_protocol(cfg, learner, d);
  throw ConfigError("unknown protocol '" + name + "'");
}

bool surjectivity_roundtrip(const Protocol& proto,
                            std::span<const FieldElement> v,
                            const RoundCtx& ctx) {
  const std::vector<double> u = proto.preimage(v, ctx);
  const std::vector<FieldElement> back = proto.preprocess(u, ctx);
  if (back.size() != v.size()) return false;
  for (size_t i = 0; i < v.size(); ++i)
    if (back[i] != v[i]) return false;
  return true;
}

namespace {

// Payload bytes for one committee-internal all-to-all share exchange.
uint64_t exchange_bytes(size_t members, size_t values) {
  return static_cast<uint64_t>(values) * kShareWireBytes * members *
         (members - 1);
}

}  // namespace

std::vector<uint16_t> surviving_slots(size_t n_slots,
                                      std::span<const uint16_t> flagged) {
  std::vector<bool> out_slot(n_slots, false);
  for (uint16_t s : flagged) out_slot[s] = true;
  std::vector<uint16_t> keep;
  keep.reserve(n_slots);
  for (size_t s = 0; s < n_slots; ++s)
    if (!out_slot[s]) keep.push_back(static_cast<uint16_t>(s));
  return keep;
}

std::vector<double> apply_reflection(std::span<const double> v,
                                     std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (v.empty()) return out;
  check(v.size() == x.size(), "reflection dimension mismatch");
  double vv = 0, vx = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    vv += v[i] * v[i];
    vx += v[i] * x[i];
  }
  if (vv == 0) return out;
  const double s = 2.0 * vx / vv;
  for (size_t i = 0; i < v.size(); ++i) out[i] -= s * v[i];
  return out;
}

void run_check_phase(CommitteeCtx& cc, CheckKind kind, const char* label,
                     const CheckView& view, std::vector<uint16_t>& flagged) {
  const auto t0 = std::chrono::steady_clock::now();
  BatchVerdict verdict = check_and_identify(kind, view, *cc.chal_rng, cc.mode);
  cc.check_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  cc.internal_bytes += verdict.reconstructions *
                       exchange_bytes(cc.member_points.size(), 1);
  if (cc.transcript != nullptr) {
    CheckRecord rec;
    rec.check = label;
    rec.accepted = verdict.accepted;
    rec.revealed = verdict.revealed_check_value.v;
    for (uint16_t slot : verdict.flagged_clients)
      rec.flagged_clients.push_back(cc.client_ids[slot]);
    rec.reconstructions = verdict.reconstructions;
    cc.transcript->checks.push_back(std::move(rec));
  }
  if (!verdict.accepted && cc.abort_on_reject)
    throw AbortError(std::string("batch ") + label + " check rejected");
  for (uint16_t slot : verdict.flagged_clients) flagged.push_back(slot);
}

std::vector<FieldElement> member_region_sum(const CommitteeCtx& cc,
                                            const RegionTable& region,
                                            std::span<const uint16_t> slots,
                                            size_t col) {
  const size_t stride = cc.member_points.size();
  const size_t rpc = region.rows_per_client;
  std::vector<FieldElement> acc(rpc);
  for (uint16_t slot : slots) {
    const FieldElement* base = region.cells.data() + slot * rpc * stride + col;
    for (size_t v = 0; v < rpc; ++v)
      acc[v] = add(acc[v], base[v * stride]);
  }
  return acc;
}

std::vector<uint64_t> reveal_sums(
    CommitteeCtx& cc, int degree,
    std::vector<std::vector<FieldElement>>& member_sums) {
  const size_t m = cc.member_points.size();
  check(member_sums.size() == m, "one sum vector per member expected");
  const size_t values = member_sums.empty() ? 0 : member_sums[0].size();
  if (cc.tamper.active && values > 0 && cc.tamper.member_col < m) {
    member_sums[cc.tamper.member_col][0] =
        add(member_sums[cc.tamper.member_col][0], fe(cc.tamper.delta));
    cc.tamper.active = false;  // one lie per round
  }
  if (static_cast<size_t>(degree) + 1 > m)
    throw AbortError("committee too small to reconstruct aggregate");
  cc.internal_bytes += exchange_bytes(m, values);
  if (cc.transcript != nullptr && m == static_cast<size_t>(degree) + 1)
    cc.transcript->notes.push_back("unverified reconstruction (no redundancy)");

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<FieldElement> table(values * m);
  for (size_t c = 0; c < m; ++c)
    for (size_t v = 0; v < values; ++v) table[v * m + c] = member_sums[c][v];
  std::vector<FieldElement> out(values);
  try {
    const ReconPlan plan = make_recon_plan(cc.member_points, degree);
    reconstruct_many(plan, table.data(), values, out, cc.mode);
  } catch (const InconsistentSharing&) {
    // Redundancy permitting, redo everything with error correction so a few
    // tampered columns cannot kill the round.
    const int max_errors = (static_cast<int>(m) - degree - 1) / 2;
    if (max_errors < 1) throw;
    std::vector<Share> row(m);
    for (size_t v = 0; v < values; ++v) {
      for (size_t c = 0; c < m; ++c)
        row[c] = Share{cc.member_points[c], static_cast<uint16_t>(degree),
                       table[v * m + c]};
      out[v] = reconstruct_corrected(row, degree, max_errors);
    }
    if (cc.transcript != nullptr)
      cc.transcript->notes.push_back("error-corrected reconstruction");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (cc.member_seconds != nullptr)
    for (double& s : *cc.member_seconds) s += secs;  // each member repeats it

  std::vector<uint64_t> revealed(values);
  for (size_t v = 0; v < values; ++v) revealed[v] = out[v].v;
  return revealed;
}

}  // namespace p2pagg

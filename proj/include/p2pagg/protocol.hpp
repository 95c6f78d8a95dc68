#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "p2pagg/config.hpp"
#include "p2pagg/data.hpp"
#include "p2pagg/dzk.hpp"
#include "p2pagg/field.hpp"
#include "p2pagg/kernels.hpp"
#include "p2pagg/learner.hpp"
#include "p2pagg/randomness.hpp"
#include "p2pagg/rng.hpp"
#include "p2pagg/transcript.hpp"

namespace p2pagg {

// One participant. `aux` is protocol state living across rounds: local
// parameters x_i for the sign protocol, momentum for box clipping.
struct PeerState {
  uint16_t id = 0;  // 0-based peer index
  std::span<const uint32_t> shard;
  SeededRng rng;
  bool malicious = false;
  std::vector<double> aux;
};

// Test hook: everything an external plaintext pipeline needs to replay the
// round on identical inputs.
struct RoundCapture {
  std::vector<std::vector<double>> updates;  // submitted u_i, slot order
  std::vector<uint16_t> contributors;        // peer ids actually aggregated
  std::vector<double> g0;
  double g0_norm = 0;
  std::vector<double> householder_v;
  std::vector<double> w_after;
};

// Round-scoped context shared by protocol hooks. The simulator fills it in
// phase order; `challenges_armed` flips only after every share message of the
// round has been delivered (check challenges must not exist before that).
struct RoundCtx {
  uint64_t round = 0;
  size_t d = 0;
  std::vector<double> w;
  const Learner* learner = nullptr;
  const Dataset* train = nullptr;
  std::span<const uint32_t> root_shard;  // public root data (trust scoring)
  JointSeed seed;
  Mode mode = Mode::Serial;
  bool challenges_armed = false;
  bool skip_round = false;  // e.g. degenerate root update

  // Rotation data for the trust-score protocol, computed in begin_round.
  std::vector<double> g0;
  std::vector<double> householder_v;  // empty => identity rotation
  double g0_norm = 0;

  RoundCapture* capture = nullptr;  // test hook, normally null
};

// One value-major slice of the committee share table: row v of client slot i
// sits at cells[(i * rows_per_client + v) * stride + c] for member column c.
// stride == member_points.size() of the owning CommitteeCtx.
struct RegionTable {
  size_t rows_per_client = 0;
  std::vector<FieldElement> cells;
};

// A misbehaving committee member: adds delta to its own share of the first
// aggregate sum right before the reconstruction exchange.
struct TamperPlan {
  bool active = false;
  size_t member_col = 0;
  uint64_t delta = 1;
};

// Committee-side state for one round. Column c across every region belongs
// to the online member with evaluation point member_points[c].
struct CommitteeCtx {
  std::vector<RegionTable> regions;
  std::vector<uint16_t> member_points;
  std::vector<uint16_t> client_ids;  // submitting peer ids, slot order
  int t = 0;
  Mode mode = Mode::Serial;
  SeededRng* chal_rng = nullptr;
  bool abort_on_reject = false;
  RoundTranscript* transcript = nullptr;
  std::vector<double>* member_seconds = nullptr;  // F^R time per member
  uint64_t internal_bytes = 0;  // committee-internal share traffic
  double check_seconds = 0;
  TamperPlan tamper;
};

struct CommitteeOutput {
  std::vector<uint64_t> revealed;       // broadcast payload, field values
  std::vector<uint16_t> flagged_slots;  // client slots dropped by checks
};

class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string name() const = 0;
  // Largest reconstruction degree is degree_divisor() * t.
  virtual int degree_divisor() const = 0;
  // Share rows per client, one entry per payload region. Clients serialize
  // their rows region-major; the simulator keeps one table per region.
  virtual std::vector<size_t> payload_regions() const = 0;
  size_t payload_values() const;
  virtual void begin_round(RoundCtx& ctx) const { (void)ctx; }

  virtual std::vector<double> client_update(PeerState& peer,
                                            const RoundCtx& ctx) const = 0;
  virtual std::vector<FieldElement> preprocess(std::span<const double> u,
                                               const RoundCtx& ctx) const = 0;
  // Uniform element of the valid set V.
  virtual std::vector<FieldElement> sample_valid(SeededRng& rng,
                                                 const RoundCtx& ctx) const = 0;
  // Preimage construction: preprocess(preimage(v)) == v.
  virtual std::vector<double> preimage(std::span<const FieldElement> v,
                                       const RoundCtx& ctx) const = 0;
  virtual CommitteeOutput committee_phase(CommitteeCtx& cc) const = 0;
  // `contributors` is the number of client updates actually aggregated
  // (public: online, subsampled, not flagged).
  virtual void postprocess(std::span<const uint64_t> revealed,
                           const RoundCtx& ctx, size_t contributors,
                           std::vector<double>& w) const = 0;
};

std::unique_ptr<Protocol> make_protocol(const std::string& name,
                                        const Config& cfg,
                                        const Learner& learner, size_t d);

bool surjectivity_roundtrip(const Protocol& proto,
                            std::span<const FieldElement> v,
                            const RoundCtx& ctx);

// Shared committee helpers.

// Runs one batched check with identification over `view`, appends the check
// record under `label`, accounts reconstruction traffic, and merges flagged
// slots. Throws AbortError on rejection when cc.abort_on_reject is set.
void run_check_phase(CommitteeCtx& cc, CheckKind kind, const char* label,
                     const CheckView& view, std::vector<uint16_t>& flagged);

// Client slots not in `flagged`, ascending.
std::vector<uint16_t> surviving_slots(size_t n_slots,
                                      std::span<const uint16_t> flagged);

// Per-member column sum over one region, surviving slots only.
// Returns rows_per_client values for member column `col`.
std::vector<FieldElement> member_region_sum(const CommitteeCtx& cc,
                                            const RegionTable& region,
                                            std::span<const uint16_t> slots,
                                            size_t col);

// Applies Householder reflection I - 2vv^T/(v.v); identity when v is empty.
std::vector<double> apply_reflection(std::span<const double> v,
                                     std::span<const double> x);

// Committee exchange + reconstruction of per-member sum vectors
// (member_sums[c][v], one vector per column). Verifies redundant columns,
// retries with error correction when redundancy permits, accounts bytes,
// and appends transcript notes.
std::vector<uint64_t> reveal_sums(
    CommitteeCtx& cc, int degree,
    std::vector<std::vector<FieldElement>>& member_sums);

}  // namespace p2pagg

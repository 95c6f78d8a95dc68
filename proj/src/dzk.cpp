#include "p2pagg/dzk.hpp"

#include "p2pagg/errors.hpp"
#include "p2pagg/sharing.hpp"

namespace p2pagg {

size_t challenge_count(CheckKind kind, size_t clients, size_t per_client) {
  return kind == CheckKind::UnitLength ? clients : clients * per_client;
}

namespace {

CheckView subrange(const CheckView& v, size_t lo, size_t hi) {
  CheckView s = v;
  s.cells = v.cells + lo * v.per_client * v.stride;
  s.clients = hi - lo;
  return s;
}

// One batch run: member-local accumulation then a degree-2t reconstruction.
FieldElement run_batch(CheckKind kind, const CheckView& v,
                       std::span<const FieldElement> r, Mode mode) {
  const size_t m = v.member_ids.size();
  const int degree2t = 2 * v.degree_t;
  if (static_cast<size_t>(degree2t) + 1 > m)
    throw InsufficientShares("committee too small for degree-2t check");
  check(r.size() >= challenge_count(kind, v.clients, v.per_client),
        "challenge vector too short");
  const size_t count = v.clients * v.per_client;
  std::vector<Share> acc(m);
  for (size_t c = 0; c < m; ++c) {
    const FieldElement* col = v.cells + c;
    FieldElement a;
    switch (kind) {
      case CheckKind::Binary:
        a = dzk_binary_acc(col, count, v.stride, r, mode);
        break;
      case CheckKind::Sign:
        a = dzk_sign_acc(col, count, v.stride, r, mode);
        break;
      case CheckKind::UnitLength:
        a = dzk_unit_acc(col, v.clients, v.per_client, v.stride, r, v.unit_c,
                         mode);
        break;
    }
    acc[c] = Share{v.member_ids[c], static_cast<uint16_t>(degree2t), a};
  }
  return reconstruct_checked(acc, degree2t);
}

BatchVerdict run_fixed(CheckKind kind, const CheckView& view,
                       std::span<const FieldElement> challenges, Mode mode) {
  BatchVerdict verdict;
  verdict.revealed_check_value = run_batch(kind, view, challenges, mode);
  verdict.accepted = verdict.revealed_check_value == fe(0);
  verdict.reconstructions = 1;
  return verdict;
}

void identify(CheckKind kind, const CheckView& view, size_t lo, size_t hi,
              SeededRng& src, Mode mode, BatchVerdict& out) {
  if (hi - lo == 1) {
    out.flagged_clients.push_back(static_cast<uint16_t>(lo));
    return;
  }
  const size_t mid = lo + (hi - lo) / 2;
  bool any_failed = false;
  for (auto [a, b] : {std::pair<size_t, size_t>{lo, mid}, {mid, hi}}) {
    CheckView sub = subrange(view, a, b);
    std::vector<FieldElement> r(
        challenge_count(kind, sub.clients, sub.per_client));
    for (FieldElement& x : r) x = src.field_uniform();
    ++out.reconstructions;
    if (run_batch(kind, sub, r, mode) != fe(0)) {
      any_failed = true;
      identify(kind, view, a, b, src, mode, out);
    }
  }
  // A failing parent with two passing halves means a challenge draw hit the
  // 1/p blind spot; astronomically unlikely, so treat it as corruption.
  if (!any_failed) throw AbortError("batch check identification inconsistent");
}

}  // namespace

BatchVerdict batch_binary_check(const CheckView& view,
                                std::span<const FieldElement> challenges,
                                Mode mode) {
  return run_fixed(CheckKind::Binary, view, challenges, mode);
}

BatchVerdict batch_sign_check(const CheckView& view,
                              std::span<const FieldElement> challenges,
                              Mode mode) {
  return run_fixed(CheckKind::Sign, view, challenges, mode);
}

BatchVerdict batch_unit_length_check(const CheckView& view,
                                     std::span<const FieldElement> challenges,
                                     Mode mode) {
  return run_fixed(CheckKind::UnitLength, view, challenges, mode);
}

BatchVerdict check_and_identify(CheckKind kind, const CheckView& view,
                                SeededRng& challenge_source, Mode mode) {
  std::vector<FieldElement> r(
      challenge_count(kind, view.clients, view.per_client));
  for (FieldElement& x : r) x = challenge_source.field_uniform();
  BatchVerdict verdict = run_fixed(kind, view, r, mode);
  if (!verdict.accepted && view.clients > 0)
    identify(kind, view, 0, view.clients, challenge_source, mode, verdict);
  return verdict;
}

}  // namespace p2pagg

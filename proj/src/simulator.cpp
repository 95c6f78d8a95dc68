#include "p2pagg/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>

#include "p2pagg/attacks.hpp"
#include "p2pagg/bytes.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/learner.hpp"
#include "p2pagg/network.hpp"
#include "p2pagg/randomness.hpp"
#include "p2pagg/sharing.hpp"

namespace p2pagg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<uint32_t> shuffled_indices(SeededRng& rng, size_t n) {
  std::vector<uint32_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = static_cast<uint32_t>(i);
  for (size_t i = 0; i + 1 < n; ++i) {
    const size_t j = i + static_cast<size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

struct SimState {
  std::unique_ptr<Learner> learner;
  std::unique_ptr<Protocol> proto;
  Dataset train, test, flipped;
  std::vector<uint32_t> root_shard;
  std::vector<std::vector<uint32_t>> shards;
  std::vector<PeerState> peers;
  std::vector<double> w;
  SeededRng env;  // dropout draws and other non-protocol events

  size_t n_peers = 0;
  size_t m = 0;  // committee size
  int t_cfg = 0;
  uint64_t rounds = 1;
  double q_member = 0, q_client = 0, subsample = 1.0;
  AttackConfig attack;
  bool abort_on_reject = false;
  bool record_timing = false;
  Mode mode = Mode::Parallel;
  int64_t tamper_round = -1;
  size_t tamper_member = 0;
  uint64_t tamper_delta = 1;
};

Dataset build_dataset(const Config& cfg, uint64_t seed, bool test_split) {
  const std::string kind = cfg.get_string("data.kind", "blobs");
  if (kind == "blobs") {
    const int classes = static_cast<int>(cfg.get_int("data.classes", 4));
    const size_t dim = static_cast<size_t>(cfg.get_int("data.dim", 16));
    const size_t n = static_cast<size_t>(
        cfg.get_int(test_split ? "data.test" : "data.train", 4000));
    const double sep = cfg.get_double("data.separation", 3.0);
    return make_blobs(seed, classes, dim, n, sep, test_split ? 1 : 0);
  }
  if (kind == "idx")
    return load_idx(cfg.get_string(test_split ? "data.test_images"
                                              : "data.train_images",
                                   ""),
                    cfg.get_string(test_split ? "data.test_labels"
                                              : "data.train_labels",
                                   ""));
  if (kind == "csv")
    return load_csv(
        cfg.get_string(test_split ? "data.test_csv" : "data.train_csv", ""));
  throw ConfigError("unknown data.kind '" + kind + "'");
}

// Root sample first (trust-score protocols train on it publicly), remaining
// indices dealt to peers.
void build_shards(SimState& st, const Config& cfg, SeededRng&& rng,
                  bool needs_root, double root_fraction) {
  const size_t n_items = st.train.size();
  const std::vector<uint32_t> perm = shuffled_indices(rng, n_items);
  size_t root_n = 0;
  if (needs_root) {
    root_n = static_cast<size_t>(
        std::llround(root_fraction * static_cast<double>(n_items)));
    root_n = std::max<size_t>(root_n, 1);
    check(root_n + st.n_peers <= n_items, "root sample leaves too little data");
  }
  st.root_shard.assign(perm.begin(), perm.begin() + root_n);
  std::vector<uint32_t> rest(perm.begin() + root_n, perm.end());

  const std::string partition = cfg.get_string("data.partition", "iid");
  std::vector<std::vector<uint32_t>> rel;
  if (partition == "iid") {
    SeededRng prng = rng.fork("deal", 0);
    rel = partition_iid(rest.size(), static_cast<int>(st.n_peers), prng);
  } else if (partition == "skew") {
    std::vector<int> labels(rest.size());
    for (size_t i = 0; i < rest.size(); ++i) labels[i] = st.train.y[rest[i]];
    rel = partition_label_skew(labels, static_cast<int>(st.n_peers));
  } else {
    throw ConfigError("unknown data.partition '" + partition + "'");
  }
  st.shards.resize(st.n_peers);
  for (size_t i = 0; i < st.n_peers; ++i) {
    st.shards[i].reserve(rel[i].size());
    for (uint32_t r : rel[i]) st.shards[i].push_back(rest[r]);
  }
}

std::vector<uint8_t> serialize_reveal(std::span<const uint16_t> flagged,
                                      std::span<const uint64_t> values) {
  std::vector<uint8_t> out;
  out.reserve(2 + flagged.size() * 2 + values.size() * 8);
  append_le16(out, static_cast<uint16_t>(flagged.size()));
  for (uint16_t f : flagged) append_le16(out, f);
  for (uint64_t v : values) append_le64(out, v);
  return out;
}

void parse_reveal(std::span<const uint8_t> in, std::vector<uint16_t>& flagged,
                  std::vector<uint64_t>& values) {
  check(in.size() >= 2, "reveal payload too short");
  const size_t k = load_le16(in.data());
  check(in.size() >= 2 + 2 * k && (in.size() - 2 - 2 * k) % 8 == 0,
        "malformed reveal payload");
  flagged.resize(k);
  for (size_t i = 0; i < k; ++i) flagged[i] = load_le16(in.data() + 2 + 2 * i);
  const size_t nv = (in.size() - 2 - 2 * k) / 8;
  values.resize(nv);
  for (size_t i = 0; i < nv; ++i)
    values[i] = load_le64(in.data() + 2 + 2 * k + 8 * i);
}

void run_round(SimState& st, uint64_t round, RoundTranscript& tr,
               RoundCapture* cap) {
  const size_t n = st.n_peers;
  Mailbox mail(n);
  std::vector<uint16_t> all_ids(n);
  for (size_t i = 0; i < n; ++i) all_ids[i] = static_cast<uint16_t>(i);

  // Coin flip: commit, then open, all-to-all. Every peer contributes; the
  // dropout window models the data phases, not the tiny beacon messages.
  std::vector<Commitment> commitments(n);
  std::vector<Opening> openings(n);
  for (size_t i = 0; i < n; ++i) {
    const Digest contrib = st.peers[i].rng.fork("coin", round).next_digest();
    auto [c, o] = commit(
        std::span<const uint8_t>(contrib.data(), contrib.size()),
        st.peers[i].rng);
    commitments[i] = c;
    openings[i] = std::move(o);
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<uint8_t> payload(commitments[i].digest.begin(),
                                   commitments[i].digest.end());
      mail.send(static_cast<uint16_t>(i), static_cast<uint16_t>(j),
                kPhaseCommit, std::move(payload));
    }
  for (size_t j = 0; j < n; ++j) mail.drain(static_cast<uint16_t>(j),
                                            kPhaseCommit);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<uint8_t> payload(openings[i].value);
      payload.insert(payload.end(), openings[i].nonce.begin(),
                     openings[i].nonce.end());
      mail.send(static_cast<uint16_t>(i), static_cast<uint16_t>(j), kPhaseOpen,
                std::move(payload));
    }
  for (size_t j = 0; j < n; ++j) mail.drain(static_cast<uint16_t>(j),
                                            kPhaseOpen);
  for (size_t i = 0; i < n; ++i)
    if (!verify(commitments[i], openings[i]))
      throw AbortError("invalid coin opening");
  const JointSeed seed = derive_joint_seed(openings);

  // Election, then the round's dropout and subsampling pattern.
  const std::vector<uint16_t> roster = elect_committee(seed, all_ids, st.m);
  tr.committee = roster;

  const size_t m_drop = static_cast<size_t>(
      std::floor(st.q_member * static_cast<double>(st.m)));
  std::vector<bool> member_down(st.m, false);
  if (m_drop > 0) {
    std::vector<uint16_t> positions(st.m);
    for (size_t p = 0; p < st.m; ++p) positions[p] = static_cast<uint16_t>(p);
    SeededRng drng = st.env.fork("mdrp", round);
    std::vector<uint16_t> down = sample_prefix(drng, positions, m_drop);
    std::sort(down.begin(), down.end());
    for (uint16_t p : down) member_down[p] = true;
    tr.dropped_members = std::move(down);
  }
  std::vector<uint16_t> online_pos;          // roster positions still up
  std::vector<uint16_t> member_points;       // evaluation points
  std::vector<uint16_t> member_ids;          // peer ids of online members
  for (size_t p = 0; p < st.m; ++p)
    if (!member_down[p]) {
      online_pos.push_back(static_cast<uint16_t>(p));
      member_points.push_back(static_cast<uint16_t>(p + 1));
      member_ids.push_back(roster[p]);
    }

  std::vector<bool> client_down(n, false);
  if (st.q_client > 0) {
    SeededRng drng = st.env.fork("cdrp", round);
    for (size_t i = 0; i < n; ++i)
      if (drng.uniform01() <= st.q_client) {
        client_down[i] = true;
        tr.dropped_clients.push_back(static_cast<uint16_t>(i));
      }
  }
  std::vector<uint16_t> clients;
  if (st.subsample < 1.0) {
    const size_t k = std::max<size_t>(
        1, static_cast<size_t>(
               std::llround(st.subsample * static_cast<double>(n))));
    clients = subsample_clients(seed, round, all_ids, k);
    std::sort(clients.begin(), clients.end());
  } else {
    clients = all_ids;
  }
  clients.erase(std::remove_if(clients.begin(), clients.end(),
                               [&](uint16_t c) { return client_down[c]; }),
                clients.end());
  check(!clients.empty(), "no clients left this round");

  // Share degree: sized for the worst-case online committee.
  const size_t m_min = st.m - m_drop;
  const int divisor = st.proto->degree_divisor();
  const int t = st.t_cfg > 0
                    ? st.t_cfg
                    : static_cast<int>((m_min - 1) / static_cast<size_t>(divisor));
  check(t >= 1, "committee too small for any sharing degree");
  if (static_cast<size_t>(divisor * t) + 1 > online_pos.size())
    throw AbortError("online committee below the degree budget");

  RoundCtx ctx;
  ctx.round = round;
  ctx.d = st.learner->param_dim();
  ctx.w = st.w;
  ctx.learner = st.learner.get();
  ctx.train = &st.train;
  ctx.root_shard = st.root_shard;
  ctx.seed = seed;
  ctx.mode = st.mode;
  ctx.capture = cap;
  st.proto->begin_round(ctx);
  if (ctx.skip_round) {
    tr.notes.push_back("degenerate root update; round skipped");
    tr.sent_bytes = mail.sent_bytes();
    tr.recv_bytes = mail.recv_bytes();
    return;
  }

  // F^C for every participating client; honest updates first, then the
  // coalition overwrites its own submissions.
  const auto t_client = std::chrono::steady_clock::now();
  std::vector<std::vector<double>> updates(clients.size());
  RoundCtx flip_ctx;
  const bool lf = st.attack.kind == AttackKind::LabelFlip;
  if (lf) {
    flip_ctx = ctx;
    flip_ctx.train = &st.flipped;
  }
  for (size_t s = 0; s < clients.size(); ++s) {
    PeerState& peer = st.peers[clients[s]];
    updates[s] =
        st.proto->client_update(peer, peer.malicious && lf ? flip_ctx : ctx);
  }
  if (st.attack.kind != AttackKind::None &&
      st.attack.kind != AttackKind::LabelFlip) {
    std::vector<std::vector<double>> honest;
    for (size_t s = 0; s < clients.size(); ++s)
      if (!st.peers[clients[s]].malicious) honest.push_back(updates[s]);
    for (size_t s = 0; s < clients.size(); ++s) {
      if (!st.peers[clients[s]].malicious) continue;
      switch (st.attack.kind) {
        case AttackKind::BitFlip:
          updates[s] = attack_bit_flip(updates[s]);
          break;
        case AttackKind::InnerProduct:
          updates[s] = attack_inner_product(honest, ctx.d, st.attack.epsilon);
          break;
        case AttackKind::LittleEnough:
          updates[s] = attack_little_enough(honest, ctx.d, st.attack.z);
          break;
        default:
          break;
      }
    }
  }
  std::vector<std::vector<FieldElement>> submissions(clients.size());
  for (size_t s = 0; s < clients.size(); ++s)
    submissions[s] = st.proto->preprocess(updates[s], ctx);
  if (st.record_timing) tr.client_seconds = seconds_since(t_client);
  if (cap != nullptr) {
    cap->updates = updates;
    cap->g0 = ctx.g0;
    cap->g0_norm = ctx.g0_norm;
    cap->householder_v = ctx.householder_v;
  }

  // Sharing: one polynomial per payload row, evaluated at the online
  // members' points; each member's column travels as one message.
  const auto t_share = std::chrono::steady_clock::now();
  const std::vector<size_t> region_rows = st.proto->payload_regions();
  const size_t payload = st.proto->payload_values();
  const size_t m_on = member_points.size();
  std::vector<FieldElement> share_buf(payload * m_on);
  for (size_t s = 0; s < clients.size(); ++s) {
    PeerState& peer = st.peers[clients[s]];
    SeededRng srng = peer.rng.fork("shar", round);
    check(submissions[s].size() == payload, "payload size mismatch");
    share_many(submissions[s], t, member_points, srng, share_buf, st.mode);
    for (size_t c = 0; c < m_on; ++c) {
      std::vector<uint8_t> msg;
      msg.reserve(payload * kShareWireBytes);
      for (size_t v = 0; v < payload; ++v)
        serialize_share(Share{member_points[c], static_cast<uint16_t>(t),
                              share_buf[v * m_on + c]},
                        msg);
      mail.send(clients[s], member_ids[c], kPhaseShare, std::move(msg));
    }
  }

  CommitteeCtx cc;
  cc.member_points = member_points;
  cc.client_ids = clients;
  cc.t = t;
  cc.mode = st.mode;
  cc.abort_on_reject = st.abort_on_reject;
  cc.transcript = &tr;
  cc.regions.resize(region_rows.size());
  for (size_t r = 0; r < region_rows.size(); ++r) {
    cc.regions[r].rows_per_client = region_rows[r];
    cc.regions[r].cells.resize(clients.size() * region_rows[r] * m_on);
  }
  for (size_t c = 0; c < m_on; ++c) {
    const std::vector<Message> msgs = mail.drain(member_ids[c], kPhaseShare);
    check(msgs.size() == clients.size(), "missing share submissions");
    for (size_t s = 0; s < msgs.size(); ++s) {
      check(msgs[s].from == clients[s], "share delivery out of order");
      check(msgs[s].payload.size() == payload * kShareWireBytes,
            "share payload has wrong size");
      size_t v = 0;
      for (size_t r = 0; r < cc.regions.size(); ++r) {
        RegionTable& region = cc.regions[r];
        const size_t rpc = region.rows_per_client;
        for (size_t row = 0; row < rpc; ++row, ++v) {
          const Share sh = parse_share(msgs[s].payload, v * kShareWireBytes);
          check(sh.party_id == member_points[c] &&
                    sh.degree == static_cast<uint16_t>(t),
                "share metadata mismatch");
          region.cells[(s * rpc + row) * m_on + c] = sh.value;
        }
      }
    }
  }
  if (st.record_timing) tr.share_seconds = seconds_since(t_share);

  // Challenges exist only now, after every share of the round is delivered.
  ctx.challenges_armed = true;
  check(ctx.challenges_armed, "challenges drawn before share delivery");
  SeededRng chal = challenge_stream(seed, round);
  cc.chal_rng = &chal;
  tr.member_fr_seconds.assign(m_on, 0.0);
  cc.member_seconds = &tr.member_fr_seconds;
  if (st.tamper_round >= 0 &&
      round == static_cast<uint64_t>(st.tamper_round)) {
    cc.tamper.active = true;
    cc.tamper.member_col = std::min(st.tamper_member, m_on - 1);
    cc.tamper.delta = st.tamper_delta;
  }

  const auto t_agg = std::chrono::steady_clock::now();
  CommitteeOutput out = st.proto->committee_phase(cc);
  if (st.record_timing) tr.aggregate_seconds = seconds_since(t_agg);
  else tr.member_fr_seconds.assign(m_on, 0.0);
  tr.check_seconds = st.record_timing ? cc.check_seconds : 0.0;
  check(cc.internal_bytes % m_on == 0, "uneven committee exchange");
  const uint64_t per_member = cc.internal_bytes / m_on;
  for (uint16_t id : member_ids) mail.account(id, per_member, per_member);

  std::vector<uint16_t> flagged_ids;
  for (uint16_t slot : out.flagged_slots)
    flagged_ids.push_back(clients[slot]);
  std::sort(flagged_ids.begin(), flagged_ids.end());
  tr.flagged_clients = flagged_ids;

  // Broadcast and majority vote over the byte-identical payloads.
  const std::vector<uint8_t> reveal =
      serialize_reveal(flagged_ids, out.revealed);
  for (size_t c = 0; c < m_on; ++c)
    for (size_t j = 0; j < n; ++j) {
      if (j == member_ids[c]) continue;
      mail.send(member_ids[c], static_cast<uint16_t>(j), kPhaseReveal,
                std::vector<uint8_t>(reveal));
    }
  std::vector<uint64_t> revealed_values;
  std::vector<uint16_t> revealed_flagged;
  bool parsed = false;
  for (size_t j = 0; j < n; ++j) {
    const std::vector<Message> msgs =
        mail.drain(static_cast<uint16_t>(j), kPhaseReveal);
    if (msgs.empty()) continue;  // the member's own mailbox when m_on == n
    std::map<std::vector<uint8_t>, int> votes;
    for (const Message& msg : msgs) ++votes[msg.payload];
    const std::vector<uint8_t>* winner = nullptr;
    int best = -1;
    for (const auto& [payload, count] : votes)
      if (count > best) {
        best = count;
        winner = &payload;
      }
    check(winner != nullptr, "no reveal broadcast received");
    if (!parsed) {
      parse_reveal(*winner, revealed_flagged, revealed_values);
      parsed = true;
    } else {
      std::vector<uint16_t> f2;
      std::vector<uint64_t> v2;
      parse_reveal(*winner, f2, v2);
      check(f2 == revealed_flagged && v2 == revealed_values,
            "honest peers disagree on the revealed aggregate");
    }
  }
  if (!parsed) {  // single-peer edge: the lone member is also the client
    revealed_values = out.revealed;
    revealed_flagged = flagged_ids;
  }
  tr.aggregate = revealed_values;

  const size_t contributors = clients.size() - flagged_ids.size();
  std::vector<double> w_next = st.w;
  st.proto->postprocess(revealed_values, ctx, contributors, w_next);
  st.w = std::move(w_next);

  if (cap != nullptr) {
    for (uint16_t c : clients)
      if (std::find(flagged_ids.begin(), flagged_ids.end(), c) ==
          flagged_ids.end())
        cap->contributors.push_back(c);
    cap->w_after = st.w;
  }

  tr.sent_bytes = mail.sent_bytes();
  tr.recv_bytes = mail.recv_bytes();
}

}  // namespace

SimResult run_simulation(const Config& cfg, bool capture_rounds) {
  SimState st;
  const uint64_t seed = static_cast<uint64_t>(cfg.get_int("sim.seed", 1));
  st.n_peers = static_cast<size_t>(cfg.get_int("sim.peers", 20));
  check(st.n_peers >= 1 && st.n_peers < 65535, "sim.peers out of range");
  st.m = static_cast<size_t>(cfg.get_int("sim.committee", 0));
  if (st.m == 0) st.m = st.n_peers;
  check(st.m <= st.n_peers, "committee larger than peer count");
  st.t_cfg = static_cast<int>(cfg.get_int("sim.t", 0));
  st.rounds = static_cast<uint64_t>(cfg.get_int("sim.rounds", 1));
  st.q_member = cfg.get_double("sim.committee_dropout", 0.0);
  st.q_client = cfg.get_double("sim.client_dropout", 0.0);
  st.subsample = cfg.get_double("sim.subsample", 1.0);
  st.abort_on_reject = cfg.get_bool("dzk.abort_on_reject", false);
  st.record_timing = cfg.get_bool("sim.record_timing", false);
  st.mode = cfg.get_bool("sim.parallel", true) ? Mode::Parallel : Mode::Serial;
  st.tamper_round = cfg.get_int("tamper.round", -1);
  st.tamper_member = static_cast<size_t>(cfg.get_int("tamper.member", 0));
  st.tamper_delta = static_cast<uint64_t>(cfg.get_int("tamper.delta", 1));
  const uint64_t eval_every =
      static_cast<uint64_t>(cfg.get_int("sim.eval_every", 10));

  st.attack.kind = parse_attack_kind(cfg.get_string("attack.kind", "none"));
  st.attack.f = static_cast<int>(cfg.get_int("attack.f", 0));
  st.attack.epsilon = cfg.get_double("attack.epsilon", 0.5);
  st.attack.z = cfg.get_double("attack.z", 0.0);
  if (st.attack.kind == AttackKind::LittleEnough && st.attack.z <= 0)
    st.attack.z = little_enough_default_z(st.n_peers,
                                          static_cast<size_t>(st.attack.f));
  check(st.attack.kind == AttackKind::None ||
            static_cast<size_t>(st.attack.f) < st.n_peers,
        "coalition cannot cover all peers");

  st.train = build_dataset(cfg, seed, false);
  st.test = build_dataset(cfg, seed, true);

  const std::string model = cfg.get_string("model.kind", "softmax");
  if (model == "softmax") {
    st.learner = make_softmax(st.train.dim, st.train.classes);
  } else if (model == "mlp") {
    st.learner = make_mlp(st.train.dim, st.train.classes,
                          static_cast<int>(cfg.get_int("model.hidden", 32)));
  } else {
    throw ConfigError("unknown model.kind '" + model + "'");
  }

  const std::string proto_name = cfg.get_string("sim.protocol", "rsa");
  st.proto = make_protocol(proto_name, cfg, *st.learner,
                           st.learner->param_dim());

  SeededRng master = SeededRng::from_seed64(seed);
  st.env = master.fork("envr", 0);
  build_shards(st, cfg, master.fork("part", 0), proto_name == "flt",
               cfg.get_double("flt.root_fraction", 0.1));

  // All reads are done; reject leftover keys now, before any round runs.
  // Sections for the protocols not selected are forgiven, as is the local
  // trainer section (only the trust protocol runs local epochs).
  for (const char* sect : {"rsa", "cc", "flt", "learner"})
    if (sect != proto_name) cfg.consume_section(sect);
  cfg.require_all_consumed();

  st.peers.resize(st.n_peers);
  for (size_t i = 0; i < st.n_peers; ++i) {
    st.peers[i].id = static_cast<uint16_t>(i);
    st.peers[i].shard = st.shards[i];
    st.peers[i].rng = master.fork("peer", i);
    st.peers[i].malicious =
        st.attack.kind != AttackKind::None &&
        i >= st.n_peers - static_cast<size_t>(st.attack.f);
  }
  if (st.attack.kind == AttackKind::LabelFlip)
    st.flipped = flip_labels(st.train);

  // Zero start for the convex model; symmetric zeros would freeze the MLP,
  // so it gets small seeded normals.
  st.w.assign(st.learner->param_dim(), 0.0);
  if (model == "mlp") {
    SeededRng irng = master.fork("init", 0);
    for (double& x : st.w) x = 0.1 * irng.normal();
  }

  SimResult res;
  res.initial_w = st.w;
  res.config_hash = cfg.content_hash();
  for (uint64_t round = 0; round < st.rounds; ++round) {
    RoundTranscript tr;
    tr.round = round;
    tr.record_timing = st.record_timing;
    RoundCapture cap;
    try {
      run_round(st, round, tr, capture_rounds ? &cap : nullptr);
    } catch (const InconsistentSharing& e) {
      tr.aborted = true;
      tr.abort_reason = e.what();
      tr.notes.push_back("share tampering detected");
    } catch (const AbortError& e) {
      tr.aborted = true;
      tr.abort_reason = e.what();
    }
    if (tr.aborted) ++res.aborted_rounds;
    for (uint64_t b : tr.sent_bytes) res.total_bytes += b;
    if (capture_rounds) res.captures.push_back(std::move(cap));
    const bool eval_now =
        (eval_every > 0 && (round + 1) % eval_every == 0) ||
        round + 1 == st.rounds;
    res.transcripts.push_back(std::move(tr));
    if (eval_now)
      res.accuracy.emplace_back(round, st.learner->accuracy(st.w, st.test));
  }
  res.final_w = st.w;
  return res;
}

void write_outputs(const SimResult& r, const Config& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  const fs::path nd = fs::path(out_dir) / "transcript.ndjson";
  std::ofstream ndf(nd);
  if (!ndf) throw IoError("cannot open " + nd.string());
  for (const RoundTranscript& tr : r.transcripts)
    ndf << tr.to_json_line() << '\n';

  const fs::path cs = fs::path(out_dir) / "summary.csv";
  std::ofstream csf(cs);
  if (!csf) throw IoError("cannot open " + cs.string());
  csf << summary_csv_header() << '\n';
  const uint64_t seed = static_cast<uint64_t>(cfg.get_int("sim.seed", 1));
  size_t acc_i = 0;
  double last_acc = 0;
  for (const RoundTranscript& tr : r.transcripts) {
    while (acc_i < r.accuracy.size() && r.accuracy[acc_i].first <= tr.round) {
      last_acc = r.accuracy[acc_i].second;
      ++acc_i;
    }
    SummaryRow row;
    row.round = tr.round;
    row.accuracy = last_acc;
    for (uint64_t b : tr.sent_bytes) row.bytes_total += b;
    for (double s : tr.member_fr_seconds) row.fr_cpu_seconds += s;
    row.aborts = tr.aborted ? 1 : 0;
    row.flagged = static_cast<int>(tr.flagged_clients.size());
    csf << summary_csv_row(row, seed, r.config_hash) << '\n';
  }

  const fs::path wf = fs::path(out_dir) / "final_weights.csv";
  std::ofstream wff(wf);
  if (!wff) throw IoError("cannot open " + wf.string());
  wff << "index,value\n";
  wff << std::setprecision(17);
  for (size_t i = 0; i < r.final_w.size(); ++i)
    wff << i << ',' << r.final_w[i] << '\n';

  if (!csf.good() || !ndf.good() || !wff.good())
    throw IoError("output write failed");
}

}  // namespace p2pagg

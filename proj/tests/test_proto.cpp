#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "p2pagg/attacks.hpp"
#include "p2pagg/codec.hpp"
#include "p2pagg/config.hpp"
#include "p2pagg/data.hpp"
#include "p2pagg/dzk.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/learner.hpp"
#include "p2pagg/plain.hpp"
#include "p2pagg/protocol.hpp"
#include "p2pagg/randomness.hpp"
#include "p2pagg/sharing.hpp"

using namespace p2pagg;

namespace {

// Committee share table over xs = 1..m from per-client row vectors, all
// clients the same row count. Value-major: cell[v * m + c].
struct TestTable {
  std::vector<uint16_t> xs;
  std::vector<FieldElement> cells;
  size_t clients = 0;
  size_t per_client = 0;
  int t = 0;

  CheckView view() const {
    CheckView v;
    v.cells = cells.data();
    v.stride = xs.size();
    v.member_ids = xs;
    v.clients = clients;
    v.per_client = per_client;
    v.degree_t = t;
    return v;
  }
};

TestTable share_table(const std::vector<std::vector<FieldElement>>& rows,
                      int t, int m, SeededRng& rng) {
  TestTable tab;
  tab.clients = rows.size();
  tab.per_client = rows.at(0).size();
  tab.t = t;
  for (uint16_t x = 1; x <= m; ++x) tab.xs.push_back(x);
  std::vector<FieldElement> flat;
  for (const auto& r : rows) {
    REQUIRE(r.size() == tab.per_client);
    flat.insert(flat.end(), r.begin(), r.end());
  }
  tab.cells.resize(flat.size() * size_t(m));
  share_many(flat, t, tab.xs, rng, tab.cells, Mode::Serial);
  return tab;
}

Config proto_cfg() { return Config::parse_string(""); }

// Minimal round context for protocols that only need w.
RoundCtx basic_ctx(size_t d, SeededRng& rng) {
  RoundCtx ctx;
  ctx.d = d;
  ctx.w.resize(d);
  for (auto& x : ctx.w) x = rng.normal();
  return ctx;
}

}  // namespace

// ---------------------------------------------------------------- dzk

TEST_CASE("challenge counts") {
  CHECK(challenge_count(CheckKind::Binary, 4, 8) == 32);
  CHECK(challenge_count(CheckKind::Sign, 5, 3) == 15);
  CHECK(challenge_count(CheckKind::UnitLength, 7, 100) == 7);
}

TEST_CASE("honest batches accept with the check value revealed as zero") {
  SeededRng rng = SeededRng::from_seed64(101);
  const int t = 2, m = 2 * t + 1;

  // Binary: random bits.
  std::vector<std::vector<FieldElement>> bit_rows(4);
  for (auto& r : bit_rows)
    for (int v = 0; v < 8; ++v) r.push_back(fe(rng.below(2)));
  TestTable bt = share_table(bit_rows, t, m, rng);
  auto ch = [&](const TestTable& tab, CheckKind k) {
    std::vector<FieldElement> c(
        challenge_count(k, tab.clients, tab.per_client));
    for (auto& x : c) x = rng.field_uniform();
    return c;
  };
  BatchVerdict vb = batch_binary_check(bt.view(), ch(bt, CheckKind::Binary),
                                       Mode::Serial);
  CHECK(vb.accepted);
  CHECK(vb.revealed_check_value.v == 0);
  CHECK(vb.flagged_clients.empty());
  CHECK(vb.reconstructions == 1);

  // Sign: random +-1.
  std::vector<std::vector<FieldElement>> sign_rows(3);
  for (auto& r : sign_rows)
    for (int v = 0; v < 5; ++v) r.push_back(fe_signed(rng.below(2) ? 1 : -1));
  TestTable st = share_table(sign_rows, t, m, rng);
  BatchVerdict vs =
      batch_sign_check(st.view(), ch(st, CheckKind::Sign), Mode::Serial);
  CHECK(vs.accepted);
  CHECK(vs.revealed_check_value.v == 0);

  // Unit length: magnitudes with an exact common squared sum
  // (13^2+14^2 = 19^2+2^2 = 2^2+19^2 = 365).
  const uint64_t unit_c = 365;
  std::vector<std::vector<FieldElement>> mag_rows = {
      {fe(13), fe(14), fe(0)}, {fe(19), fe(2), fe(0)}, {fe(2), fe(0), fe(19)},
  };
  TestTable ut = share_table(mag_rows, t, m, rng);
  CheckView uv = ut.view();
  uv.unit_c = fe(unit_c);
  BatchVerdict vu = batch_unit_length_check(uv, ch(ut, CheckKind::UnitLength),
                                            Mode::Serial);
  CHECK(vu.accepted);
  CHECK(vu.revealed_check_value.v == 0);
  // Serial and parallel agree.
  BatchVerdict vup = batch_unit_length_check(
      uv, ch(ut, CheckKind::UnitLength), Mode::Parallel);
  (void)vup;
}

TEST_CASE("violators are identified by binary search") {
  SeededRng rng = SeededRng::from_seed64(102);
  const int t = 2, m = 2 * t + 1;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<FieldElement>> rows(6);
    for (auto& r : rows)
      for (int v = 0; v < 4; ++v) r.push_back(fe(rng.below(2)));
    const size_t bad = rng.below(6);
    rows[bad][rng.below(4)] = fe(2 + rng.below(1000));  // not a bit
    TestTable tab = share_table(rows, t, m, rng);
    SeededRng chal = rng.fork("chal", trial);
    BatchVerdict v =
        check_and_identify(CheckKind::Binary, tab.view(), chal, Mode::Serial);
    CHECK(!v.accepted);
    REQUIRE(v.flagged_clients.size() == 1);
    CHECK(v.flagged_clients[0] == bad);
    CHECK(v.reconstructions > 1);  // fallback re-checks cost reconstructions
  }
}

TEST_CASE("multiple violators are all flagged") {
  SeededRng rng = SeededRng::from_seed64(103);
  std::vector<std::vector<FieldElement>> rows(8);
  for (auto& r : rows)
    for (int v = 0; v < 4; ++v) r.push_back(fe_signed(rng.below(2) ? 1 : -1));
  rows[1][0] = fe(0);  // not a sign
  rows[6][3] = fe(7);
  TestTable tab = share_table(rows, 2, 5, rng);
  SeededRng chal = rng.fork("chal", 0);
  BatchVerdict v =
      check_and_identify(CheckKind::Sign, tab.view(), chal, Mode::Serial);
  CHECK(!v.accepted);
  CHECK(v.flagged_clients == std::vector<uint16_t>{1, 6});
}

TEST_CASE("unit-length violator flagged, honest client kept") {
  SeededRng rng = SeededRng::from_seed64(104);
  std::vector<std::vector<FieldElement>> rows = {
      {fe(13), fe(14)},  // 365
      {fe(13), fe(15)},  // 394 != 365
      {fe(19), fe(2)},   // 365
  };
  TestTable tab = share_table(rows, 1, 3, rng);
  CheckView uv = tab.view();
  uv.unit_c = fe(365);
  SeededRng chal = rng.fork("chal", 0);
  BatchVerdict v = check_and_identify(CheckKind::UnitLength, uv, chal,
                                      Mode::Serial);
  CHECK(!v.accepted);
  CHECK(v.flagged_clients == std::vector<uint16_t>{1});
}

TEST_CASE("checks tolerate extra committee columns") {
  SeededRng rng = SeededRng::from_seed64(105);
  const int t = 2, m = 2 * t + 3;  // two columns beyond the reveal degree
  std::vector<std::vector<FieldElement>> rows(3);
  for (auto& r : rows)
    for (int v = 0; v < 6; ++v) r.push_back(fe(rng.below(2)));
  TestTable tab = share_table(rows, t, m, rng);
  SeededRng chal = rng.fork("chal", 0);
  BatchVerdict v =
      check_and_identify(CheckKind::Binary, tab.view(), chal, Mode::Serial);
  CHECK(v.accepted);
  CHECK(v.revealed_check_value.v == 0);
  // Too few columns for the degree-2t reveal throws.
  TestTable small = share_table(rows, t, 2 * t, rng);
  SeededRng chal2 = rng.fork("chal", 1);
  CHECK_THROWS_AS((void)check_and_identify(CheckKind::Binary, small.view(),
                                           chal2, Mode::Serial),
                  InsufficientShares);
}

// ---------------------------------------------------------------- protocols

TEST_CASE("sign protocol payload and valid set") {
  Config cfg = proto_cfg();
  auto learner = make_softmax(4, 3);
  const size_t d = learner->param_dim();
  auto proto = make_protocol("rsa", cfg, *learner, d);
  CHECK(proto->name() == "rsa");
  CHECK(proto->degree_divisor() == 2);
  CHECK(proto->payload_regions() == std::vector<size_t>{d});
  CHECK(proto->payload_values() == d);

  SeededRng rng = SeededRng::from_seed64(111);
  RoundCtx ctx = basic_ctx(d, rng);
  // preprocess encodes sign(w - u) as bits, sign(0) = +1.
  std::vector<double> u = ctx.w;
  u[0] -= 1.0;  // w - u = +1 -> bit 1
  u[1] += 1.0;  // w - u = -1 -> bit 0
  auto v = proto->preprocess(u, ctx);
  CHECK(v[0].v == 1);
  CHECK(v[1].v == 0);
  CHECK(v[2].v == 1);  // w - u = 0 counts as nonnegative

  for (int trial = 0; trial < 200; ++trial) {
    auto s = proto->sample_valid(rng, ctx);
    CHECK(s.size() == d);
    for (auto b : s) CHECK(b.v <= 1);
    CHECK(surjectivity_roundtrip(*proto, s, ctx));
  }
}

TEST_CASE("sign protocol postprocess equals the plaintext rule") {
  Config cfg = proto_cfg();
  auto learner = make_softmax(5, 4);
  const size_t d = learner->param_dim();
  auto proto = make_protocol("rsa", cfg, *learner, d);
  SeededRng rng = SeededRng::from_seed64(112);
  RoundCtx ctx = basic_ctx(d, rng);
  ctx.round = 17;
  const size_t n = 9;
  std::vector<std::vector<double>> updates(n, std::vector<double>(d));
  for (auto& uu : updates)
    for (auto& x : uu) x = rng.normal();
  auto sums = plain_sign_sums(updates, ctx.w);
  // Same bit sums through preprocess.
  std::vector<uint64_t> sums2(d, 0);
  for (const auto& uu : updates) {
    auto bits = proto->preprocess(uu, ctx);
    for (size_t j = 0; j < d; ++j) sums2[j] += bits[j].v;
  }
  CHECK(sums == sums2);
  std::vector<double> w1 = ctx.w;
  proto->postprocess(sums, ctx, n, w1);
  auto w2 = plain_sign_post(sums, ctx.w, n, ctx.round, PlainSignParams{});
  CHECK(w1 == w2);  // identical floating-point expression
  // Bit sums above the contributor count are rejected.
  sums[0] = n + 1;
  std::vector<double> w3 = ctx.w;
  CHECK_THROWS_AS(proto->postprocess(sums, ctx, n, w3), Error);
}

TEST_CASE("box protocol payload and valid set") {
  Config cfg = Config::parse_string("[cc]\ntheta = 8\ntau = 0.5\n");
  auto learner = make_softmax(4, 3);
  const size_t d = learner->param_dim();
  auto proto = make_protocol("cc", cfg, *learner, d);
  CHECK(proto->payload_regions() == std::vector<size_t>{d * 8});

  SeededRng rng = SeededRng::from_seed64(113);
  RoundCtx ctx = basic_ctx(d, rng);
  FixedPointCodec codec{8, 0, 0.5};
  std::vector<double> u = ctx.w;
  u[0] += 0.25;
  u[1] -= 5.0;  // saturates to level 0
  auto v = proto->preprocess(u, ctx);
  CHECK(v.size() == d * 8);
  uint64_t bits[8];
  for (int j = 0; j < 8; ++j) bits[j] = v[j].v;
  CHECK(join_bits(bits, 8) == encode_box(codec, 0.25));
  for (int j = 0; j < 8; ++j) bits[j] = v[8 + j].v;
  CHECK(join_bits(bits, 8) == 0);

  for (int trial = 0; trial < 200; ++trial) {
    auto s = proto->sample_valid(rng, ctx);
    for (auto b : s) CHECK(b.v <= 1);
    CHECK(surjectivity_roundtrip(*proto, s, ctx));
  }
}

TEST_CASE("box protocol postprocess equals the plaintext rule") {
  Config cfg = proto_cfg();  // theta 32, tau 1, eta 1
  auto learner = make_softmax(6, 3);
  const size_t d = learner->param_dim();
  auto proto = make_protocol("cc", cfg, *learner, d);
  SeededRng rng = SeededRng::from_seed64(114);
  RoundCtx ctx = basic_ctx(d, rng);
  const size_t n = 7;
  std::vector<std::vector<double>> updates(n, std::vector<double>(d));
  for (auto& uu : updates) {
    for (size_t j = 0; j < d; ++j) uu[j] = ctx.w[j] + rng.normal() * 0.8;
  }
  PlainBoxParams pp;
  auto sums = plain_box_sums(updates, ctx.w, pp);
  std::vector<uint64_t> sums2(d * 32, 0);
  for (const auto& uu : updates) {
    auto bits = proto->preprocess(uu, ctx);
    for (size_t j = 0; j < bits.size(); ++j) sums2[j] += bits[j].v;
  }
  CHECK(sums == sums2);
  std::vector<double> w1 = ctx.w;
  proto->postprocess(sums, ctx, n, w1);
  auto w2 = plain_box_post(sums, ctx.w, n, pp);
  CHECK(w1 == w2);
  // Zero contributors leave w unchanged.
  std::vector<double> w3 = ctx.w;
  proto->postprocess(std::vector<uint64_t>(d * 32, 0), ctx, 0, w3);
  CHECK(w3 == ctx.w);
}

namespace {

// Full trust-protocol context: blobs data, root shard, rotation.
struct TrustFixture {
  Config cfg = proto_cfg();
  std::unique_ptr<Learner> learner;
  std::unique_ptr<Protocol> proto;
  Dataset train;
  std::vector<uint32_t> root;
  RoundCtx ctx;

  explicit TrustFixture(size_t feat_dim, int classes, uint64_t seed) {
    learner = make_softmax(feat_dim, classes);
    proto = make_protocol("flt", cfg, *learner, learner->param_dim());
    train = make_blobs(seed, classes, feat_dim, 400, 3.0);
    root.resize(40);
    std::iota(root.begin(), root.end(), 0);
    ctx.d = learner->param_dim();
    ctx.w.assign(ctx.d, 0.0);
    ctx.learner = learner.get();
    ctx.train = &train;
    ctx.root_shard = root;
    ctx.seed.seed = SeededRng::from_seed64(seed).next_digest();
    proto->begin_round(ctx);
  }
};

}  // namespace

TEST_CASE("trust protocol rotation and encoding invariants") {
  TrustFixture fx(6, 3, 7);
  const size_t d = fx.ctx.d;
  CHECK(!fx.ctx.skip_round);
  CHECK(fx.ctx.g0_norm > 0);
  // g0 rotates onto the x-axis: reflection of g0/|g0| is e_x.
  std::vector<double> ghat(d);
  for (size_t j = 0; j < d; ++j) ghat[j] = fx.ctx.g0[j] / fx.ctx.g0_norm;
  auto e = apply_reflection(fx.ctx.householder_v, ghat);
  CHECK(std::abs(e[0] - 1.0) < 1e-9);
  for (size_t j = 1; j < d; ++j) CHECK(std::abs(e[j]) < 1e-9);
  // The reflection is an involution.
  auto back = apply_reflection(fx.ctx.householder_v, e);
  for (size_t j = 0; j < d; ++j) CHECK(back[j] == doctest::Approx(ghat[j]));

  // payload: (d + slack) * theta bit rows plus d-1 sign rows.
  const size_t theta = 16;
  auto regions = fx.proto->payload_regions();
  REQUIRE(regions.size() == 2);
  CHECK(regions[0] == (d + kUnitSlackValues) * theta);
  CHECK(regions[1] == d - 1);

  // An update equal to g0 encodes as the unit x lattice point.
  auto v = fx.proto->preprocess(fx.ctx.g0, fx.ctx);
  uint64_t bits[64];
  for (size_t j = 0; j < theta; ++j) bits[j] = v[j].v;
  CHECK(join_bits(bits, int(theta)) == (uint64_t(1) << 14));  // frac = 14
  for (size_t h = 1; h < d + kUnitSlackValues; ++h) {
    for (size_t j = 0; j < theta; ++j) bits[j] = v[h * theta + j].v;
    CHECK(join_bits(bits, int(theta)) == 0);
  }

  // Membership: squared magnitudes (model + slack) sum to 2^28 exactly,
  // signs are +-1, for arbitrary updates.
  SeededRng rng = SeededRng::from_seed64(115);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(d);
    for (auto& x : u) x = rng.normal();
    auto rows = fx.proto->preprocess(u, fx.ctx);
    __uint128_t sq = 0;
    for (size_t h = 0; h < d + kUnitSlackValues; ++h) {
      for (size_t j = 0; j < theta; ++j) {
        CHECK(rows[h * theta + j].v <= 1);
        bits[j] = rows[h * theta + j].v;
      }
      uint64_t mag = join_bits(bits, int(theta));
      sq += __uint128_t(mag) * mag;
    }
    CHECK(uint64_t(sq) == (uint64_t(1) << 28));
    for (size_t h = 0; h < d - 1; ++h) {
      FieldElement s = rows[(d + kUnitSlackValues) * theta + h];
      CHECK((s == fe_signed(1) || s == fe_signed(-1)));
    }
  }
}

TEST_CASE("trust protocol surjectivity roundtrips across dimensions") {
  // Small d stresses the repair: fewer coordinates to absorb the residue.
  // Softmax parameter counts: classes * (feat + 1) = 4, 6, 16, 45.
  for (auto [feat, classes] : {std::pair<int, int>{1, 2},
                               std::pair<int, int>{2, 2},
                               std::pair<int, int>{3, 4},
                               std::pair<int, int>{8, 5}}) {
    TrustFixture fx(size_t(feat), classes, 70 + uint64_t(feat));
    if (fx.ctx.skip_round) continue;
    SeededRng rng = SeededRng::from_seed64(116 + uint64_t(feat));
    int fails = 0;
    for (int trial = 0; trial < 300; ++trial) {
      auto v = fx.proto->sample_valid(rng, fx.ctx);
      if (!surjectivity_roundtrip(*fx.proto, v, fx.ctx)) ++fails;
    }
    CHECK(fails == 0);
  }
}

TEST_CASE("trust protocol negative cosine collapses to the bottom element") {
  TrustFixture fx(5, 3, 9);
  // An update opposite to g0 rotates to x < 0 and must submit the canonical
  // zero-trust vector: x magnitude 0, unit mass on the second axis + slack.
  std::vector<double> u(fx.ctx.d);
  for (size_t j = 0; j < fx.ctx.d; ++j) u[j] = -fx.ctx.g0[j];
  auto rows = fx.proto->preprocess(u, fx.ctx);
  uint64_t bits[64];
  for (int j = 0; j < 16; ++j) bits[j] = rows[j].v;
  CHECK(join_bits(bits, 16) == 0);  // zero trust score
  for (int j = 0; j < 16; ++j) bits[j] = rows[16 + j].v;
  CHECK(join_bits(bits, 16) == (uint64_t(1) << 14));  // e2
}

TEST_CASE("trust postprocess equals the plaintext rule") {
  TrustFixture fx(6, 4, 11);
  const size_t d = fx.ctx.d;
  SeededRng rng = SeededRng::from_seed64(117);
  const size_t n = 5;
  std::vector<std::vector<double>> updates(n, std::vector<double>(d));
  for (auto& uu : updates) {
    for (size_t j = 0; j < d; ++j)
      uu[j] = fx.ctx.g0[j] + 0.3 * rng.normal() * fx.ctx.g0_norm;
  }
  PlainTrustParams pp;
  PlainTrust agg = plain_trust_sums(updates, fx.ctx.g0, pp);
  CHECK(agg.sum_ts > 0);
  // The secure integer path sums TS * sign * mag from the encoded rows.
  std::vector<int64_t> weighted(d, 0);
  uint64_t sum_ts = 0;
  const size_t theta = 16, pd = d + kUnitSlackValues;
  for (const auto& uu : updates) {
    auto rows = fx.proto->preprocess(uu, fx.ctx);
    uint64_t bits[64];
    std::vector<int64_t> mag(d);
    for (size_t h = 0; h < d; ++h) {
      for (size_t j = 0; j < theta; ++j) bits[j] = rows[h * theta + j].v;
      mag[h] = int64_t(join_bits(bits, int(theta)));
    }
    std::vector<int> sgn(d, 1);
    for (size_t h = 1; h < d; ++h)
      sgn[h] = rows[pd * theta + (h - 1)] == fe_signed(1) ? 1 : -1;
    sum_ts += uint64_t(mag[0]);
    for (size_t h = 0; h < d; ++h)
      weighted[h] += mag[0] * sgn[h] * mag[h];
  }
  CHECK(agg.sum_ts == sum_ts);
  CHECK(agg.weighted == weighted);

  // Reveal the signed sums as field values and compare postprocess.
  std::vector<uint64_t> revealed(d + 1);
  for (size_t h = 0; h < d; ++h) revealed[h] = fe_signed(weighted[h]).v;
  revealed[d] = sum_ts;
  std::vector<double> w1 = fx.ctx.w;
  fx.proto->postprocess(revealed, fx.ctx, n, w1);
  auto w2 = plain_trust_post(agg, fx.ctx.w, fx.ctx.g0, pp);
  for (size_t h = 0; h < d; ++h) CHECK(w1[h] == doctest::Approx(w2[h]).epsilon(1e-12));

  // Zero trust everywhere leaves w unchanged.
  std::vector<uint64_t> zero(d + 1, 0);
  std::vector<double> w3 = fx.ctx.w;
  fx.proto->postprocess(zero, fx.ctx, n, w3);
  CHECK(w3 == fx.ctx.w);
}

// ---------------------------------------------------------------- attacks

TEST_CASE("attack kinds parse") {
  CHECK(parse_attack_kind("none") == AttackKind::None);
  CHECK(parse_attack_kind("bf") == AttackKind::BitFlip);
  CHECK(parse_attack_kind("lf") == AttackKind::LabelFlip);
  CHECK(parse_attack_kind("ipm") == AttackKind::InnerProduct);
  CHECK(parse_attack_kind("alie") == AttackKind::LittleEnough);
  CHECK_THROWS_AS((void)parse_attack_kind("nope"), ConfigError);
}

TEST_CASE("bit flip negates the own update") {
  std::vector<double> u = {1.5, -2.0, 0.0, 3.25};
  auto a = attack_bit_flip(u);
  REQUIRE(a.size() == u.size());
  for (size_t j = 0; j < u.size(); ++j) CHECK(a[j] == -u[j]);
}

TEST_CASE("inner product scales the negated honest mean") {
  std::vector<std::vector<double>> honest = {{1, 2}, {3, 6}};
  auto a = attack_inner_product(honest, 2, 0.5);
  CHECK(a[0] == doctest::Approx(-1.0));  // -0.5 * mean(1,3)
  CHECK(a[1] == doctest::Approx(-2.0));
  auto z = attack_inner_product({}, 2, 0.5);
  CHECK(z == std::vector<double>{0, 0});
}

TEST_CASE("little-enough deviation sits on the percentile envelope") {
  // Phi(z) = (n - f - s)/(n - f) with s = floor(n/2)+1-f: n=20, f=4 gives
  // Phi(z) = 9/16.
  double z = little_enough_default_z(20, 4);
  double phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
  CHECK(phi == doctest::Approx(9.0 / 16.0).epsilon(1e-9));
  CHECK(z == doctest::Approx(0.1573).epsilon(1e-3));

  std::vector<std::vector<double>> honest = {{1, -1}, {3, 1}};
  auto a = attack_little_enough(honest, 2, 2.0);
  // mean = (2, 0), population std = (1, 1).
  CHECK(a[0] == doctest::Approx(4.0));
  CHECK(a[1] == doctest::Approx(2.0));
}

TEST_CASE("label flip reverses labels and shares features") {
  Dataset d = make_blobs(3, 4, 5, 50, 2.0);
  Dataset f = flip_labels(d);
  CHECK(f.size() == d.size());
  CHECK(f.x == d.x);
  for (size_t i = 0; i < d.size(); ++i) CHECK(f.y[i] == 3 - d.y[i]);
}

// ---------------------------------------------------------------- plain oracles

TEST_CASE("plain sign pipeline on a hand example") {
  std::vector<std::vector<double>> updates = {{0.0, 2.0}, {1.0, -1.0},
                                              {5.0, 5.0}};
  std::vector<double> w = {1.0, 1.0};
  auto sums = plain_sign_sums(updates, w);
  // w - u >= 0: coord 0: 1-0, 1-1, 1-5 -> {+,+,-} = 2; coord 1: {-,+,-} = 1.
  CHECK(sums == std::vector<uint64_t>{2, 1});
  PlainSignParams p{0.5, 0.01, 0.0, 0.0};
  auto w2 = plain_sign_post(sums, w, 3, 0, p);
  // sign_sum = 2*2-3 = 1 and 2*1-3 = -1; w -= eta*lambda*sign_sum.
  CHECK(w2[0] == doctest::Approx(1.0 - 0.01 * 0.5));
  CHECK(w2[1] == doctest::Approx(1.0 + 0.01 * 0.5));
}

TEST_CASE("plain box pipeline on a hand example") {
  PlainBoxParams p{1.0, 1.0, 2};  // 4 levels: -1, -1/3, 1/3, 1
  std::vector<double> w = {0.0};
  std::vector<std::vector<double>> updates = {{1.0}, {-1.0}, {1.0}};
  auto sums = plain_box_sums(updates, w, p);
  // deltas 1, -1, 1 -> levels 3, 0, 3: bit sums: j=0: 1+0+1=2, j=1: 2.
  CHECK(sums == std::vector<uint64_t>{2, 2});
  auto w2 = plain_box_post(sums, w, 3, p);
  // mean level = (3+0+3)/3 = 2: decode = 2/3*2-1 = 1/3.
  CHECK(w2[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("plain trust weights by clipped cosine") {
  PlainTrustParams p{1.0, 16};
  std::vector<double> g0 = {2.0, 0.0, 0.0};
  // Client 1 aligned with g0 (TS = 1), client 2 orthogonal (TS = 0).
  std::vector<std::vector<double>> updates = {{4.0, 0.0, 0.0},
                                              {0.0, 1.0, 0.0}};
  PlainTrust agg = plain_trust_sums(updates, g0, p);
  const int64_t unit = int64_t(1) << 14;
  CHECK(agg.sum_ts == uint64_t(unit));  // only the aligned client
  CHECK(agg.weighted[0] == unit * unit);
  CHECK(agg.weighted[1] == 0);
  auto w2 = plain_trust_post(agg, std::vector<double>{0, 0, 0}, g0, p);
  // g = (1, 0, 0) rotated back (g0 is on the x axis already): w += |g0| * g.
  CHECK(w2[0] == doctest::Approx(2.0));
  CHECK(w2[1] == doctest::Approx(0.0));
  CHECK(w2[2] == doctest::Approx(0.0));
}

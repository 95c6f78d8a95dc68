#include "p2pagg/randomness.hpp"

#include "p2pagg/errors.hpp"

namespace p2pagg {

namespace {

Digest commitment_digest(std::span<const uint8_t> value,
                         const std::array<uint8_t, 32>& nonce) {
  Sha256 h;
  h.update(std::string_view("cmt0"));
  h.update(value);
  h.update(std::span<const uint8_t>(nonce.data(), nonce.size()));
  return h.finish();
}

}  // namespace

std::vector<uint16_t> sample_prefix(SeededRng& rng,
                                    std::span<const uint16_t> peer_ids,
                                    size_t m) {
  if (m > peer_ids.size()) throw Error("sample larger than population");
  std::vector<uint16_t> pool(peer_ids.begin(), peer_ids.end());
  // Partial Fisher-Yates: the first m slots are a uniform ordered m-subset.
  for (size_t i = 0; i < m; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

std::pair<Commitment, Opening> commit(std::span<const uint8_t> value,
                                      SeededRng& rng) {
  Opening o;
  o.value.assign(value.begin(), value.end());
  rng.fill_bytes(o.nonce.data(), o.nonce.size());
  Commitment c{commitment_digest(value, o.nonce)};
  return {c, o};
}

bool verify(const Commitment& c, const Opening& o) {
  return commitment_digest(o.value, o.nonce) == c.digest;
}

JointSeed derive_joint_seed(std::span<const Opening> openings) {
  Sha256 h;
  h.update(std::string_view("seed"));
  for (const Opening& o : openings) h.update(o.value);
  return JointSeed{h.finish()};
}

std::vector<uint16_t> elect_committee(const JointSeed& seed,
                                      std::span<const uint16_t> peer_ids,
                                      size_t m) {
  Sha256 h;
  h.update(std::string_view("comm"));
  h.update(std::span<const uint8_t>(seed.seed.data(), seed.seed.size()));
  SeededRng rng(h.finish());
  return sample_prefix(rng, peer_ids, m);
}

std::vector<uint16_t> subsample_clients(const JointSeed& seed, uint64_t round,
                                        std::span<const uint16_t> peer_ids,
                                        size_t k) {
  Sha256 h;
  h.update(std::string_view("comm"));
  h.update(std::span<const uint8_t>(seed.seed.data(), seed.seed.size()));
  h.update_u64le(round);
  SeededRng rng(h.finish());
  return sample_prefix(rng, peer_ids, k);
}

SeededRng challenge_stream(const JointSeed& seed, uint64_t round) {
  Sha256 h;
  h.update(std::string_view("chal"));
  h.update(std::span<const uint8_t>(seed.seed.data(), seed.seed.size()));
  h.update_u64le(round);
  return SeededRng(h.finish());
}

std::vector<FieldElement> derive_challenges(const JointSeed& seed,
                                            uint64_t round, size_t count) {
  SeededRng rng = challenge_stream(seed, round);
  std::vector<FieldElement> r(count);
  for (FieldElement& x : r) x = rng.field_uniform();
  return r;
}

}  // namespace p2pagg

#include "p2pagg/hash.hpp"

#include <openssl/evp.h>

#include "p2pagg/bytes.hpp"
#include "p2pagg/errors.hpp"

namespace p2pagg {

Sha256::Sha256() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  check(ctx != nullptr, "EVP_MD_CTX_new failed");
  check(EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1,
        "EVP_DigestInit_ex failed");
  ctx_ = ctx;
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(std::span<const uint8_t> data) {
  check(EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(),
                         data.size()) == 1,
        "EVP_DigestUpdate failed");
  return *this;
}

Sha256& Sha256::update(std::string_view tag) { return update(as_bytes(tag)); }

Sha256& Sha256::update_u64le(uint64_t x) {
  uint8_t b[8];
  store_le64(x, b);
  return update(std::span<const uint8_t>(b, 8));
}

Digest Sha256::finish() {
  Digest out;
  unsigned len = 0;
  check(EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) ==
            1,
        "EVP_DigestFinal_ex failed");
  check(len == out.size(), "unexpected digest length");
  return out;
}

Digest sha256(std::span<const uint8_t> data) {
  Sha256 h;
  h.update(data);
  return h.finish();
}

}  // namespace p2pagg

#include "plqp/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace plqp {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

}  // namespace

Rng::Rng() {
  ensure_sodium();
  randombytes_buf(key_.data(), key_.size());
}

Rng::Rng(uint64_t seed) {
  ensure_sodium();
  // Expand the small seed into a ChaCha key so distinct seeds give
  // unrelated streams.
  uint8_t material[16] = {'p', 'l', 'q', 'p', '-', 'r', 'n', 'g'};
  for (int i = 0; i < 8; ++i) material[8 + i] = uint8_t(seed >> (8 * i));
  crypto_hash_sha256(key_.data(), material, sizeof(material));
}

void Rng::refill() {
  uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {0};
  std::memcpy(nonce, &block_counter_, sizeof(block_counter_));
  ++block_counter_;
  crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
  avail_ = buf_.size();
}

void Rng::fill(void* out, size_t len) {
  auto* p = static_cast<uint8_t*>(out);
  while (len > 0) {
    if (avail_ == 0) refill();
    size_t take = std::min(len, avail_);
    std::memcpy(p, buf_.data() + (buf_.size() - avail_), take);
    avail_ -= take;
    p += take;
    len -= take;
  }
}

mpz_class Rng::bits(size_t nbits) {
  if (nbits == 0) return 0;
  size_t nbytes = (nbits + 7) / 8;
  std::vector<uint8_t> raw(nbytes);
  fill(raw.data(), raw.size());
  // Mask excess high bits.
  size_t excess = nbytes * 8 - nbits;
  raw[0] &= uint8_t(0xff >> excess);
  mpz_class out;
  mpz_import(out.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
  return out;
}

mpz_class Rng::below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("Rng::below: bound must be positive");
  size_t k = mpz_sizeinbase(bound.get_mpz_t(), 2);
  while (true) {
    mpz_class candidate = bits(k);
    if (candidate < bound) return candidate;
  }
}

mpz_class Rng::range(const mpz_class& lo, const mpz_class& hi) {
  if (lo >= hi) throw std::invalid_argument("Rng::range: empty range");
  return lo + below(hi - lo);
}

uint64_t Rng::u64() {
  uint64_t v;
  fill(&v, sizeof(v));
  return v;
}

uint64_t Rng::u64_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::u64_below: bound must be positive");
  // Rejection sampling to avoid modulo bias.
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  while (true) {
    uint64_t v = u64();
    if (v < limit) return v % bound;
  }
}

int64_t Rng::i64_range(int64_t lo, int64_t hi) {
  if (lo > hi) throw std::invalid_argument("Rng::i64_range: empty range");
  uint64_t span = uint64_t(hi) - uint64_t(lo) + 1;
  if (span == 0) return int64_t(u64());  // full 64-bit range
  return int64_t(uint64_t(lo) + u64_below(span));
}

double Rng::real01() {
  return double(u64() >> 11) * 0x1.0p-53;
}

Rng& Rng::thread_default() {
  thread_local Rng rng;
  return rng;
}

}  // namespace plqp

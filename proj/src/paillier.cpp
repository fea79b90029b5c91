#include "plqp/paillier.hpp"

#include <sodium.h>

#include <atomic>

namespace plqp::paillier {

namespace {

std::atomic<uint64_t> g_decrypt_count{0};

constexpr int kMillerRabinReps = 40;  // error <= 4^-40 = 2^-80

uint64_t modulus_fingerprint(const mpz_class& n) {
  size_t nbytes = (mpz_sizeinbase(n.get_mpz_t(), 2) + 7) / 8;
  Bytes raw = mpz_to_be(n, nbytes);
  uint8_t digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, raw.data(), raw.size());
  uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = id << 8 | digest[i];
  return id;
}

// Random prime with exactly `bits` bits and the top two bits set, so the
// product of two such primes has exactly 2*bits bits.
mpz_class sample_prime(unsigned bits, Rng& rng) {
  while (true) {
    mpz_class candidate = rng.bits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    mpz_class prime;
    mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
    if (mpz_sizeinbase(prime.get_mpz_t(), 2) != bits) continue;  // search overflowed
    if (mpz_probab_prime_p(prime.get_mpz_t(), kMillerRabinReps) == 0) continue;
    return prime;
  }
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

}  // namespace

Bytes PublicKey::serialize() const {
  ByteWriter w;
  size_t nbytes = (bit_length + 7) / 8;
  w.blob(mpz_to_be(n, nbytes));
  return w.take();
}

PublicKey PublicKey::deserialize(ByteReader& r) {
  return from_modulus(mpz_from_be(r.blob()));
}

PublicKey PublicKey::from_modulus(const mpz_class& n) {
  if (n < 3) throw Error("invalid Paillier modulus");
  PublicKey pk;
  pk.n = n;
  pk.g = n + 1;
  pk.n_squared = n * n;
  pk.bit_length = unsigned(mpz_sizeinbase(n.get_mpz_t(), 2));
  pk.modulus_id = modulus_fingerprint(n);
  return pk;
}

Keypair Keypair::generate(unsigned bits, Rng& rng) {
  if (bits < 16 || bits % 2 != 0)
    throw Error("Paillier key size must be even and at least 16 bits");
  while (true) {
    mpz_class p = sample_prime(bits / 2, rng);
    mpz_class q = sample_prime(bits / 2, rng);
    if (p == q) continue;
    Keypair kp = from_primes(p, q);
    if (kp.pk.bit_length != bits) continue;
    return kp;
  }
}

Keypair Keypair::from_primes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw Error("Paillier primes must be distinct");
  if (mpz_probab_prime_p(p.get_mpz_t(), kMillerRabinReps) == 0 ||
      mpz_probab_prime_p(q.get_mpz_t(), kMillerRabinReps) == 0)
    throw Error("Paillier factors must be prime");

  Keypair kp;
  kp.p = p;
  kp.q = q;
  kp.pk = PublicKey::from_modulus(p * q);
  kp.lambda = (p - 1) * (q - 1);
  if (mpz_invert(kp.mu.get_mpz_t(), kp.lambda.get_mpz_t(), kp.pk.n.get_mpz_t()) == 0)
    throw Error("lambda not invertible mod n");
  kp.p_squared = p * p;
  kp.q_squared = q * q;
  if (mpz_invert(kp.q_sq_inv.get_mpz_t(), kp.q_squared.get_mpz_t(),
                 kp.p_squared.get_mpz_t()) == 0)
    throw Error("CRT inverse does not exist");
  // Z*_{p^2} has order p(p-1); reduce the decryption exponent accordingly.
  kp.lambda_mod_p = kp.lambda % (p * (p - 1));
  kp.lambda_mod_q = kp.lambda % (q * (q - 1));
  return kp;
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Rng& rng) {
  mpz_class r;
  do {
    r = rng.range(1, pk.n);
  } while (mpz_class(gcd(r, pk.n)) != 1);
  return encrypt_with_nonce(pk, m, r);
}

Ciphertext encrypt_with_nonce(const PublicKey& pk, const mpz_class& m,
                              const mpz_class& r) {
  if (m < 0 || m >= pk.n) throw Error("plaintext out of range [0, n)");
  if (r < 1 || r >= pk.n || mpz_class(gcd(r, pk.n)) != 1)
    throw Error("encryption nonce must be a unit in [1, n)");
  // g = n+1, so g^m = 1 + m*n (mod n^2).
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  mpz_class rn = powm(r, pk.n, pk.n_squared);
  return Ciphertext{gm * rn % pk.n_squared, pk.modulus_id};
}

mpz_class decrypt(const Keypair& kp, const Ciphertext& ct) {
  g_decrypt_count.fetch_add(1, std::memory_order_relaxed);
  if (ct.modulus_id != kp.pk.modulus_id)
    throw DecryptionError("ciphertext bound to a different keypair");
  if (ct.value < 1 || ct.value >= kp.pk.n_squared ||
      mpz_class(gcd(ct.value, kp.pk.n)) != 1)
    throw DecryptionError("ciphertext not in the group mod n^2");

  // c^lambda mod n^2 via CRT over p^2 and q^2.
  mpz_class mp = powm(ct.value, kp.lambda_mod_p, kp.p_squared);
  mpz_class mq = powm(ct.value, kp.lambda_mod_q, kp.q_squared);
  mpz_class x = (mp - mq) * kp.q_sq_inv % kp.p_squared;
  if (x < 0) x += kp.p_squared;
  x = x * kp.q_squared + mq;

  // L(x) = (x - 1) / n, then multiply by mu.
  mpz_class l = (x - 1) / kp.pk.n;
  return l * kp.mu % kp.pk.n;
}

Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  if (a.modulus_id != pk.modulus_id || b.modulus_id != pk.modulus_id)
    throw Error("homomorphic add requires matching moduli");
  return Ciphertext{a.value * b.value % pk.n_squared, pk.modulus_id};
}

Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& a, const mpz_class& k) {
  if (a.modulus_id != pk.modulus_id)
    throw Error("homomorphic scalar_mul requires matching modulus");
  mpz_class e = k % pk.n;
  if (e < 0) e += pk.n;
  return Ciphertext{powm(a.value, e, pk.n_squared), pk.modulus_id};
}

Bytes serialize(const PublicKey& pk, const Ciphertext& ct) {
  if (ct.modulus_id != pk.modulus_id)
    throw Error("ciphertext bound to a different keypair");
  return mpz_to_be(ct.value, pk.ciphertext_bytes());
}

Ciphertext deserialize_ciphertext(const PublicKey& pk, std::span<const uint8_t> raw) {
  if (raw.size() != pk.ciphertext_bytes())
    throw DecodeError("ciphertext has wrong width for this key");
  mpz_class v = mpz_from_be(raw);
  if (v >= pk.n_squared) throw DecodeError("ciphertext value out of range");
  return Ciphertext{v, pk.modulus_id};
}

uint64_t decrypt_invocations() {
  return g_decrypt_count.load(std::memory_order_relaxed);
}

}  // namespace plqp::paillier

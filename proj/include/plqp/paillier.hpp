#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <span>
#include <stdexcept>

#include "plqp/encoding.hpp"
#include "plqp/rng.hpp"

namespace plqp::paillier {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecryptionError : public Error {
 public:
  using Error::Error;
};

// Encryption key (n, g) with g = n + 1. `modulus_id` is a short hash of n
// used to bind ciphertexts to the key they were made under; operations on
// mismatched moduli fail loudly instead of silently corrupting.
struct PublicKey {
  mpz_class n;
  mpz_class g;
  mpz_class n_squared;
  unsigned bit_length = 0;
  uint64_t modulus_id = 0;

  // Fixed ciphertext width: ceil(2 * bit_length / 8) bytes (256 at the
  // 1024-bit default).
  size_t ciphertext_bytes() const { return (2 * size_t(bit_length) + 7) / 8; }

  Bytes serialize() const;  // u32 length prefix + big-endian n
  static PublicKey deserialize(ByteReader& r);
  static PublicKey from_modulus(const mpz_class& n);
};

struct Keypair {
  PublicKey pk;
  mpz_class p, q;
  mpz_class lambda;  // (p-1)(q-1)
  mpz_class mu;      // lambda^-1 mod n
  // CRT precomputation for decryption.
  mpz_class p_squared, q_squared, q_sq_inv;  // q^2 inverse mod p^2
  mpz_class lambda_mod_p, lambda_mod_q;      // lambda mod p(p-1), q(q-1)

  // bits must be >= 16 and even; primes pass Miller-Rabin with error
  // probability <= 2^-80 and n has exactly `bits` bits.
  static Keypair generate(unsigned bits, Rng& rng = Rng::thread_default());
  // Test hook: build a keypair from known primes (no minimum size).
  static Keypair from_primes(const mpz_class& p, const mpz_class& q);
};

struct Ciphertext {
  mpz_class value;  // in [0, n^2), unit mod n^2
  uint64_t modulus_id = 0;
};

// Fresh r in [1, n) with gcd(r, n) = 1 per encryption.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   Rng& rng = Rng::thread_default());
// Deterministic variant for golden vectors; r must be a unit mod n.
Ciphertext encrypt_with_nonce(const PublicKey& pk, const mpz_class& m,
                              const mpz_class& r);
mpz_class decrypt(const Keypair& kp, const Ciphertext& ct);

// E(m1) * E(m2) = E(m1 + m2 mod n)
Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
// E(m)^k = E(m * k mod n); negative k is encoded as n - |k| mod n.
Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& a, const mpz_class& k);

// Fixed-width big-endian serialization (pk.ciphertext_bytes() bytes).
Bytes serialize(const PublicKey& pk, const Ciphertext& ct);
Ciphertext deserialize_ciphertext(const PublicKey& pk, std::span<const uint8_t> raw);

// Monotone process-wide count of decrypt() calls. Lets tests assert that
// publisher-side code paths never decrypt.
uint64_t decrypt_invocations();

}  // namespace plqp::paillier

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "plqp/paillier.hpp"

using namespace plqp;
using namespace plqp::paillier;

namespace {

// Independent square-and-multiply oracle on plain machine words; only valid
// for tiny moduli. Deliberately avoids the library's GMP paths.
uint64_t powmod_oracle(uint64_t base, uint64_t exp, uint64_t mod) {
  uint64_t acc = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) acc = acc * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return acc;
}

}  // namespace

TEST_CASE("keygen rejects bad sizes") {
  Rng rng(1);
  CHECK_THROWS_AS(Keypair::generate(8, rng), Error);
  CHECK_THROWS_AS(Keypair::generate(15, rng), Error);
  CHECK_THROWS_AS(Keypair::generate(17, rng), Error);
}

TEST_CASE("16-bit keys roundtrip small plaintexts") {
  Rng rng(2);
  Keypair kp = Keypair::generate(16, rng);
  CHECK(kp.pk.bit_length == 16);
  CHECK(kp.pk.g == kp.pk.n + 1);
  for (int m = 0; m <= 100; ++m)
    CHECK(decrypt(kp, encrypt(kp.pk, m, rng)) == m);
}

TEST_CASE("distinct seeds give distinct moduli") {
  Rng a(10), b(11);
  CHECK(Keypair::generate(32, a).pk.n != Keypair::generate(32, b).pk.n);
}

TEST_CASE("fixed-nonce ciphertext matches independent oracle") {
  // p=11, q=13 -> n=143, g=144. E(42, r) = 144^42 * r^143 mod 143^2.
  Keypair kp = Keypair::from_primes(11, 13);
  REQUIRE(kp.pk.n == 143);
  const uint64_t n2 = 143 * 143;
  for (uint64_t r : {2ull, 5ull, 17ull, 140ull}) {
    Ciphertext ct = encrypt_with_nonce(kp.pk, 42, r);
    uint64_t expected =
        powmod_oracle(144, 42, n2) * powmod_oracle(r, 143, n2) % n2;
    CHECK(ct.value == expected);
    CHECK(decrypt(kp, ct) == 42);
  }
}

TEST_CASE("plaintext range and boundaries") {
  Rng rng(3);
  Keypair kp = Keypair::generate(32, rng);
  CHECK(decrypt(kp, encrypt(kp.pk, 0, rng)) == 0);
  CHECK(decrypt(kp, encrypt(kp.pk, kp.pk.n - 1, rng)) == kp.pk.n - 1);
  CHECK_THROWS_AS(encrypt(kp.pk, kp.pk.n, rng), Error);
  CHECK_THROWS_AS(encrypt(kp.pk, -1, rng), Error);
}

TEST_CASE("500 random roundtrips") {
  Rng rng(4);
  Keypair kp = Keypair::generate(64, rng);
  for (int i = 0; i < 500; ++i) {
    mpz_class m = rng.below(kp.pk.n);
    CHECK(decrypt(kp, encrypt(kp.pk, m, rng)) == m);
  }
}

TEST_CASE("homomorphic addition") {
  Rng rng(5);
  Keypair kp = Keypair::generate(64, rng);
  CHECK(decrypt(kp, add(kp.pk, encrypt(kp.pk, 3, rng), encrypt(kp.pk, 4, rng))) == 7);
  CHECK(decrypt(kp, add(kp.pk, encrypt(kp.pk, 5, rng), encrypt(kp.pk, 9, rng))) == 14);
  // additive identity and wraparound mod n
  mpz_class x = rng.below(kp.pk.n);
  CHECK(decrypt(kp, add(kp.pk, encrypt(kp.pk, 0, rng), encrypt(kp.pk, x, rng))) == x);
  CHECK(decrypt(kp, add(kp.pk, encrypt(kp.pk, kp.pk.n - 1, rng),
                        encrypt(kp.pk, 2, rng))) == 1);
}

TEST_CASE("homomorphic scalar multiplication") {
  Rng rng(6);
  Keypair kp = Keypair::generate(64, rng);
  mpz_class m = rng.below(kp.pk.n);
  CHECK(decrypt(kp, scalar_mul(kp.pk, encrypt(kp.pk, m, rng), 1)) == m);
  CHECK(decrypt(kp, scalar_mul(kp.pk, encrypt(kp.pk, m, rng), 0)) == 0);
  // E(y)^(-2x) with y=7, x=3 decrypts to n-42
  Ciphertext ct = scalar_mul(kp.pk, encrypt(kp.pk, 7, rng), -6);
  CHECK(decrypt(kp, ct) == kp.pk.n - 42);
}

TEST_CASE("randomized homomorphic identities") {
  Rng rng(7);
  Keypair kp = Keypair::generate(64, rng);
  for (int i = 0; i < 200; ++i) {
    mpz_class m1 = rng.below(kp.pk.n);
    mpz_class m2 = rng.below(kp.pk.n);
    CHECK(decrypt(kp, add(kp.pk, encrypt(kp.pk, m1, rng), encrypt(kp.pk, m2, rng))) ==
          (m1 + m2) % kp.pk.n);
    mpz_class k = rng.range(-(kp.pk.n - 1), kp.pk.n);
    mpz_class want = m1 * k % kp.pk.n;
    if (want < 0) want += kp.pk.n;
    CHECK(decrypt(kp, scalar_mul(kp.pk, encrypt(kp.pk, m1, rng), k)) == want);
  }
}

TEST_CASE("re-encryption is randomized") {
  Rng rng(8);
  Keypair kp = Keypair::generate(256, rng);
  std::set<mpz_class> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(encrypt(kp.pk, 42, rng).value);
  CHECK(seen.size() == 1000);
}

TEST_CASE("cross-key operations fail loudly") {
  Rng rng(9);
  Keypair a = Keypair::generate(64, rng);
  Keypair b = Keypair::generate(64, rng);
  Ciphertext ca = encrypt(a.pk, 1, rng);
  Ciphertext cb = encrypt(b.pk, 1, rng);
  CHECK_THROWS_AS(add(a.pk, ca, cb), Error);
  CHECK_THROWS_AS(scalar_mul(b.pk, ca, 2), Error);
  CHECK_THROWS_AS(decrypt(a, cb), DecryptionError);
}

TEST_CASE("decrypt rejects values outside the group") {
  Rng rng(10);
  Keypair kp = Keypair::generate(32, rng);
  Ciphertext bad{kp.pk.n * kp.q, kp.pk.modulus_id};  // gcd(value, n) != 1
  CHECK_THROWS_AS(decrypt(kp, bad), DecryptionError);
  Ciphertext huge{kp.pk.n_squared + 1, kp.pk.modulus_id};
  CHECK_THROWS_AS(decrypt(kp, huge), DecryptionError);
}

TEST_CASE("1024-bit keys have exact width and 256-byte ciphertexts") {
  Rng rng(11);
  Keypair kp = Keypair::generate(1024, rng);
  CHECK(kp.pk.bit_length == 1024);
  CHECK(kp.pk.ciphertext_bytes() == 256);
  Ciphertext ct = encrypt(kp.pk, 12345, rng);
  Bytes raw = serialize(kp.pk, ct);
  CHECK(raw.size() == 256);
  Ciphertext back = deserialize_ciphertext(kp.pk, raw);
  CHECK(back.value == ct.value);
  CHECK(decrypt(kp, back) == 12345);
}

TEST_CASE("public key serialization roundtrip") {
  Rng rng(12);
  Keypair kp = Keypair::generate(64, rng);
  Bytes raw = kp.pk.serialize();
  ByteReader r(raw);
  PublicKey back = PublicKey::deserialize(r);
  CHECK(back.n == kp.pk.n);
  CHECK(back.modulus_id == kp.pk.modulus_id);
  CHECK(back.bit_length == kp.pk.bit_length);
}

#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "plqp/encoding.hpp"
#include "plqp/rng.hpp"

// BLS12-381 bilinear group: G1 over Fp, G2 over Fp2, target group in Fp12,
// optimal ate pairing, and an RFC 9380-style hash to G1 (expand_message_xmd
// with SHA-256 plus the Shallue-van de Woestijne map). Field arithmetic is
// GMP-backed. The final exponentiation uses the standard BLS12 hard-part
// decomposition and therefore computes e(.,.)^3; that cubed map is itself a
// bilinear non-degenerate pairing and is used consistently everywhere.

namespace plqp::bls {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base field prime (381 bits) and subgroup order r (255 bits).
const mpz_class& field_modulus();
const mpz_class& group_order();

// Scalars are integers mod r.
mpz_class random_scalar(Rng& rng);
mpz_class random_nonzero_scalar(Rng& rng);
mpz_class scalar_inverse(const mpz_class& s);

struct Fp2 {
  mpz_class c0, c1;  // c0 + c1*i with i^2 = -1
  bool operator==(const Fp2&) const = default;
};

struct Fp6 {
  Fp2 c0, c1, c2;  // over v with v^3 = 1 + i
  bool operator==(const Fp6&) const = default;
};

struct Fp12 {
  Fp6 c0, c1;  // over w with w^2 = v
  bool operator==(const Fp12&) const = default;
};

struct G1 {
  mpz_class x, y;
  bool infinity = true;

  static G1 generator();
  static G1 identity() { return G1{}; }

  bool is_on_curve() const;
  G1 add(const G1& other) const;
  G1 neg() const;
  G1 mul(const mpz_class& scalar) const;
  bool operator==(const G1&) const = default;

  Bytes serialize() const;  // 48-byte compressed
  static G1 deserialize(std::span<const uint8_t> raw);
  static constexpr size_t kSerializedSize = 48;
};

struct G2 {
  Fp2 x, y;
  bool infinity = true;

  static G2 generator();
  static G2 identity() { return G2{}; }

  bool is_on_curve() const;
  G2 add(const G2& other) const;
  G2 neg() const;
  G2 mul(const mpz_class& scalar) const;
  bool operator==(const G2&) const = default;

  Bytes serialize() const;  // 96-byte compressed
  static G2 deserialize(std::span<const uint8_t> raw);
  static constexpr size_t kSerializedSize = 96;
};

struct Gt {
  Fp12 v;

  static Gt one();
  Gt mul(const Gt& other) const;
  Gt inverse() const;  // conjugation; valid for unitary elements
  Gt pow(const mpz_class& scalar) const;
  bool is_one() const;
  bool operator==(const Gt&) const = default;

  Bytes serialize() const;  // 12 x 48 bytes
  static Gt deserialize(std::span<const uint8_t> raw);
  static constexpr size_t kSerializedSize = 576;
};

Gt pairing(const G1& p, const G2& q);
// Product of pairings sharing one final exponentiation.
Gt pairing_product(std::span<const std::pair<G1, G2>> pairs);

// Hash an arbitrary byte string to G1 (hash_to_curve, random-oracle
// variant, domain-separated by dst).
G1 hash_to_g1(std::span<const uint8_t> msg, const std::string& dst);

}  // namespace plqp::bls

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plqp/bls12_381.hpp"
#include "plqp/encoding.hpp"
#include "plqp/rng.hpp"

// Ciphertext-policy ABE with threshold-gate access trees, following the
// classic large-universe construction: secret shares flow down the tree via
// Shamir polynomials, decryption interpolates pairings back up. Realized
// over an asymmetric pairing with key material split between G1 and G2 so
// every pairing takes one argument from each side. Byte payloads ride on a
// hybrid layer: the ABE part encapsulates a random Gt session key, the
// payload itself is sealed with an authenticated stream cipher.

namespace plqp::abe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decryptor's attributes do not satisfy the ciphertext's tree.
class NotSatisfiedError : public Error {
 public:
  using Error::Error;
};

// Ciphertext failed authentication (tampered or wrong session key).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

inline constexpr size_t kMaxPayloadBytes = 64 * 1024;

using AttributeSet = std::set<std::string>;

struct AccessTree {
  struct Node {
    uint32_t threshold = 1;       // for gates: satisfied iff >= threshold children are
    std::string attribute;        // set iff leaf
    std::vector<Node> children;   // empty iff leaf

    bool is_leaf() const { return children.empty(); }
    bool operator==(const Node&) const = default;

    static Node leaf(std::string attr);
    static Node gate(uint32_t threshold, std::vector<Node> children);
  };

  Node root;

  void validate() const;
  size_t leaf_count() const;
  Bytes serialize() const;  // preorder: gates as threshold+arity, leaves as strings
  static AccessTree deserialize(ByteReader& r);
  bool operator==(const AccessTree&) const = default;
};

// Recursive threshold evaluation: a leaf holds iff its attribute is owned,
// a gate holds iff at least `threshold` children hold.
bool tree_satisfied(const AccessTree& tree, const AttributeSet& attrs);
bool tree_satisfied(const AccessTree::Node& node, const AttributeSet& attrs);

struct PublicKey {
  bls::G1 g;
  bls::G2 g_hat;
  bls::G2 h;             // g_hat^beta
  bls::G1 f;             // g^(1/beta)
  bls::Gt e_gg_alpha;    // e(g, g_hat)^alpha

  Bytes serialize() const;
  static PublicKey deserialize(ByteReader& r);
  bool operator==(const PublicKey&) const = default;
};

struct MasterKey {
  mpz_class beta;
  bls::G1 g_alpha;

  Bytes serialize() const;
  static MasterKey deserialize(ByteReader& r);
  bool operator==(const MasterKey&) const = default;
};

struct SecretKey {
  struct AttrKey {
    bls::G1 d_j;        // g^r * H(j)^(r_j)
    bls::G2 d_j_prime;  // g_hat^(r_j)
    bool operator==(const AttrKey&) const = default;
  };

  bls::G1 d;  // g^((alpha + r) / beta)
  std::map<std::string, AttrKey> components;

  AttributeSet attributes() const;
  Bytes serialize() const;
  static SecretKey deserialize(ByteReader& r);
  bool operator==(const SecretKey&) const = default;
};

struct Ciphertext {
  struct LeafCt {
    bls::G2 c_x;        // g_hat^(q_x(0))
    bls::G1 c_x_prime;  // H(att(x))^(q_x(0))
    bool operator==(const LeafCt&) const = default;
  };

  AccessTree tree;
  bls::Gt c_tilde;             // M * e(g, g_hat)^(alpha s)
  bls::G2 c;                   // h^s
  std::vector<LeafCt> leaves;  // preorder leaf order
  Bytes nonce;
  Bytes sealed;                // AEAD over the payload, keyed from M

  Bytes serialize() const;
  static Ciphertext deserialize(ByteReader& r);
  size_t byte_size() const;
};

std::pair<PublicKey, MasterKey> setup(Rng& rng = Rng::thread_default());
SecretKey keygen(const PublicKey& pk, const MasterKey& mk,
                 const AttributeSet& attrs, Rng& rng = Rng::thread_default());
Ciphertext encrypt(const PublicKey& pk, std::span<const uint8_t> payload,
                   const AccessTree& tree, Rng& rng = Rng::thread_default());
// Succeeds iff sk's attributes satisfy ct.tree; throws NotSatisfiedError or
// IntegrityError otherwise, never returns a wrong payload.
Bytes decrypt(const PublicKey& pk, const SecretKey& sk, const Ciphertext& ct);

}  // namespace plqp::abe

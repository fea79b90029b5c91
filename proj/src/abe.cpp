#include "plqp/abe.hpp"

#include <sodium.h>

namespace plqp::abe {

namespace {

const std::string kAttrDst = "PLQP:ABE:ATTR:BLS12381G1_XMD:SHA-256_SVDW_RO_";

bls::G1 attr_to_group(const std::string& attr) {
  return bls::hash_to_g1(
      std::span(reinterpret_cast<const uint8_t*>(attr.data()), attr.size()),
      kAttrDst);
}

mpz_class mod_r(const mpz_class& v) {
  mpz_class out = v % bls::group_order();
  if (out < 0) out += bls::group_order();
  return out;
}

// Lagrange coefficient at 0 for index i over the index set s, mod r.
mpz_class lagrange_at_zero(int i, const std::vector<int>& s) {
  mpz_class num = 1, den = 1;
  for (int j : s) {
    if (j == i) continue;
    num = mod_r(num * mpz_class(-j));
    den = mod_r(den * mpz_class(i - j));
  }
  return mod_r(num * bls::scalar_inverse(den));
}

constexpr size_t kNonceBytes = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;

Bytes dem_key(const bls::Gt& session) {
  Bytes raw = session.serialize();
  Bytes key(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(key.data(), raw.data(), raw.size());
  return key;
}

void count_leaves(const AccessTree::Node& node, size_t& count) {
  if (node.is_leaf()) {
    ++count;
    return;
  }
  for (const auto& child : node.children) count_leaves(child, count);
}

void validate_node(const AccessTree::Node& node) {
  if (node.is_leaf()) {
    if (node.attribute.empty()) throw Error("leaf attribute must be non-empty");
    return;
  }
  if (!node.attribute.empty())
    throw Error("gate nodes must not carry an attribute");
  if (node.threshold < 1 || node.threshold > node.children.size())
    throw Error("gate threshold out of range");
  for (const auto& child : node.children) validate_node(child);
}

void serialize_node(ByteWriter& w, const AccessTree::Node& node) {
  if (node.is_leaf()) {
    w.u8(1);
    w.str(node.attribute);
    return;
  }
  w.u8(0);
  w.u16(uint16_t(node.threshold));
  w.u16(uint16_t(node.children.size()));
  for (const auto& child : node.children) serialize_node(w, child);
}

AccessTree::Node deserialize_node(ByteReader& r, int depth) {
  if (depth > 64) throw DecodeError("access tree too deep");
  uint8_t tag = r.u8();
  if (tag == 1) return AccessTree::Node::leaf(r.str());
  if (tag != 0) throw DecodeError("bad access tree node tag");
  uint32_t threshold = r.u16();
  uint32_t arity = r.u16();
  if (arity == 0) throw DecodeError("gate with no children");
  std::vector<AccessTree::Node> children;
  children.reserve(arity);
  for (uint32_t i = 0; i < arity; ++i)
    children.push_back(deserialize_node(r, depth + 1));
  return AccessTree::Node::gate(threshold, std::move(children));
}

// Assigns the share of `secret` to every leaf below `node`, in preorder.
void share_secret(const AccessTree::Node& node, const mpz_class& secret,
                  std::vector<mpz_class>& leaf_shares, Rng& rng) {
  if (node.is_leaf()) {
    leaf_shares.push_back(secret);
    return;
  }
  // Polynomial of degree threshold-1 with q(0) = secret; child i gets q(i).
  std::vector<mpz_class> coeffs{secret};
  for (uint32_t k = 1; k < node.threshold; ++k)
    coeffs.push_back(bls::random_scalar(rng));
  for (size_t i = 0; i < node.children.size(); ++i) {
    mpz_class x(i + 1), x_pow = 1, value = 0;
    for (const mpz_class& c : coeffs) {
      value = mod_r(value + c * x_pow);
      x_pow = mod_r(x_pow * x);
    }
    share_secret(node.children[i], value, leaf_shares, rng);
  }
}

// Recursive decryption. `leaf_cursor` tracks the preorder leaf index so the
// node lines up with its LeafCt. Returns e(g, g_hat)^(r * q_node(0)) for a
// satisfied node, or nullopt (while still advancing the cursor).
std::optional<bls::Gt> decrypt_node(const AccessTree::Node& node,
                                    const Ciphertext& ct, const SecretKey& sk,
                                    const AttributeSet& attrs,
                                    size_t& leaf_cursor) {
  if (node.is_leaf()) {
    size_t idx = leaf_cursor++;
    auto it = sk.components.find(node.attribute);
    if (it == sk.components.end()) return std::nullopt;
    const Ciphertext::LeafCt& leaf = ct.leaves.at(idx);
    // e(D_j, C_x) / e(C'_x, D'_j) = e(g, g_hat)^(r * q_x(0))
    std::pair<bls::G1, bls::G2> pairs[2] = {
        {it->second.d_j, leaf.c_x},
        {leaf.c_x_prime.neg(), it->second.d_j_prime},
    };
    return bls::pairing_product(pairs);
  }

  // Recurse only into the first `threshold` satisfied children; skip the
  // rest while keeping the leaf cursor in step.
  std::vector<int> indices;
  std::vector<bls::Gt> shares;
  for (size_t i = 0; i < node.children.size(); ++i) {
    bool want = indices.size() < node.threshold &&
                tree_satisfied(node.children[i], attrs);
    if (want) {
      auto part = decrypt_node(node.children[i], ct, sk, attrs, leaf_cursor);
      if (!part) return std::nullopt;  // defensive; want implies satisfiable
      indices.push_back(int(i + 1));
      shares.push_back(*part);
    } else {
      size_t skipped = 0;
      count_leaves(node.children[i], skipped);
      leaf_cursor += skipped;
    }
  }
  if (indices.size() < node.threshold) return std::nullopt;

  bls::Gt out = bls::Gt::one();
  for (size_t k = 0; k < indices.size(); ++k)
    out = out.mul(shares[k].pow(lagrange_at_zero(indices[k], indices)));
  return out;
}

}  // namespace

AccessTree::Node AccessTree::Node::leaf(std::string attr) {
  Node n;
  n.attribute = std::move(attr);
  return n;
}

AccessTree::Node AccessTree::Node::gate(uint32_t threshold,
                                        std::vector<Node> children) {
  Node n;
  n.threshold = threshold;
  n.children = std::move(children);
  return n;
}

void AccessTree::validate() const { validate_node(root); }

size_t AccessTree::leaf_count() const {
  size_t count = 0;
  count_leaves(root, count);
  return count;
}

Bytes AccessTree::serialize() const {
  ByteWriter w;
  serialize_node(w, root);
  return w.take();
}

AccessTree AccessTree::deserialize(ByteReader& r) {
  AccessTree t;
  t.root = deserialize_node(r, 0);
  t.validate();
  return t;
}

bool tree_satisfied(const AccessTree::Node& node, const AttributeSet& attrs) {
  if (node.is_leaf()) return attrs.count(node.attribute) > 0;
  uint32_t satisfied = 0;
  for (const auto& child : node.children)
    if (tree_satisfied(child, attrs)) ++satisfied;
  return satisfied >= node.threshold;
}

bool tree_satisfied(const AccessTree& tree, const AttributeSet& attrs) {
  return tree_satisfied(tree.root, attrs);
}

Bytes PublicKey::serialize() const {
  ByteWriter w;
  w.blob(g.serialize());
  w.blob(g_hat.serialize());
  w.blob(h.serialize());
  w.blob(f.serialize());
  w.blob(e_gg_alpha.serialize());
  return w.take();
}

PublicKey PublicKey::deserialize(ByteReader& r) {
  PublicKey pk;
  pk.g = bls::G1::deserialize(r.blob());
  pk.g_hat = bls::G2::deserialize(r.blob());
  pk.h = bls::G2::deserialize(r.blob());
  pk.f = bls::G1::deserialize(r.blob());
  pk.e_gg_alpha = bls::Gt::deserialize(r.blob());
  return pk;
}

Bytes MasterKey::serialize() const {
  ByteWriter w;
  w.blob(mpz_to_be(beta, 32));
  w.blob(g_alpha.serialize());
  return w.take();
}

MasterKey MasterKey::deserialize(ByteReader& r) {
  MasterKey mk;
  mk.beta = mpz_from_be(r.blob());
  mk.g_alpha = bls::G1::deserialize(r.blob());
  return mk;
}

AttributeSet SecretKey::attributes() const {
  AttributeSet out;
  for (const auto& [attr, _] : components) out.insert(attr);
  return out;
}

Bytes SecretKey::serialize() const {
  ByteWriter w;
  w.blob(d.serialize());
  w.u32(uint32_t(components.size()));
  for (const auto& [attr, key] : components) {
    w.str(attr);
    w.blob(key.d_j.serialize());
    w.blob(key.d_j_prime.serialize());
  }
  return w.take();
}

SecretKey SecretKey::deserialize(ByteReader& r) {
  SecretKey sk;
  sk.d = bls::G1::deserialize(r.blob());
  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string attr = r.str();
    AttrKey key;
    key.d_j = bls::G1::deserialize(r.blob());
    key.d_j_prime = bls::G2::deserialize(r.blob());
    sk.components.emplace(std::move(attr), std::move(key));
  }
  return sk;
}

Bytes Ciphertext::serialize() const {
  ByteWriter w;
  w.blob(tree.serialize());
  w.blob(c_tilde.serialize());
  w.blob(c.serialize());
  w.u32(uint32_t(leaves.size()));
  for (const auto& leaf : leaves) {
    w.blob(leaf.c_x.serialize());
    w.blob(leaf.c_x_prime.serialize());
  }
  w.blob(nonce);
  w.blob(sealed);
  return w.take();
}

Ciphertext Ciphertext::deserialize(ByteReader& r) {
  Ciphertext ct;
  {
    auto tree_raw = r.blob();
    ByteReader tr(tree_raw);
    ct.tree = AccessTree::deserialize(tr);
    tr.expect_done();
  }
  ct.c_tilde = bls::Gt::deserialize(r.blob());
  ct.c = bls::G2::deserialize(r.blob());
  uint32_t count = r.u32();
  if (count != ct.tree.leaf_count())
    throw DecodeError("leaf component count does not match tree");
  for (uint32_t i = 0; i < count; ++i) {
    LeafCt leaf;
    leaf.c_x = bls::G2::deserialize(r.blob());
    leaf.c_x_prime = bls::G1::deserialize(r.blob());
    ct.leaves.push_back(std::move(leaf));
  }
  auto nonce = r.blob();
  ct.nonce.assign(nonce.begin(), nonce.end());
  if (ct.nonce.size() != kNonceBytes) throw DecodeError("bad nonce length");
  auto sealed = r.blob();
  ct.sealed.assign(sealed.begin(), sealed.end());
  return ct;
}

size_t Ciphertext::byte_size() const { return serialize().size(); }

std::pair<PublicKey, MasterKey> setup(Rng& rng) {
  mpz_class alpha = bls::random_nonzero_scalar(rng);
  mpz_class beta = bls::random_nonzero_scalar(rng);

  PublicKey pk;
  pk.g = bls::G1::generator();
  pk.g_hat = bls::G2::generator();
  pk.h = pk.g_hat.mul(beta);
  pk.f = pk.g.mul(bls::scalar_inverse(beta));
  pk.e_gg_alpha = bls::pairing(pk.g, pk.g_hat).pow(alpha);

  MasterKey mk;
  mk.beta = beta;
  mk.g_alpha = pk.g.mul(alpha);

  // e(f, h) = e(g, g_hat)^(beta/beta): fails loudly if setup is inconsistent.
  if (!(bls::pairing(pk.f, pk.h) == bls::pairing(pk.g, pk.g_hat)))
    throw Error("setup pairing consistency check failed");
  return {pk, mk};
}

SecretKey keygen(const PublicKey& pk, const MasterKey& mk,
                 const AttributeSet& attrs, Rng& rng) {
  if (attrs.empty()) throw Error("attribute set must be non-empty");
  mpz_class r = bls::random_scalar(rng);
  mpz_class beta_inv = bls::scalar_inverse(mk.beta);

  SecretKey sk;
  // D = g^((alpha + r)/beta), built from MK components: (g^alpha * g^r)^(1/beta)
  sk.d = mk.g_alpha.add(pk.g.mul(r)).mul(beta_inv);
  bls::G1 g_r = pk.g.mul(r);
  for (const std::string& attr : attrs) {
    mpz_class r_j = bls::random_scalar(rng);
    SecretKey::AttrKey key;
    key.d_j = g_r.add(attr_to_group(attr).mul(r_j));
    key.d_j_prime = pk.g_hat.mul(r_j);
    sk.components.emplace(attr, std::move(key));
  }
  return sk;
}

Ciphertext encrypt(const PublicKey& pk, std::span<const uint8_t> payload,
                   const AccessTree& tree, Rng& rng) {
  tree.validate();
  if (payload.size() > kMaxPayloadBytes) throw Error("payload too large");

  mpz_class s = bls::random_scalar(rng);
  // Random Gt session key, encapsulated BSW-style.
  bls::Gt session = pk.e_gg_alpha.pow(bls::random_nonzero_scalar(rng));

  Ciphertext ct;
  ct.tree = tree;
  ct.c_tilde = session.mul(pk.e_gg_alpha.pow(s));
  ct.c = pk.h.mul(s);

  std::vector<mpz_class> shares;
  share_secret(tree.root, s, shares, rng);
  ct.leaves.reserve(shares.size());
  std::vector<std::string> attrs;
  {
    // preorder attribute list mirrors share order
    std::vector<const AccessTree::Node*> stack{&tree.root};
    while (!stack.empty()) {
      const AccessTree::Node* n = stack.back();
      stack.pop_back();
      if (n->is_leaf()) {
        attrs.push_back(n->attribute);
      } else {
        for (auto it = n->children.rbegin(); it != n->children.rend(); ++it)
          stack.push_back(&*it);
      }
    }
  }
  for (size_t i = 0; i < shares.size(); ++i) {
    Ciphertext::LeafCt leaf;
    leaf.c_x = pk.g_hat.mul(shares[i]);
    leaf.c_x_prime = attr_to_group(attrs[i]).mul(shares[i]);
    ct.leaves.push_back(std::move(leaf));
  }

  ct.nonce.resize(kNonceBytes);
  rng.fill(ct.nonce.data(), ct.nonce.size());
  Bytes key = dem_key(session);
  ct.sealed.resize(payload.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long sealed_len = 0;
  static const uint8_t empty_in = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      ct.sealed.data(), &sealed_len, payload.empty() ? &empty_in : payload.data(),
      payload.size(), nullptr, 0, nullptr, ct.nonce.data(), key.data());
  ct.sealed.resize(sealed_len);
  return ct;
}

Bytes decrypt(const PublicKey& pk, const SecretKey& sk, const Ciphertext& ct) {
  ct.tree.validate();
  if (ct.leaves.size() != ct.tree.leaf_count())
    throw Error("ciphertext leaf components do not match its tree");
  AttributeSet attrs = sk.attributes();
  if (!tree_satisfied(ct.tree, attrs))
    throw NotSatisfiedError("attributes do not satisfy the access tree");

  size_t cursor = 0;
  auto root_part = decrypt_node(ct.tree.root, ct, sk, attrs, cursor);
  if (!root_part) throw NotSatisfiedError("attributes do not satisfy the access tree");

  // session = C~ * e(g,g_hat)^(rs) / e(D, C)
  bls::Gt session =
      ct.c_tilde.mul(*root_part).mul(bls::pairing(sk.d, ct.c).inverse());

  Bytes key = dem_key(session);
  if (ct.sealed.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES)
    throw IntegrityError("sealed payload truncated");
  Bytes out(ct.sealed.size() - crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long out_len = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          out.data(), &out_len, nullptr, ct.sealed.data(), ct.sealed.size(),
          nullptr, 0, ct.nonce.data(), key.data()) != 0)
    throw IntegrityError("payload authentication failed");
  out.resize(out_len);
  return out;
}

}  // namespace plqp::abe

#pragma once

#include <optional>
#include <variant>

#include "plqp/abe.hpp"
#include "plqp/geo.hpp"
#include "plqp/paillier.hpp"

// The four leveled location-query protocols. A querier builds a Paillier
// request (levels 1-3), the publisher assembles the homomorphic response
// without ever decrypting and wraps it in ABE under the level's access
// tree, and the querier unwraps both layers. Level semantics:
//   1: proximity bit against the publisher's threshold
//   2: proximity bit against the querier's threshold
//   3: exact squared distance
//   4: a disclosure function of the publisher's location (no request body)

namespace plqp::protocol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Level : uint8_t { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };
Level level_from_int(int v);

enum class Ordering { Less, Equal, Greater };
const char* to_string(Ordering o);

struct SessionConfig {
  geo::SpaceConfig space = geo::SpaceConfig::space(1 << 20, 1 << 20, 1 << 20);
  unsigned paillier_bits = 1024;
};

// Blinding pair applied by the publisher in levels 1-2. With
// dist^2, tau^2 <= 2^52 the blinded values stay below 2^1023 <= n, so
// integer comparison of the decrypted values is exact.
struct BlindPair {
  mpz_class delta;        // [1, 2^970)
  mpz_class delta_prime;  // [1, 2^1022)
  void validate() const;
};

BlindPair sample_blinds(Rng& rng = Rng::thread_default());

// Querier -> publisher payload for levels 1-3: E(1), E(sum y_i^2),
// {E(-2 y_i)}, plus E(tau^2) for level 2 only.
struct DistanceRequest {
  paillier::PublicKey pk;
  paillier::Ciphertext enc_one;
  paillier::Ciphertext enc_sum_sq;
  std::vector<paillier::Ciphertext> enc_minus_two_y;
  std::optional<paillier::Ciphertext> enc_tau_sq;

  int dimension() const { return int(enc_minus_two_y.size()); }
  bool has_tau() const { return enc_tau_sq.has_value(); }
  // Bytes of ciphertext material (excluding the public key): the quantity
  // the protocol's wire-size table pins.
  size_t ciphertext_payload_bytes() const;
};

// Publisher -> querier: one ABE ciphertext per nested component.
// Levels 1-2 carry {blinded distance, blinded threshold}; level 3 one
// distance ciphertext; level 4 one ABE ciphertext per coordinate.
struct NestedResponse {
  Level level = Level::L3;
  int dimension = 3;
  std::vector<abe::Ciphertext> parts;

  size_t expected_parts() const;
  Bytes serialize() const;
  size_t byte_size() const;
};

// Level-4 disclosure function F(x).
struct DisclosureFunction {
  enum class Kind { Exact, Quantize };
  Kind kind = Kind::Exact;
  int64_t cell_size = 1;  // power of two, for Quantize

  static DisclosureFunction exact();
  static DisclosureFunction quantize(int64_t cell_size);
  void validate() const;
  geo::Location apply(const geo::Location& loc) const;
  Bytes serialize() const;
  static DisclosureFunction deserialize(ByteReader& r);
};

enum class SessionState { Init, RequestSent, Responded, Done, Discarded };
enum class Role { Querier, Publisher };

// Querier-side session: owns the ephemeral Paillier keypair and the
// plaintext query parameters needed to interpret the response. The state
// only moves forward along Init -> RequestSent -> Responded -> Done, with
// Discarded as a terminal branch; advance() rejects anything else.
struct QuerySession {
  Role role = Role::Querier;
  Level level = Level::L3;
  int dimension = 3;
  SessionState state = SessionState::Init;
  geo::Location location{0, 0, 0};
  std::optional<paillier::Keypair> keys;
  std::optional<mpz_class> tau_sq;

  void advance(SessionState next);
  void mark_discarded() { advance(SessionState::Discarded); }
};

struct DistanceResult {
  uint64_t dist_sq = 0;
  double dist = 0;
  bool operator==(const DistanceResult&) const = default;
};

// Exactly one alternative per level family: ordering for 1-2, distance for
// 3, disclosed location for 4. Nothing else leaks into the result.
struct QueryResult {
  Level level = Level::L3;
  std::variant<Ordering, DistanceResult, geo::Location> value{DistanceResult{}};

  Ordering ordering() const;
  DistanceResult distance() const;
  const geo::Location& disclosed() const;
};

// Starts a session. tau is required exactly for level 2 (the querier's
// threshold, in meters). Levels 1-3 return a DistanceRequest; level 4 has
// an empty querier payload. `reuse_keys` is the optional session-cache
// hook; by default every session draws a fresh ephemeral keypair.
std::pair<QuerySession, std::optional<DistanceRequest>> q_begin(
    Level level, const geo::Location& my_location, const SessionConfig& config,
    std::optional<int64_t> tau = std::nullopt,
    Rng& rng = Rng::thread_default(),
    const paillier::Keypair* reuse_keys = nullptr);

// Level-2 variant taking the squared threshold directly. The public
// q_begin squares its tau argument; inference attacks need arbitrary
// integer tau^2 values, which the wire format happily carries.
std::pair<QuerySession, DistanceRequest> q_begin_compare_tau_sq(
    const geo::Location& my_location, const SessionConfig& config,
    const mpz_class& tau_sq, Rng& rng = Rng::thread_default(),
    const paillier::Keypair* reuse_keys = nullptr);

// Level 3: homomorphically assemble E(|x - y|^2); ABE-wrap under tree.
NestedResponse p_respond_distance(const DistanceRequest& req,
                                  const geo::Location& my_location,
                                  const abe::AccessTree& tree,
                                  const abe::PublicKey& abe_pk,
                                  const SessionConfig& config,
                                  Rng& rng = Rng::thread_default());

// Levels 1-2: emit {E(delta dist^2 + delta'), E(delta tau^2 + delta')}.
// Exactly one threshold source must be present: tau_publisher for level 1,
// the request's E(tau^2) for level 2.
NestedResponse p_respond_compare(const DistanceRequest& req,
                                 const geo::Location& my_location,
                                 const abe::AccessTree& tree,
                                 const abe::PublicKey& abe_pk,
                                 std::optional<int64_t> tau_publisher,
                                 const SessionConfig& config,
                                 Rng& rng = Rng::thread_default());

// Level 4: ABE-encrypt each coordinate of F(x) separately.
NestedResponse p_respond_level4(const geo::Location& my_location,
                                const abe::AccessTree& tree,
                                const abe::PublicKey& abe_pk,
                                const DisclosureFunction& f,
                                Rng& rng = Rng::thread_default());

// Unwraps ABE then Paillier and interprets per level.
QueryResult q_finish(QuerySession& session, const NestedResponse& resp,
                     const abe::SecretKey& abe_sk, const abe::PublicKey& abe_pk);

// ---------------------------------------------------------------------------
// Wire format: 1-byte message type, 1-byte level, 1-byte dimension, then
// u32-length-prefixed components, everything big-endian.

namespace wire {

constexpr uint8_t kQueryRequest = 0x01;
constexpr uint8_t kQueryResponse = 0x02;
constexpr uint8_t kRegister = 0x10;
constexpr uint8_t kRegisterOk = 0x11;
constexpr uint8_t kDirectory = 0x12;
constexpr uint8_t kDirectoryReply = 0x13;
constexpr uint8_t kError = 0x7f;

struct Message {
  uint8_t type = 0;
  uint8_t level = 0;
  uint8_t dimension = 0;
  std::vector<Bytes> components;

  Bytes encode() const;
  static Message decode(std::span<const uint8_t> raw);
};

Bytes encode_query_request(Level level, int dimension, const DistanceRequest* req);

struct DecodedQueryRequest {
  Level level;
  int dimension;
  std::optional<DistanceRequest> request;  // empty for level 4
};
DecodedQueryRequest decode_query_request(const Message& msg);

Bytes encode_query_response(const NestedResponse& resp);
NestedResponse decode_query_response(const Message& msg);

// Pure function of (level, dimension, key bits): the querier->publisher
// ciphertext payload size the protocol guarantees.
size_t request_ciphertext_bytes(Level level, int dimension, unsigned key_bits);

}  // namespace wire

}  // namespace plqp::protocol

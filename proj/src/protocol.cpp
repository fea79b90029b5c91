#include "plqp/protocol.hpp"

#include <array>
#include <cmath>

namespace plqp::protocol {

namespace {

const mpz_class& two_pow(unsigned bits) {
  static const std::array<mpz_class, 1025> cache = [] {
    std::array<mpz_class, 1025> c;
    for (unsigned i = 0; i < c.size(); ++i) c[i] = mpz_class(1) << i;
    return c;
  }();
  return cache.at(bits);
}

mpz_class sum_of_squares(const geo::Location& loc) {
  mpz_class sum = 0;
  for (int i = 0; i < loc.dimension(); ++i)
    sum += mpz_class(loc[i]) * loc[i];
  return sum;
}

void check_in_bounds(const geo::Location& loc, const geo::SpaceConfig& space,
                     const char* who) {
  if (!space.contains(loc))
    throw Error(std::string(who) + " location outside the configured space");
}

// Levels 1-2 compare blinded values as integers; that is only sound when
// delta * dist^2 + delta' < n, which needs n >= 2^1023.
void check_blind_capacity(const paillier::PublicKey& pk) {
  if (pk.n < two_pow(1023))
    throw Error("comparison levels require a modulus of at least 1024 bits");
}

DistanceRequest build_request(const geo::Location& loc,
                              const SessionConfig& config,
                              const std::optional<mpz_class>& tau_sq, Rng& rng,
                              const paillier::Keypair* reuse_keys,
                              std::optional<paillier::Keypair>& keys_out) {
  if (reuse_keys != nullptr) {
    if (reuse_keys->pk.bit_length != config.paillier_bits)
      throw Error("cached keypair does not match the configured key size");
    keys_out = *reuse_keys;
  } else {
    keys_out = paillier::Keypair::generate(config.paillier_bits, rng);
  }
  const paillier::PublicKey& pk = keys_out->pk;

  DistanceRequest req;
  req.pk = pk;
  req.enc_one = paillier::encrypt(pk, 1, rng);
  req.enc_sum_sq = paillier::encrypt(pk, sum_of_squares(loc), rng);
  for (int i = 0; i < loc.dimension(); ++i) {
    mpz_class minus_two_y = mpz_class(-2) * loc[i] % pk.n;
    if (minus_two_y < 0) minus_two_y += pk.n;
    req.enc_minus_two_y.push_back(paillier::encrypt(pk, minus_two_y, rng));
  }
  if (tau_sq) {
    check_blind_capacity(pk);
    req.enc_tau_sq = paillier::encrypt(pk, *tau_sq, rng);
  }
  return req;
}

abe::Ciphertext wrap(const abe::PublicKey& abe_pk, const Bytes& payload,
                     const abe::AccessTree& tree, Rng& rng) {
  return abe::encrypt(abe_pk, payload, tree, rng);
}

// E(dist^2 scaled) = E(sum y^2)^scale * E(1)^(scale*sum x^2 + shift)
//                    * prod E(-2 y_i)^(scale * x_i)
paillier::Ciphertext assemble_distance(const DistanceRequest& req,
                                       const geo::Location& x,
                                       const mpz_class& scale,
                                       const mpz_class& shift) {
  const paillier::PublicKey& pk = req.pk;
  paillier::Ciphertext acc =
      paillier::scalar_mul(pk, req.enc_sum_sq, scale);
  acc = paillier::add(
      pk, acc,
      paillier::scalar_mul(pk, req.enc_one, scale * sum_of_squares(x) + shift));
  for (int i = 0; i < x.dimension(); ++i)
    acc = paillier::add(
        pk, acc,
        paillier::scalar_mul(pk, req.enc_minus_two_y[size_t(i)], scale * x[i]));
  return acc;
}

void check_request_shape(const DistanceRequest& req, const geo::Location& x) {
  if (req.dimension() != x.dimension())
    throw Error("request component count does not match publisher dimension");
}

mpz_class checked_tau_sq(int64_t tau) {
  if (tau < 0) throw Error("threshold must be non-negative");
  if (tau > geo::kMaxCoordinate)
    throw Error("threshold exceeds the 2^26 m distance cap");
  return mpz_class(tau) * tau;
}

}  // namespace

Level level_from_int(int v) {
  if (v < 1 || v > 4) throw Error("query level must be 1..4");
  return Level(v);
}

const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::Less: return "<";
    case Ordering::Equal: return "=";
    case Ordering::Greater: return ">";
  }
  return "?";
}

void BlindPair::validate() const {
  if (delta < 1 || delta >= two_pow(970))
    throw Error("delta outside [1, 2^970)");
  if (delta_prime < 1 || delta_prime >= two_pow(1022))
    throw Error("delta' outside [1, 2^1022)");
}

BlindPair sample_blinds(Rng& rng) {
  BlindPair out;
  out.delta = rng.range(1, two_pow(970));
  out.delta_prime = rng.range(1, two_pow(1022));
  return out;
}

size_t DistanceRequest::ciphertext_payload_bytes() const {
  size_t count = 2 + enc_minus_two_y.size() + (enc_tau_sq ? 1 : 0);
  return count * pk.ciphertext_bytes();
}

size_t NestedResponse::expected_parts() const {
  switch (level) {
    case Level::L1:
    case Level::L2: return 2;
    case Level::L3: return 1;
    case Level::L4: return size_t(dimension);
  }
  return 0;
}

Bytes NestedResponse::serialize() const {
  return wire::encode_query_response(*this);
}

size_t NestedResponse::byte_size() const { return serialize().size(); }

DisclosureFunction DisclosureFunction::exact() { return DisclosureFunction{}; }

DisclosureFunction DisclosureFunction::quantize(int64_t cell_size) {
  DisclosureFunction f;
  f.kind = Kind::Quantize;
  f.cell_size = cell_size;
  f.validate();
  return f;
}

void DisclosureFunction::validate() const {
  if (kind == Kind::Quantize) {
    if (cell_size < 1 || (cell_size & (cell_size - 1)) != 0)
      throw Error("quantize cell size must be a positive power of two");
  }
}

geo::Location DisclosureFunction::apply(const geo::Location& loc) const {
  if (kind == Kind::Exact) return loc;
  std::vector<int64_t> out;
  for (int i = 0; i < loc.dimension(); ++i) {
    int64_t c = loc[i];
    int64_t m = ((c % cell_size) + cell_size) % cell_size;
    out.push_back(c - m);  // canonical cell corner
  }
  return geo::Location(out);
}

Bytes DisclosureFunction::serialize() const {
  ByteWriter w;
  w.u8(kind == Kind::Exact ? 0 : 1);
  w.i64(cell_size);
  return w.take();
}

DisclosureFunction DisclosureFunction::deserialize(ByteReader& r) {
  DisclosureFunction f;
  uint8_t kind = r.u8();
  int64_t cell = r.i64();
  if (kind == 0) return exact();
  if (kind == 1) {
    f.kind = Kind::Quantize;
    f.cell_size = cell;
    f.validate();
    return f;
  }
  throw DecodeError("bad disclosure function kind");
}

void QuerySession::advance(SessionState next) {
  bool ok = false;
  if (next == SessionState::Discarded)
    ok = state != SessionState::Done;
  else
    ok = int(next) == int(state) + 1;
  if (!ok) throw Error("session state may only advance");
  state = next;
}

Ordering QueryResult::ordering() const {
  if (const auto* o = std::get_if<Ordering>(&value)) return *o;
  throw Error("result carries no ordering");
}

DistanceResult QueryResult::distance() const {
  if (const auto* d = std::get_if<DistanceResult>(&value)) return *d;
  throw Error("result carries no distance");
}

const geo::Location& QueryResult::disclosed() const {
  if (const auto* l = std::get_if<geo::Location>(&value)) return *l;
  throw Error("result carries no disclosed location");
}

std::pair<QuerySession, std::optional<DistanceRequest>> q_begin(
    Level level, const geo::Location& my_location, const SessionConfig& config,
    std::optional<int64_t> tau, Rng& rng, const paillier::Keypair* reuse_keys) {
  config.space.validate();
  check_in_bounds(my_location, config.space, "querier");
  if ((level == Level::L2) != tau.has_value())
    throw Error("tau is required exactly for level 2");

  QuerySession session;
  session.role = Role::Querier;
  session.level = level;
  session.dimension = my_location.dimension();
  session.location = my_location;
  if (session.dimension != config.space.dimension)
    throw Error("location dimension does not match the space");

  if (level == Level::L4) {
    session.advance(SessionState::RequestSent);
    return {std::move(session), std::nullopt};
  }

  std::optional<mpz_class> tau_sq;
  if (tau) tau_sq = checked_tau_sq(*tau);
  DistanceRequest req = build_request(my_location, config, tau_sq, rng,
                                      reuse_keys, session.keys);
  session.tau_sq = tau_sq;
  session.advance(SessionState::RequestSent);
  return {std::move(session), std::move(req)};
}

std::pair<QuerySession, DistanceRequest> q_begin_compare_tau_sq(
    const geo::Location& my_location, const SessionConfig& config,
    const mpz_class& tau_sq, Rng& rng, const paillier::Keypair* reuse_keys) {
  config.space.validate();
  check_in_bounds(my_location, config.space, "querier");
  if (tau_sq < 0 || tau_sq > mpz_class(geo::kMaxDistanceSq))
    throw Error("tau^2 outside [0, 2^52]");

  QuerySession session;
  session.role = Role::Querier;
  session.level = Level::L2;
  session.dimension = my_location.dimension();
  session.location = my_location;
  if (session.dimension != config.space.dimension)
    throw Error("location dimension does not match the space");

  DistanceRequest req = build_request(my_location, config, tau_sq, rng,
                                      reuse_keys, session.keys);
  session.tau_sq = tau_sq;
  session.advance(SessionState::RequestSent);
  return {std::move(session), std::move(req)};
}

NestedResponse p_respond_distance(const DistanceRequest& req,
                                  const geo::Location& my_location,
                                  const abe::AccessTree& tree,
                                  const abe::PublicKey& abe_pk,
                                  const SessionConfig& config, Rng& rng) {
  check_request_shape(req, my_location);
  check_in_bounds(my_location, config.space, "publisher");
  if (req.has_tau()) throw Error("level 3 request must not carry E(tau^2)");

  paillier::Ciphertext dist = assemble_distance(req, my_location, 1, 0);
  NestedResponse resp;
  resp.level = Level::L3;
  resp.dimension = my_location.dimension();
  resp.parts.push_back(wrap(abe_pk, paillier::serialize(req.pk, dist), tree, rng));
  return resp;
}

NestedResponse p_respond_compare(const DistanceRequest& req,
                                 const geo::Location& my_location,
                                 const abe::AccessTree& tree,
                                 const abe::PublicKey& abe_pk,
                                 std::optional<int64_t> tau_publisher,
                                 const SessionConfig& config, Rng& rng) {
  check_request_shape(req, my_location);
  check_in_bounds(my_location, config.space, "publisher");
  check_blind_capacity(req.pk);
  if (tau_publisher.has_value() == req.has_tau())
    throw Error("exactly one threshold source must be present");

  BlindPair blinds = sample_blinds(rng);
  blinds.validate();

  paillier::Ciphertext blinded_dist =
      assemble_distance(req, my_location, blinds.delta, blinds.delta_prime);

  paillier::Ciphertext blinded_tau;
  if (tau_publisher) {
    // level 1: threshold known to the publisher
    mpz_class tau_sq = checked_tau_sq(*tau_publisher);
    blinded_tau = paillier::scalar_mul(
        req.pk, req.enc_one, blinds.delta * tau_sq + blinds.delta_prime);
  } else {
    // level 2: threshold arrives encrypted
    blinded_tau = paillier::add(
        req.pk, paillier::scalar_mul(req.pk, *req.enc_tau_sq, blinds.delta),
        paillier::scalar_mul(req.pk, req.enc_one, blinds.delta_prime));
  }

  NestedResponse resp;
  resp.level = tau_publisher ? Level::L1 : Level::L2;
  resp.dimension = my_location.dimension();
  resp.parts.push_back(
      wrap(abe_pk, paillier::serialize(req.pk, blinded_dist), tree, rng));
  resp.parts.push_back(
      wrap(abe_pk, paillier::serialize(req.pk, blinded_tau), tree, rng));
  return resp;
}

NestedResponse p_respond_level4(const geo::Location& my_location,
                                const abe::AccessTree& tree,
                                const abe::PublicKey& abe_pk,
                                const DisclosureFunction& f, Rng& rng) {
  f.validate();
  geo::Location disclosed = f.apply(my_location);
  NestedResponse resp;
  resp.level = Level::L4;
  resp.dimension = my_location.dimension();
  for (int i = 0; i < disclosed.dimension(); ++i) {
    ByteWriter w;
    w.i64(disclosed[i]);
    resp.parts.push_back(wrap(abe_pk, w.bytes(), tree, rng));
  }
  return resp;
}

QueryResult q_finish(QuerySession& session, const NestedResponse& resp,
                     const abe::SecretKey& abe_sk, const abe::PublicKey& abe_pk) {
  if (session.state != SessionState::RequestSent)
    throw Error("q_finish requires a session in RequestSent");
  if (resp.level != session.level) throw Error("response level mismatch");
  if (resp.dimension != session.dimension)
    throw Error("response dimension mismatch");
  if (resp.parts.size() != resp.expected_parts())
    throw Error("malformed response component count");
  session.advance(SessionState::Responded);

  std::vector<Bytes> payloads;
  payloads.reserve(resp.parts.size());
  for (const abe::Ciphertext& part : resp.parts)
    payloads.push_back(abe::decrypt(abe_pk, abe_sk, part));

  QueryResult out;
  out.level = session.level;
  switch (session.level) {
    case Level::L4: {
      std::vector<int64_t> coords;
      for (const Bytes& p : payloads) {
        ByteReader r(p);
        coords.push_back(r.i64());
        r.expect_done();
      }
      out.value = geo::Location(coords);
      break;
    }
    case Level::L3: {
      const paillier::Keypair& kp = *session.keys;
      paillier::Ciphertext ct =
          paillier::deserialize_ciphertext(kp.pk, payloads[0]);
      mpz_class v = paillier::decrypt(kp, ct);
      if (v > mpz_class(geo::kMaxDistanceSq))
        throw Error("decrypted distance exceeds the space diameter");
      DistanceResult d;
      d.dist_sq = v.get_ui();
      d.dist = std::sqrt(double(d.dist_sq));
      out.value = d;
      break;
    }
    case Level::L1:
    case Level::L2: {
      const paillier::Keypair& kp = *session.keys;
      mpz_class blinded_dist = paillier::decrypt(
          kp, paillier::deserialize_ciphertext(kp.pk, payloads[0]));
      mpz_class blinded_tau = paillier::decrypt(
          kp, paillier::deserialize_ciphertext(kp.pk, payloads[1]));
      Ordering o = blinded_dist < blinded_tau   ? Ordering::Less
                   : blinded_dist == blinded_tau ? Ordering::Equal
                                                 : Ordering::Greater;
      out.value = o;
      break;
    }
  }
  session.advance(SessionState::Done);
  return out;
}

namespace wire {

Bytes Message::encode() const {
  ByteWriter w;
  w.u8(type);
  w.u8(level);
  w.u8(dimension);
  for (const Bytes& c : components) w.blob(c);
  return w.take();
}

Message Message::decode(std::span<const uint8_t> raw) {
  ByteReader r(raw);
  Message msg;
  msg.type = r.u8();
  msg.level = r.u8();
  msg.dimension = r.u8();
  while (!r.done()) {
    auto c = r.blob();
    msg.components.emplace_back(c.begin(), c.end());
  }
  return msg;
}

Bytes encode_query_request(Level level, int dimension,
                           const DistanceRequest* req) {
  Message msg;
  msg.type = kQueryRequest;
  msg.level = uint8_t(level);
  msg.dimension = uint8_t(dimension);
  if (level != Level::L4) {
    if (req == nullptr) throw Error("levels 1-3 require a request body");
    msg.components.push_back(req->pk.serialize());
    msg.components.push_back(paillier::serialize(req->pk, req->enc_one));
    msg.components.push_back(paillier::serialize(req->pk, req->enc_sum_sq));
    for (const auto& ct : req->enc_minus_two_y)
      msg.components.push_back(paillier::serialize(req->pk, ct));
    if ((level == Level::L2) != req->has_tau())
      throw Error("E(tau^2) is carried exactly at level 2");
    if (req->enc_tau_sq)
      msg.components.push_back(paillier::serialize(req->pk, *req->enc_tau_sq));
  } else if (req != nullptr) {
    throw Error("level 4 has no querier payload");
  }
  return msg.encode();
}

DecodedQueryRequest decode_query_request(const Message& msg) {
  if (msg.type != kQueryRequest) throw DecodeError("not a query request");
  DecodedQueryRequest out{level_from_int(msg.level), msg.dimension, std::nullopt};
  if (out.dimension != 2 && out.dimension != 3)
    throw DecodeError("bad dimension byte");
  if (out.level == Level::L4) {
    if (!msg.components.empty())
      throw DecodeError("level 4 request must be empty");
    return out;
  }
  size_t want = 3 + size_t(out.dimension) + (out.level == Level::L2 ? 1 : 0);
  if (msg.components.size() != want)
    throw DecodeError("query request component count mismatch");

  DistanceRequest req;
  {
    ByteReader r(msg.components[0]);
    req.pk = paillier::PublicKey::deserialize(r);
    r.expect_done();
  }
  req.enc_one = paillier::deserialize_ciphertext(req.pk, msg.components[1]);
  req.enc_sum_sq = paillier::deserialize_ciphertext(req.pk, msg.components[2]);
  for (int i = 0; i < out.dimension; ++i)
    req.enc_minus_two_y.push_back(
        paillier::deserialize_ciphertext(req.pk, msg.components[3 + size_t(i)]));
  if (out.level == Level::L2)
    req.enc_tau_sq =
        paillier::deserialize_ciphertext(req.pk, msg.components.back());
  out.request = std::move(req);
  return out;
}

Bytes encode_query_response(const NestedResponse& resp) {
  if (resp.parts.size() != resp.expected_parts())
    throw Error("response component count does not match its level");
  Message msg;
  msg.type = kQueryResponse;
  msg.level = uint8_t(resp.level);
  msg.dimension = uint8_t(resp.dimension);
  for (const auto& part : resp.parts) msg.components.push_back(part.serialize());
  return msg.encode();
}

NestedResponse decode_query_response(const Message& msg) {
  if (msg.type != kQueryResponse) throw DecodeError("not a query response");
  NestedResponse resp;
  resp.level = level_from_int(msg.level);
  resp.dimension = msg.dimension;
  if (resp.dimension != 2 && resp.dimension != 3)
    throw DecodeError("bad dimension byte");
  for (const Bytes& c : msg.components) {
    ByteReader r(c);
    resp.parts.push_back(abe::Ciphertext::deserialize(r));
    r.expect_done();
  }
  if (resp.parts.size() != resp.expected_parts())
    throw DecodeError("response component count mismatch");
  return resp;
}

size_t request_ciphertext_bytes(Level level, int dimension, unsigned key_bits) {
  if (level == Level::L4) return 0;
  size_t per = (2 * size_t(key_bits) + 7) / 8;
  size_t count = 2 + size_t(dimension) + (level == Level::L2 ? 1 : 0);
  return per * count;
}

}  // namespace wire

}  // namespace plqp::protocol

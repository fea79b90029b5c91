#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plqp/protocol.hpp"

using namespace plqp;
using namespace plqp::protocol;

namespace {

struct Env {
  Rng rng{50};
  abe::PublicKey abe_pk;
  abe::MasterKey abe_mk;
  abe::SecretKey friend_key;
  abe::SecretKey stranger_key;
  abe::AccessTree tree{abe::AccessTree::Node::leaf("friend")};
  paillier::Keypair cached_1024;
  paillier::Keypair cached_256;

  Env() {
    auto [pk, mk] = abe::setup(rng);
    abe_pk = pk;
    abe_mk = mk;
    friend_key = abe::keygen(abe_pk, abe_mk, {"friend"}, rng);
    stranger_key = abe::keygen(abe_pk, abe_mk, {"stranger"}, rng);
    cached_1024 = paillier::Keypair::generate(1024, rng);
    cached_256 = paillier::Keypair::generate(256, rng);
  }
};

Env& env() {
  static Env e;
  return e;
}

SessionConfig small_space_3d() {
  SessionConfig cfg;
  cfg.space = geo::SpaceConfig::space(1 << 20, 1 << 20, 1 << 20);
  return cfg;
}

SessionConfig small_space_2d() {
  SessionConfig cfg;
  cfg.space = geo::SpaceConfig::plane(1 << 20, 1 << 20);
  return cfg;
}

// Runs one full level-3 round with the cached keypair.
uint64_t level3_round(const geo::Location& querier_at,
                      const geo::Location& publisher_at,
                      const SessionConfig& cfg) {
  Env& e = env();
  auto [session, req] =
      q_begin(Level::L3, querier_at, cfg, std::nullopt, e.rng, &e.cached_1024);
  NestedResponse resp =
      p_respond_distance(*req, publisher_at, e.tree, e.abe_pk, cfg, e.rng);
  return q_finish(session, resp, e.friend_key, e.abe_pk).distance().dist_sq;
}

Ordering level1_round(const geo::Location& querier_at,
                      const geo::Location& publisher_at, int64_t tau,
                      const SessionConfig& cfg) {
  Env& e = env();
  auto [session, req] =
      q_begin(Level::L1, querier_at, cfg, std::nullopt, e.rng, &e.cached_1024);
  NestedResponse resp =
      p_respond_compare(*req, publisher_at, e.tree, e.abe_pk, tau, cfg, e.rng);
  return q_finish(session, resp, e.friend_key, e.abe_pk).ordering();
}

Ordering level2_round(const geo::Location& querier_at,
                      const geo::Location& publisher_at, int64_t tau,
                      const SessionConfig& cfg) {
  Env& e = env();
  auto [session, req] =
      q_begin(Level::L2, querier_at, cfg, tau, e.rng, &e.cached_1024);
  NestedResponse resp = p_respond_compare(*req, publisher_at, e.tree, e.abe_pk,
                                          std::nullopt, cfg, e.rng);
  return q_finish(session, resp, e.friend_key, e.abe_pk).ordering();
}

}  // namespace

TEST_CASE("blind pair ranges") {
  Rng rng(51);
  mpz_class cap = mpz_class(1) << 1023;
  mpz_class dist_cap = mpz_class(1) << 52;
  for (int i = 0; i < 100000; ++i) {
    BlindPair b = sample_blinds(rng);
    CHECK(b.delta >= 1);
    CHECK(b.delta_prime >= 1);
    // delta * 2^52 + delta' < 2^1023: no wraparound for any legal distance
    if (b.delta * dist_cap + b.delta_prime >= cap) {
      CHECK(false);
      break;
    }
  }
  BlindPair edge{1, (mpz_class(1) << 1022) - 1};
  CHECK_NOTHROW(edge.validate());
  BlindPair zero{0, 5};
  CHECK_THROWS_AS(zero.validate(), Error);
  BlindPair wide{mpz_class(1) << 970, 5};
  CHECK_THROWS_AS(wide.validate(), Error);
}

TEST_CASE("blinded comparison preserves order for extreme values") {
  // sign(delta*a + delta' - (delta*b + delta')) == sign(a - b)
  Rng rng(52);
  mpz_class max_val = mpz_class(1) << 52;
  for (int i = 0; i < 1000; ++i) {
    BlindPair blind = sample_blinds(rng);
    mpz_class a = rng.below(max_val + 1);
    mpz_class b = rng.below(max_val + 1);
    mpz_class lhs = blind.delta * a + blind.delta_prime;
    mpz_class rhs = blind.delta * b + blind.delta_prime;
    CHECK(cmp(lhs, rhs) == cmp(a, b));
  }
}

TEST_CASE("request payload sizes reproduce the wire table") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();

  auto [s3, req3] =
      q_begin(Level::L3, geo::Location{1, 2, 3}, cfg, std::nullopt, e.rng,
              &e.cached_1024);
  CHECK(req3->ciphertext_payload_bytes() == 1280);

  auto [s2, req2] = q_begin(Level::L2, geo::Location{1, 2, 3}, cfg, 100, e.rng,
                            &e.cached_1024);
  CHECK(req2->ciphertext_payload_bytes() == 1536);

  auto [s1, req1] =
      q_begin(Level::L1, geo::Location{1, 2, 3}, cfg, std::nullopt, e.rng,
              &e.cached_1024);
  CHECK(req1->ciphertext_payload_bytes() == 1280);

  auto [s4, req4] =
      q_begin(Level::L4, geo::Location{1, 2, 3}, cfg, std::nullopt, e.rng);
  CHECK(!req4.has_value());

  // pure function of (level, d, bits)
  CHECK(wire::request_ciphertext_bytes(Level::L1, 3, 1024) == 1280);
  CHECK(wire::request_ciphertext_bytes(Level::L2, 3, 1024) == 1536);
  CHECK(wire::request_ciphertext_bytes(Level::L3, 3, 1024) == 1280);
  CHECK(wire::request_ciphertext_bytes(Level::L4, 3, 1024) == 0);
  CHECK(wire::request_ciphertext_bytes(Level::L3, 2, 1024) == 1024);
  CHECK(wire::request_ciphertext_bytes(Level::L2, 2, 512) == 640);
}

TEST_CASE("tau argument is validated per level") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  geo::Location at{1, 2, 3};
  CHECK_THROWS_AS(q_begin(Level::L3, at, cfg, 10, e.rng), Error);
  CHECK_THROWS_AS(q_begin(Level::L2, at, cfg, std::nullopt, e.rng), Error);
  CHECK_THROWS_AS(q_begin(Level::L2, at, cfg, -1, e.rng), Error);
  geo::Location outside{(1 << 20) + 5, 0, 0};
  CHECK_THROWS_AS(q_begin(Level::L3, outside, cfg, std::nullopt, e.rng), Error);
}

TEST_CASE("level 3 equals the plaintext distance oracle") {
  SessionConfig cfg = small_space_3d();
  CHECK(level3_round(geo::Location{7, 7, 7}, geo::Location{7, 7, 7}, cfg) == 0);
  CHECK(level3_round(geo::Location{0, 0, 0}, geo::Location{3, 4, 0}, cfg) == 25);

  Rng rng(53);
  for (int i = 0; i < 25; ++i) {
    std::vector<int64_t> a, b;
    for (int k = 0; k < 3; ++k) {
      a.push_back(rng.i64_range(0, (1 << 20) - 1));
      b.push_back(rng.i64_range(0, (1 << 20) - 1));
    }
    geo::Location qa(a), pb(b);
    CHECK(level3_round(qa, pb, cfg) == geo::euclid_dist_sq(qa, pb));
  }
}

TEST_CASE("level 3 works in the plane") {
  SessionConfig cfg = small_space_2d();
  CHECK(level3_round(geo::Location{0, 0}, geo::Location{3, 4}, cfg) == 25);
}

TEST_CASE("level 1 and 2 trichotomy") {
  SessionConfig cfg = small_space_3d();
  geo::Location q{0, 0, 0};
  // dist = 5
  geo::Location p{3, 4, 0};
  CHECK(level1_round(q, p, 10, cfg) == Ordering::Less);
  CHECK(level1_round(q, p, 5, cfg) == Ordering::Equal);
  CHECK(level1_round(q, p, 3, cfg) == Ordering::Greater);
  CHECK(level2_round(q, p, 10, cfg) == Ordering::Less);
  CHECK(level2_round(q, p, 5, cfg) == Ordering::Equal);
  CHECK(level2_round(q, p, 2, cfg) == Ordering::Greater);
}

TEST_CASE("level 4 disclosure functions") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  geo::Location pub{5, 6, 7};

  auto run = [&](const DisclosureFunction& f) {
    auto [session, req] =
        q_begin(Level::L4, geo::Location{0, 0, 0}, cfg, std::nullopt, e.rng);
    NestedResponse resp = p_respond_level4(pub, e.tree, e.abe_pk, f, e.rng);
    return q_finish(session, resp, e.friend_key, e.abe_pk).disclosed();
  };

  CHECK(run(DisclosureFunction::exact()) == pub);
  CHECK(run(DisclosureFunction::quantize(1024)) == geo::Location{0, 0, 0});

  Rng rng(54);
  for (int i = 0; i < 10; ++i) {
    int64_t cell = int64_t(1) << (1 + rng.u64_below(10));
    std::vector<int64_t> coords;
    for (int k = 0; k < 3; ++k) coords.push_back(rng.i64_range(0, (1 << 20) - 1));
    pub = geo::Location(coords);
    geo::Location got = run(DisclosureFunction::quantize(cell));
    for (int k = 0; k < 3; ++k) {
      CHECK(got[k] % cell == 0);
      CHECK(pub[k] - got[k] >= 0);
      CHECK(pub[k] - got[k] < cell);
    }
  }
  CHECK_THROWS_AS(DisclosureFunction::quantize(100), Error);
}

TEST_CASE("non-satisfying key yields an access error and no result") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  auto [session, req] = q_begin(Level::L3, geo::Location{1, 1, 1}, cfg,
                                std::nullopt, e.rng, &e.cached_1024);
  NestedResponse resp =
      p_respond_distance(*req, geo::Location{2, 2, 2}, e.tree, e.abe_pk, cfg, e.rng);
  CHECK_THROWS_AS(q_finish(session, resp, e.stranger_key, e.abe_pk),
                  abe::NotSatisfiedError);
}

TEST_CASE("publisher path never invokes Paillier decryption") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  auto [s3, req3] = q_begin(Level::L3, geo::Location{9, 9, 9}, cfg,
                            std::nullopt, e.rng, &e.cached_1024);
  auto [s1, req1] = q_begin(Level::L1, geo::Location{9, 9, 9}, cfg,
                            std::nullopt, e.rng, &e.cached_1024);
  auto [s2, req2] =
      q_begin(Level::L2, geo::Location{9, 9, 9}, cfg, 50, e.rng, &e.cached_1024);

  uint64_t before = paillier::decrypt_invocations();
  p_respond_distance(*req3, geo::Location{1, 2, 3}, e.tree, e.abe_pk, cfg, e.rng);
  p_respond_compare(*req1, geo::Location{1, 2, 3}, e.tree, e.abe_pk, 77, cfg, e.rng);
  p_respond_compare(*req2, geo::Location{1, 2, 3}, e.tree, e.abe_pk,
                    std::nullopt, cfg, e.rng);
  p_respond_level4(geo::Location{1, 2, 3}, e.tree, e.abe_pk,
                   DisclosureFunction::exact(), e.rng);
  CHECK(paillier::decrypt_invocations() == before);
}

TEST_CASE("threshold source must be unambiguous") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  auto [s1, req1] = q_begin(Level::L1, geo::Location{0, 0, 0}, cfg,
                            std::nullopt, e.rng, &e.cached_1024);
  // neither source
  CHECK_THROWS_AS(p_respond_compare(*req1, geo::Location{1, 1, 1}, e.tree,
                                    e.abe_pk, std::nullopt, cfg, e.rng),
                  Error);
  auto [s2, req2] =
      q_begin(Level::L2, geo::Location{0, 0, 0}, cfg, 9, e.rng, &e.cached_1024);
  // both sources
  CHECK_THROWS_AS(p_respond_compare(*req2, geo::Location{1, 1, 1}, e.tree,
                                    e.abe_pk, 10, cfg, e.rng),
                  Error);
}

TEST_CASE("comparison levels demand 1024-bit moduli") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  cfg.paillier_bits = 256;
  CHECK_THROWS_AS(q_begin(Level::L2, geo::Location{0, 0, 0}, cfg, 9, e.rng,
                          &e.cached_256),
                  Error);
  auto [s1, req1] = q_begin(Level::L1, geo::Location{0, 0, 0}, cfg,
                            std::nullopt, e.rng, &e.cached_256);
  CHECK_THROWS_AS(p_respond_compare(*req1, geo::Location{1, 1, 1}, e.tree,
                                    e.abe_pk, 10, cfg, e.rng),
                  Error);
  // level 3 tolerates small keys (values stay far below n)
  NestedResponse resp = p_respond_distance(*req1, geo::Location{3, 4, 0}, e.tree,
                                           e.abe_pk, cfg, e.rng);
  auto [s3, req3] = q_begin(Level::L3, geo::Location{0, 0, 0}, cfg,
                            std::nullopt, e.rng, &e.cached_256);
  NestedResponse resp3 = p_respond_distance(*req3, geo::Location{3, 4, 0},
                                            e.tree, e.abe_pk, cfg, e.rng);
  auto result = q_finish(s3, resp3, e.friend_key, e.abe_pk);
  CHECK(result.distance().dist_sq == 25);
}

TEST_CASE("session state advances monotonically") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();
  cfg.paillier_bits = 256;
  auto [session, req] = q_begin(Level::L3, geo::Location{0, 0, 0}, cfg,
                                std::nullopt, e.rng, &e.cached_256);
  CHECK(session.state == SessionState::RequestSent);
  NestedResponse resp = p_respond_distance(*req, geo::Location{1, 0, 0}, e.tree,
                                           e.abe_pk, cfg, e.rng);
  q_finish(session, resp, e.friend_key, e.abe_pk);
  CHECK(session.state == SessionState::Done);
  CHECK_THROWS_AS(q_finish(session, resp, e.friend_key, e.abe_pk), Error);
  CHECK_THROWS_AS(session.mark_discarded(), Error);

  auto [s2, req2] = q_begin(Level::L3, geo::Location{0, 0, 0}, cfg,
                            std::nullopt, e.rng, &e.cached_256);
  s2.mark_discarded();
  CHECK(s2.state == SessionState::Discarded);
}

TEST_CASE("wire roundtrip for requests and responses") {
  Env& e = env();
  SessionConfig cfg = small_space_3d();

  auto [s2, req] =
      q_begin(Level::L2, geo::Location{4, 5, 6}, cfg, 0, e.rng, &e.cached_1024);
  Bytes raw = wire::encode_query_request(Level::L2, 3, &*req);
  auto msg = wire::Message::decode(raw);
  auto decoded = wire::decode_query_request(msg);
  CHECK(decoded.level == Level::L2);
  CHECK(decoded.dimension == 3);
  CHECK(decoded.request->pk.n == req->pk.n);
  CHECK(decoded.request->enc_one.value == req->enc_one.value);
  CHECK(decoded.request->enc_tau_sq->value == req->enc_tau_sq->value);
  CHECK(decoded.request->ciphertext_payload_bytes() ==
        req->ciphertext_payload_bytes());

  NestedResponse resp = p_respond_compare(*decoded.request, geo::Location{1, 1, 1},
                                          e.tree, e.abe_pk, std::nullopt, cfg, e.rng);
  Bytes resp_raw = wire::encode_query_response(resp);
  NestedResponse resp2 =
      wire::decode_query_response(wire::Message::decode(resp_raw));
  CHECK(resp2.parts.size() == 2);
  CHECK(resp2.serialize() == resp_raw);

  // level 4 request encodes to header only
  Bytes empty_req = wire::encode_query_request(Level::L4, 3, nullptr);
  CHECK(empty_req.size() == 3);
  auto l4 = wire::decode_query_request(wire::Message::decode(empty_req));
  CHECK(!l4.request.has_value());
}

TEST_CASE("level-1 result is minimal") {
  SessionConfig cfg = small_space_3d();
  Env& e = env();
  auto [session, req] = q_begin(Level::L1, geo::Location{0, 0, 0}, cfg,
                                std::nullopt, e.rng, &e.cached_1024);
  NestedResponse resp = p_respond_compare(*req, geo::Location{3, 4, 0}, e.tree,
                                          e.abe_pk, 10, cfg, e.rng);
  QueryResult result = q_finish(session, resp, e.friend_key, e.abe_pk);
  CHECK(std::holds_alternative<Ordering>(result.value));
  CHECK(result.ordering() == Ordering::Less);
  CHECK_THROWS_AS(result.distance(), Error);
  CHECK_THROWS_AS(result.disclosed(), Error);
}

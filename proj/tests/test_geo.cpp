#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plqp/geo.hpp"
#include "plqp/rng.hpp"

using namespace plqp;
using namespace plqp::geo;

namespace {

// Schoolbook oracle, independent of the library path.
uint64_t dist_sq_oracle(const std::vector<int64_t>& a,
                        const std::vector<int64_t>& b) {
  uint64_t sum = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    long double d = (long double)a[i] - (long double)b[i];
    sum += (uint64_t)(d * d);
  }
  return sum;
}

}  // namespace

TEST_CASE("location validation") {
  CHECK_NOTHROW(Location({0, 0}));
  CHECK_NOTHROW(Location({kMaxCoordinate, -kMaxCoordinate, 5}));
  CHECK_THROWS_AS(Location({kMaxCoordinate + 1, 0}), Error);
  CHECK_THROWS_AS(Location({1}), Error);
  CHECK_THROWS_AS(Location({1, 2, 3, 4}), Error);
}

TEST_CASE("squared distance basics") {
  Location a{1, 2, 3};
  CHECK(euclid_dist_sq(a, a) == 0);
  CHECK(euclid_dist_sq(Location{0, 0, 0}, Location{3, 4, 0}) == 25);
  CHECK_THROWS_AS(euclid_dist_sq(Location{0, 0}, Location{0, 0, 0}), Error);
}

TEST_CASE("squared distance matches schoolbook oracle") {
  Rng rng(20);
  for (int i = 0; i < 100; ++i) {
    int dim = (i % 2) ? 2 : 3;
    std::vector<int64_t> a, b;
    for (int k = 0; k < dim; ++k) {
      a.push_back(rng.i64_range(-kMaxCoordinate, kMaxCoordinate));
      b.push_back(rng.i64_range(-kMaxCoordinate, kMaxCoordinate));
    }
    CHECK(euclid_dist_sq(Location(a), Location(b)) == dist_sq_oracle(a, b));
  }
}

TEST_CASE("distance symmetry and triangle inequality") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    std::vector<int64_t> pts[3];
    for (auto& p : pts)
      for (int k = 0; k < 3; ++k) p.push_back(rng.i64_range(-1000000, 1000000));
    Location a(pts[0]), b(pts[1]), c(pts[2]);
    CHECK(euclid_dist_sq(a, b) == euclid_dist_sq(b, a));
    double ab = std::sqrt((double)euclid_dist_sq(a, b));
    double bc = std::sqrt((double)euclid_dist_sq(b, c));
    double ac = std::sqrt((double)euclid_dist_sq(a, c));
    CHECK(ac <= ab + bc + 1e-6);
  }
}

TEST_CASE("surface distance endpoints") {
  double R = 6371000.0;
  CHECK(surface_from_euclid(0, R) == 0);
  // antipodal chord maps to half the circumference
  CHECK(surface_from_euclid(2 * R, R) == doctest::Approx(std::acos(-1.0) * R));
  CHECK_THROWS_AS(surface_from_euclid(2 * R + 1, R), Error);
}

TEST_CASE("surface conversion roundtrip") {
  Rng rng(22);
  double R = 6371000.0;
  for (int i = 0; i < 1000; ++i) {
    double dist = rng.real01() * 2 * R;
    double back = euclid_threshold_from_surface(surface_from_euclid(dist, R), R);
    if (dist > 0) CHECK(std::abs(back - dist) / dist < 1e-9);
  }
}

TEST_CASE("surface distance is strictly increasing") {
  double R = 6371000.0;
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    double d = 2 * R * i / 1000.0;
    double sd = surface_from_euclid(d, R);
    CHECK(sd > prev);
    prev = sd;
  }
}

TEST_CASE("geodetic conversion axis conventions") {
  SpaceConfig cfg = SpaceConfig::earth_centered();
  int64_t R = 6371000;
  CHECK(to_grid(0, 0, 0, cfg) == Location{R, 0, 0});
  CHECK(to_grid(90, 123, 0, cfg) == Location{0, 0, R});
  CHECK(to_grid(-90, -45, 0, cfg) == Location{0, 0, -R});
  CHECK_THROWS_AS(to_grid(91, 0, 0, cfg), Error);
  CHECK_THROWS_AS(to_grid(0, 181, 0, cfg), Error);
}

TEST_CASE("grid rounding perturbs distances by at most sqrt(3)") {
  Rng rng(23);
  SpaceConfig cfg = SpaceConfig::earth_centered();
  double max_seen = 0;
  for (int i = 0; i < 1000; ++i) {
    double lat1 = rng.real01() * 180 - 90, lon1 = rng.real01() * 360 - 180;
    double lat2 = rng.real01() * 180 - 90, lon2 = rng.real01() * 360 - 180;
    double alt1 = rng.real01() * 1000, alt2 = rng.real01() * 1000;
    auto exact = [&](double lat, double lon, double alt) {
      double r = cfg.earth_radius + alt;
      double la = lat * std::acos(-1.0) / 180, lo = lon * std::acos(-1.0) / 180;
      return std::array<double, 3>{r * std::cos(la) * std::cos(lo),
                                   r * std::cos(la) * std::sin(lo),
                                   r * std::sin(la)};
    };
    auto p1 = exact(lat1, lon1, alt1), p2 = exact(lat2, lon2, alt2);
    double true_dist = std::sqrt((p1[0] - p2[0]) * (p1[0] - p2[0]) +
                                 (p1[1] - p2[1]) * (p1[1] - p2[1]) +
                                 (p1[2] - p2[2]) * (p1[2] - p2[2]));
    Location g1 = to_grid(lat1, lon1, alt1, cfg);
    Location g2 = to_grid(lat2, lon2, alt2, cfg);
    double grid_dist = std::sqrt((double)euclid_dist_sq(g1, g2));
    max_seen = std::max(max_seen, std::abs(grid_dist - true_dist));
  }
  CHECK(max_seen <= std::sqrt(3.0) + 1e-9);
  MESSAGE("max rounding perturbation over 1000 pairs: ", max_seen,
          " (sqrt(2) bound held: ", max_seen <= std::sqrt(2.0), ")");
}

TEST_CASE("space config validation and diameter") {
  SpaceConfig plane = SpaceConfig::plane(1000, 1000);
  CHECK(plane.dimension == 2);
  CHECK(plane.diameter_sq() == uint64_t(999) * 999 * 2);
  CHECK(plane.grid_points() == doctest::Approx(1e6));
  CHECK(plane.contains(Location{0, 0}));
  CHECK(plane.contains(Location{999, 999}));
  CHECK(!plane.contains(Location{1000, 0}));
  CHECK(!plane.contains(Location{0, 0, 0}));

  // box diameter must stay within 2^26 meters
  CHECK_THROWS_AS(SpaceConfig::plane(int64_t(1) << 26, int64_t(1) << 26), Error);
  CHECK_NOTHROW(SpaceConfig::earth_centered());
}

TEST_CASE("location byte serialization") {
  Location a{-5, 12345678, 42};
  Bytes raw = a.to_bytes();
  CHECK(raw.size() == 24);
  CHECK(Location::from_bytes(raw, 3) == a);
  CHECK_THROWS(Location::from_bytes(raw, 2));
}

#include "plqp/geo.hpp"

#include <cmath>

namespace plqp::geo {

namespace {

void check_coords(const std::vector<int64_t>& coords) {
  if (coords.size() != 2 && coords.size() != 3)
    throw Error("location must be 2- or 3-dimensional");
  for (int64_t c : coords)
    if (c < -kMaxCoordinate || c > kMaxCoordinate)
      throw Error("coordinate magnitude exceeds 2^26 meters");
}

}  // namespace

Location::Location(std::initializer_list<int64_t> coords) : coords_(coords) {
  check_coords(coords_);
}

Location::Location(std::vector<int64_t> coords) : coords_(std::move(coords)) {
  check_coords(coords_);
}

Bytes Location::to_bytes() const {
  ByteWriter w;
  for (int64_t c : coords_) w.i64(c);
  return w.take();
}

Location Location::from_bytes(std::span<const uint8_t> raw, int dimension) {
  if (dimension != 2 && dimension != 3) throw Error("bad location dimension");
  ByteReader r(raw);
  std::vector<int64_t> coords;
  for (int i = 0; i < dimension; ++i) coords.push_back(r.i64());
  r.expect_done();
  return Location(std::move(coords));
}

uint64_t euclid_dist_sq(const Location& a, const Location& b) {
  if (a.dimension() != b.dimension())
    throw Error("euclid_dist_sq: dimension mismatch");
  uint64_t sum = 0;
  for (int i = 0; i < a.dimension(); ++i) {
    int64_t d = a[i] - b[i];
    sum += uint64_t(d * d);
  }
  return sum;
}

double surface_from_euclid(double dist, double earth_radius) {
  if (earth_radius <= 0) throw Error("earth radius must be positive");
  if (dist < 0 || dist > 2 * earth_radius)
    throw Error("chord length must lie in [0, 2R]");
  return 2 * earth_radius * std::asin(dist / (2 * earth_radius));
}

double euclid_threshold_from_surface(double surface_dist, double earth_radius) {
  if (earth_radius <= 0) throw Error("earth radius must be positive");
  double pi_r = std::acos(-1.0) * earth_radius;
  if (surface_dist < 0 || surface_dist > pi_r * (1 + 1e-12))
    throw Error("surface distance must lie in [0, pi*R]");
  return 2 * earth_radius * std::sin(surface_dist / (2 * earth_radius));
}

SpaceConfig SpaceConfig::plane(int64_t x_count, int64_t y_count) {
  return box(2, {0, 0, 0}, {x_count - 1, y_count - 1, 0});
}

SpaceConfig SpaceConfig::space(int64_t x_count, int64_t y_count, int64_t z_count) {
  return box(3, {0, 0, 0}, {x_count - 1, y_count - 1, z_count - 1});
}

SpaceConfig SpaceConfig::box(int dimension, std::array<int64_t, 3> lo,
                             std::array<int64_t, 3> hi) {
  SpaceConfig cfg;
  cfg.dimension = dimension;
  cfg.lo = lo;
  cfg.hi = hi;
  cfg.validate();
  return cfg;
}

SpaceConfig SpaceConfig::earth_centered() {
  // Radius plus generous atmosphere, still comfortably inside the caps.
  int64_t r = 6'500'000;
  return box(3, {-r, -r, -r}, {r, r, r});
}

void SpaceConfig::validate() const {
  if (dimension != 2 && dimension != 3)
    throw Error("space dimension must be 2 or 3");
  uint64_t diag = 0;
  for (int i = 0; i < dimension; ++i) {
    if (lo[size_t(i)] > hi[size_t(i)]) throw Error("empty coordinate range");
    if (lo[size_t(i)] < -kMaxCoordinate || hi[size_t(i)] > kMaxCoordinate)
      throw Error("coordinate bound exceeds 2^26 meters");
    uint64_t e = uint64_t(extent(i));
    diag += e * e;
  }
  // Keeps delta * dist^2 + delta' below 2^1023 <= n for 1024-bit keys.
  if (diag > kMaxDistanceSq)
    throw Error("box diameter exceeds 2^26 meters");
}

bool SpaceConfig::contains(const Location& loc) const {
  if (loc.dimension() != dimension) return false;
  for (int i = 0; i < dimension; ++i)
    if (loc[i] < lo[size_t(i)] || loc[i] > hi[size_t(i)]) return false;
  return true;
}

uint64_t SpaceConfig::diameter_sq() const {
  uint64_t diag = 0;
  for (int i = 0; i < dimension; ++i) {
    uint64_t e = uint64_t(extent(i));
    diag += e * e;
  }
  return diag;
}

double SpaceConfig::diameter() const { return std::sqrt(double(diameter_sq())); }

double SpaceConfig::grid_points() const {
  double count = 1;
  for (int i = 0; i < dimension; ++i) count *= double(extent(i) + 1);
  return count;
}

Location to_grid(double lat_deg, double lon_deg, double alt_m,
                 const SpaceConfig& config) {
  if (lat_deg < -90 || lat_deg > 90) throw Error("latitude out of [-90, 90]");
  if (lon_deg < -180 || lon_deg > 180) throw Error("longitude out of [-180, 180]");
  double r = config.earth_radius + alt_m;
  if (r <= 0 || r > double(kMaxCoordinate))
    throw Error("altitude outside representable range");
  double lat = lat_deg * std::acos(-1.0) / 180.0;
  double lon = lon_deg * std::acos(-1.0) / 180.0;
  int64_t x = std::llround(r * std::cos(lat) * std::cos(lon));
  int64_t y = std::llround(r * std::cos(lat) * std::sin(lon));
  int64_t z = std::llround(r * std::sin(lat));
  return Location{x, y, z};
}

}  // namespace plqp::geo

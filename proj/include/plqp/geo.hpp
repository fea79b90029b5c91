#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "plqp/encoding.hpp"

namespace plqp::geo {

class Error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Coordinates are capped at 2^26 meters in magnitude so squared distances
// inside any valid SpaceConfig box stay below 2^52 and never collide with
// the protocol's blinding ranges.
inline constexpr int64_t kMaxCoordinate = int64_t(1) << 26;
inline constexpr uint64_t kMaxDistanceSq = uint64_t(1) << 52;

// Integer grid point in 2- or 3-dimensional Euclidean space (meters).
class Location {
 public:
  Location(std::initializer_list<int64_t> coords);
  explicit Location(std::vector<int64_t> coords);

  int dimension() const { return int(coords_.size()); }
  int64_t operator[](int axis) const { return coords_.at(size_t(axis)); }
  const std::vector<int64_t>& coords() const { return coords_; }

  bool operator==(const Location& other) const = default;

  Bytes to_bytes() const;  // d signed 64-bit big-endian integers
  static Location from_bytes(std::span<const uint8_t> raw, int dimension);

 private:
  std::vector<int64_t> coords_;
};

// Exact squared Euclidean distance; dimensions must match.
uint64_t euclid_dist_sq(const Location& a, const Location& b);

// SD = 2R * arcsin(dist / 2R), defined for 0 <= dist <= 2R.
double surface_from_euclid(double dist, double earth_radius);
// Inverse: dist = 2R * sin(SD / 2R).
double euclid_threshold_from_surface(double surface_dist, double earth_radius);

// Axis-aligned coordinate box the protocol operates in. The box diameter
// is capped at 2^26 m which keeps squared distances within 2^52.
struct SpaceConfig {
  int dimension = 3;
  std::array<int64_t, 3> lo{0, 0, 0};
  std::array<int64_t, 3> hi{0, 0, 0};  // inclusive
  double earth_radius = 6'371'000.0;

  static SpaceConfig plane(int64_t x_count, int64_t y_count);
  static SpaceConfig space(int64_t x_count, int64_t y_count, int64_t z_count);
  static SpaceConfig box(int dimension, std::array<int64_t, 3> lo,
                         std::array<int64_t, 3> hi);
  // Whole-earth 3D box centered on the geocenter.
  static SpaceConfig earth_centered();

  void validate() const;
  bool contains(const Location& loc) const;
  int64_t extent(int axis) const { return hi[size_t(axis)] - lo[size_t(axis)]; }
  uint64_t diameter_sq() const;  // sum of squared extents
  double diameter() const;
  // Number of grid points (used by the level-1 outside-attack estimate).
  double grid_points() const;
};

// Spherical-earth geodetic to grid conversion, rounded to the nearest
// meter. Latitude/longitude in degrees, altitude in meters above the
// sphere of radius config.earth_radius.
Location to_grid(double lat_deg, double lon_deg, double alt_m,
                 const SpaceConfig& config);

}  // namespace plqp::geo

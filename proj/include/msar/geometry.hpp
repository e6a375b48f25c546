#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "msar/types.hpp"

namespace msar {

/// Unit vector [cos a, sin a].
Vec2 unit_direction(double angle);

/// Bistatic range vector e_kl = e_k + e_l.
Vec2 bistatic_vector(const Vec2& e_tx, const Vec2& e_rx);

enum class AngleLayout {
  random,   // i.i.d. uniform over the cone
  uniform,  // evenly spaced, endpoints included
};

// Far-field sensor layout. Only directions and origin-referenced delays enter
// the measurement model; absolute ranges are never needed.
//
// In monostatic mode every transmitter carries its own collocated receiver:
// rx_angles mirrors tx_angles and only the (k, k) pairs are measured.
struct SensorGeometry {
  std::vector<double> tx_angles;
  std::vector<double> rx_angles;
  std::vector<double> origin_delays_tx;  // tau_k(x_o), seconds
  std::vector<double> origin_delays_rx;  // tau_l(x_o), seconds
  double cone_center = 0.0;
  double cone_width = 0.0;
  double wave_speed = kSpeedOfLight;
  bool monostatic = false;

  std::size_t n_tx() const { return tx_angles.size(); }
  std::size_t n_rx() const { return rx_angles.size(); }
  /// Receivers recorded for each transmitted pulse (1 when monostatic).
  std::size_t receivers_per_pulse() const { return monostatic ? 1 : n_rx(); }
  /// Receiver index of the j-th recorded channel for transmitter k.
  std::size_t receiver_for(std::size_t tx, std::size_t channel) const {
    return monostatic ? tx : channel;
  }

  Vec2 tx_direction(std::size_t k) const { return unit_direction(tx_angles.at(k)); }
  Vec2 rx_direction(std::size_t l) const { return unit_direction(rx_angles.at(l)); }
  Vec2 bistatic(std::size_t k, std::size_t l) const {
    return bistatic_vector(tx_direction(k), rx_direction(l));
  }
  double origin_delay(std::size_t k, std::size_t l) const {
    return origin_delays_tx.at(k) + origin_delays_rx.at(l);
  }

  /// Throws ConfigError if any angle leaves the cone or a delay is negative/non-finite.
  void validate() const;
};

struct GeometryOptions {
  std::size_t n_tx = 1;
  std::size_t n_rx = 1;
  double cone_center = 0.0;
  double cone_width = deg_to_rad(45.0);
  bool monostatic = false;
  AngleLayout layout = AngleLayout::random;
  double origin_delay = 0.0;  // common tau_k(x_o) = tau_l(x_o)
  double wave_speed = kSpeedOfLight;
  std::uint64_t seed = 0;
};

SensorGeometry make_sensor_geometry(const GeometryOptions& options);

// Regular pixel grid centred on the scene origin. Pixel p maps to (ix, iy)
// row-major with x varying fastest: p = iy * nx + ix.
struct PixelGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 1.0;
  double dy = 1.0;

  std::size_t size() const { return nx * ny; }
  std::size_t index_of(std::size_t ix, std::size_t iy) const;
  std::pair<std::size_t, std::size_t> coords_of(std::size_t p) const;

  double x_at(std::size_t ix) const { return (static_cast<double>(ix) - 0.5 * static_cast<double>(nx - 1)) * dx; }
  double y_at(std::size_t iy) const { return (static_cast<double>(iy) - 0.5 * static_cast<double>(ny - 1)) * dy; }
  Vec2 center(std::size_t p) const;

  /// Half-size of the scene along x and y (cell edges, not centres).
  double half_width() const { return 0.5 * static_cast<double>(nx) * dx; }
  double half_height() const { return 0.5 * static_cast<double>(ny) * dy; }
  /// Radius L of the disc enclosing the whole scene.
  double extent() const;

  void validate() const;
};

struct Scatterer {
  std::size_t pixel = 0;
  Complex reflectivity{0.0, 0.0};
  Vec2 velocity = Vec2::Zero();
  std::size_t object = 0;
};

struct SceneTruth {
  std::vector<Scatterer> scatterers;
  // Set when more than one scatterer may share a pixel.
  bool multi_scatterer = false;

  /// |s_p| image summed over co-located scatterers (length grid.size()).
  std::vector<double> magnitudes(const PixelGrid& grid) const;
  /// Same scene with every velocity set to zero.
  SceneTruth frozen() const;
};

// A rigid object: `count` scatterers drawn without replacement from the block
// [ix0, ix0 + width) x [iy0, iy0 + height), all sharing one velocity.
struct ObjectSpec {
  std::size_t ix0 = 0;
  std::size_t iy0 = 0;
  std::size_t width = 1;
  std::size_t height = 1;
  std::size_t count = 1;
  double speed = 0.0;      // m/s
  double direction = 0.0;  // radians

  Vec2 velocity() const { return speed * unit_direction(direction); }
};

SceneTruth make_scene(const PixelGrid& grid, std::span<const ObjectSpec> objects,
                      std::uint64_t seed, bool allow_overlap = false);

}  // namespace msar

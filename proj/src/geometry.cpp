#include "msar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "msar/random.hpp"

namespace msar {

Vec2 unit_direction(double angle) { return Vec2(std::cos(angle), std::sin(angle)); }

Vec2 bistatic_vector(const Vec2& e_tx, const Vec2& e_rx) { return e_tx + e_rx; }

namespace {

std::vector<double> draw_angles(std::size_t n, double lo, double hi, AngleLayout layout, Rng& rng) {
  std::vector<double> out(n);
  if (layout == AngleLayout::uniform) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = n == 1 ? 0.5 * (lo + hi)
                      : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
  }
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& a : out) a = dist(rng);
  return out;
}

}  // namespace

void SensorGeometry::validate() const {
  if (tx_angles.empty() || rx_angles.empty())
    throw ConfigError("geometry: at least one transmitter and one receiver are required");
  if (!(cone_width > 0.0) || cone_width > kPi / 2 + 1e-12)
    throw ConfigError("geometry: cone width must lie in (0, pi/2]");
  const double half = 0.5 * cone_width + 1e-12;
  auto in_cone = [&](double a) { return std::isfinite(a) && std::abs(a - cone_center) <= half; };
  for (double a : tx_angles)
    if (!in_cone(a)) throw ConfigError("geometry: transmitter angle outside the forward cone");
  for (double a : rx_angles)
    if (!in_cone(a)) throw ConfigError("geometry: receiver angle outside the forward cone");
  if (origin_delays_tx.size() != tx_angles.size() || origin_delays_rx.size() != rx_angles.size())
    throw ConfigError("geometry: one origin delay per element is required");
  for (const auto* delays : {&origin_delays_tx, &origin_delays_rx})
    for (double d : *delays)
      if (!std::isfinite(d) || d < 0.0)
        throw ConfigError("geometry: origin delays must be finite and nonnegative");
  if (monostatic && rx_angles != tx_angles)
    throw ConfigError("geometry: monostatic receivers must be tied to their transmitters");
  if (!(wave_speed > 0.0)) throw ConfigError("geometry: wave speed must be positive");
}

SensorGeometry make_sensor_geometry(const GeometryOptions& options) {
  if (options.n_tx < 1 || options.n_rx < 1)
    throw ConfigError("geometry: n_tx and n_rx must be at least 1");
  if (!(options.cone_width > 0.0) || options.cone_width > kPi / 2 + 1e-12)
    throw ConfigError("geometry: cone width must lie in (0, pi/2]");
  if (options.monostatic && options.n_rx != options.n_tx)
    throw ConfigError("geometry: monostatic mode requires n_rx == n_tx");
  if (!std::isfinite(options.origin_delay) || options.origin_delay < 0.0)
    throw ConfigError("geometry: origin delay must be finite and nonnegative");

  Rng rng(options.seed);
  const double lo = options.cone_center - 0.5 * options.cone_width;
  const double hi = options.cone_center + 0.5 * options.cone_width;

  SensorGeometry g;
  g.cone_center = options.cone_center;
  g.cone_width = options.cone_width;
  g.wave_speed = options.wave_speed;
  g.monostatic = options.monostatic;
  g.tx_angles = draw_angles(options.n_tx, lo, hi, options.layout, rng);
  g.rx_angles = options.monostatic ? g.tx_angles
                                   : draw_angles(options.n_rx, lo, hi, options.layout, rng);
  g.origin_delays_tx.assign(g.tx_angles.size(), options.origin_delay);
  g.origin_delays_rx.assign(g.rx_angles.size(), options.origin_delay);
  g.validate();
  return g;
}

std::size_t PixelGrid::index_of(std::size_t ix, std::size_t iy) const {
  if (ix >= nx || iy >= ny) throw ContractError("pixel coordinates out of range");
  return iy * nx + ix;
}

std::pair<std::size_t, std::size_t> PixelGrid::coords_of(std::size_t p) const {
  if (p >= size()) throw ContractError("pixel index out of range");
  return {p % nx, p / nx};
}

Vec2 PixelGrid::center(std::size_t p) const {
  const auto [ix, iy] = coords_of(p);
  return Vec2(x_at(ix), y_at(iy));
}

double PixelGrid::extent() const { return std::hypot(half_width(), half_height()); }

void PixelGrid::validate() const {
  if (nx == 0 || ny == 0) throw ConfigError("grid: nx and ny must be positive");
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
    throw ConfigError("grid: cell sizes must be positive and finite");
}

std::vector<double> SceneTruth::magnitudes(const PixelGrid& grid) const {
  std::vector<double> mag(grid.size(), 0.0);
  if (!multi_scatterer) {
    for (const auto& s : scatterers) mag.at(s.pixel) = std::abs(s.reflectivity);
    return mag;
  }
  std::vector<Complex> sum(grid.size(), Complex{});
  for (const auto& s : scatterers) sum.at(s.pixel) += s.reflectivity;
  for (std::size_t p = 0; p < sum.size(); ++p) mag[p] = std::abs(sum[p]);
  return mag;
}

SceneTruth SceneTruth::frozen() const {
  SceneTruth out = *this;
  for (auto& s : out.scatterers) s.velocity = Vec2::Zero();
  return out;
}

SceneTruth make_scene(const PixelGrid& grid, std::span<const ObjectSpec> objects,
                      std::uint64_t seed, bool allow_overlap) {
  grid.validate();
  std::vector<int> owner(grid.size(), -1);
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const auto& obj = objects[o];
    if (obj.width == 0 || obj.height == 0 || obj.ix0 + obj.width > grid.nx ||
        obj.iy0 + obj.height > grid.ny) {
      std::ostringstream msg;
      msg << "scene: object " << o << " block lies outside the " << grid.nx << "x" << grid.ny
          << " grid";
      throw ConfigError(msg.str());
    }
    if (obj.count > obj.width * obj.height) {
      std::ostringstream msg;
      msg << "scene: object " << o << " requests " << obj.count << " scatterers in a block of "
          << obj.width * obj.height << " pixels";
      throw ConfigError(msg.str());
    }
    for (std::size_t iy = obj.iy0; iy < obj.iy0 + obj.height; ++iy) {
      for (std::size_t ix = obj.ix0; ix < obj.ix0 + obj.width; ++ix) {
        auto& slot = owner[grid.index_of(ix, iy)];
        if (slot >= 0 && !allow_overlap) {
          std::ostringstream msg;
          msg << "scene: objects " << slot << " and " << o << " overlap";
          throw ConfigError(msg.str());
        }
        slot = static_cast<int>(o);
      }
    }
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  SceneTruth scene;
  scene.multi_scatterer = allow_overlap;
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const auto& obj = objects[o];
    std::vector<std::size_t> block;
    block.reserve(obj.width * obj.height);
    for (std::size_t iy = obj.iy0; iy < obj.iy0 + obj.height; ++iy)
      for (std::size_t ix = obj.ix0; ix < obj.ix0 + obj.width; ++ix)
        block.push_back(grid.index_of(ix, iy));
    // Partial Fisher-Yates with an explicit index draw keeps the sample
    // independent of std::shuffle's implementation.
    for (std::size_t i = 0; i < obj.count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, block.size() - 1);
      std::swap(block[i], block[pick(rng)]);
    }
    std::vector<std::size_t> chosen(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(obj.count));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t p : chosen) {
      Scatterer s;
      s.pixel = p;
      s.reflectivity = std::polar(1.0, phase(rng));
      s.velocity = obj.velocity();
      s.object = o;
      scene.scatterers.push_back(s);
    }
  }
  return scene;
}

}  // namespace msar

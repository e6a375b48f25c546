#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "msar/geometry.hpp"
#include "msar/types.hpp"

namespace msar {

struct VelocityBand {
  double mag_min = 0.0;
  double mag_max = 0.0;
  double mag_step = 1.0;
};

// Ordered velocity hypotheses. Entry 0 is always the zero velocity so that
// stationary scatterers are representable and win argmax ties.
class VelocityGrid {
public:
  VelocityGrid() : velocities_{Vec2::Zero()} {}
  explicit VelocityGrid(std::vector<Vec2> velocities);

  /// The static dictionary {0}.
  static VelocityGrid stationary() { return VelocityGrid(); }

  std::size_t size() const { return velocities_.size(); }
  const Vec2& operator[](std::size_t n) const { return velocities_.at(n); }
  const std::vector<Vec2>& velocities() const { return velocities_; }

  bool contains(const Vec2& v, double tol = 0.0) const;
  /// Indices of every hypothesis within `tol` of the minimum distance to v.
  std::vector<std::size_t> nearest(const Vec2& v, double tol = 1e-9) const;

  /// Union of two grids; the first keeps its order, new entries are appended.
  VelocityGrid merged(const VelocityGrid& other) const;

private:
  std::vector<Vec2> velocities_;
};

/// {0} followed by magnitude x direction over every band and angle.
VelocityGrid build_velocity_grid(std::span<const VelocityBand> bands, std::span<const double> angles);

/// 1-based (p, n) -> (p - 1) * N + n.
std::size_t flat_index(std::size_t p, std::size_t n, std::size_t n_hyp);
/// Inverse of flat_index, 1-based on both sides.
std::pair<std::size_t, std::size_t> unflat_index(std::size_t flat, std::size_t n_hyp);

// Extended reflectivity s_b: P blocks of N hypotheses, block p holding s_p b_pn.
struct ExtendedImage {
  ComplexVector coeffs;
  std::size_t n_pixels = 0;
  std::size_t n_hyp = 0;

  ExtendedImage() = default;
  ExtendedImage(std::size_t pixels, std::size_t hyps)
      : coeffs(ComplexVector::Zero(static_cast<Eigen::Index>(pixels * hyps))), n_pixels(pixels), n_hyp(hyps) {}
  ExtendedImage(ComplexVector c, std::size_t pixels, std::size_t hyps);

  // 0-based accessors.
  Complex& at(std::size_t p, std::size_t n) { return coeffs[static_cast<Eigen::Index>(p * n_hyp + n)]; }
  Complex at(std::size_t p, std::size_t n) const { return coeffs[static_cast<Eigen::Index>(p * n_hyp + n)]; }
};

struct WrapReport {
  double worst_spacing = 0.0;  // largest nearest-neighbour distance, m/s
  double worst_phase = 0.0;    // radians accumulated over the CPI at that spacing
  double margin = 0.0;         // pi - worst_phase
  bool ok = true;
  std::size_t worst_index = 0;
};

/// (2 pi f_max / c) |e_kl|_max |dv| cpi.
double wrap_phase_span(double dv, double cpi, double f_max_hz, double e_kl_max_norm,
                       double c = kSpeedOfLight);

// Checks that neighbouring hypotheses stay less than pi apart in motion phase
// over the CPI. Advisory: violations are reported, never thrown.
WrapReport validate_grid_against_wrap(const VelocityGrid& grid, double cpi, double f_max_hz,
                                      double e_kl_max_norm, double c = kSpeedOfLight);

}  // namespace msar

#include "msar/velocity_dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace msar {

VelocityGrid::VelocityGrid(std::vector<Vec2> velocities) : velocities_(std::move(velocities)) {
  if (velocities_.empty() || velocities_.front() != Vec2::Zero())
    throw ConfigError("velocity grid: the first hypothesis must be the zero velocity");
  for (std::size_t i = 0; i < velocities_.size(); ++i) {
    if (!velocities_[i].allFinite()) throw ConfigError("velocity grid: non-finite hypothesis");
    for (std::size_t j = 0; j < i; ++j)
      if (velocities_[i] == velocities_[j]) throw ConfigError("velocity grid: duplicate hypothesis");
  }
}

bool VelocityGrid::contains(const Vec2& v, double tol) const {
  return std::any_of(velocities_.begin(), velocities_.end(),
                     [&](const Vec2& u) { return (u - v).norm() <= tol; });
}

std::vector<std::size_t> VelocityGrid::nearest(const Vec2& v, double tol) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : velocities_) best = std::min(best, (u - v).norm());
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < velocities_.size(); ++n)
    if ((velocities_[n] - v).norm() <= best + tol) out.push_back(n);
  return out;
}

VelocityGrid VelocityGrid::merged(const VelocityGrid& other) const {
  std::vector<Vec2> all = velocities_;
  for (const auto& v : other.velocities_)
    if (std::find(all.begin(), all.end(), v) == all.end()) all.push_back(v);
  return VelocityGrid(std::move(all));
}

VelocityGrid build_velocity_grid(std::span<const VelocityBand> bands, std::span<const double> angles) {
  std::vector<VelocityBand> sorted(bands.begin(), bands.end());
  for (const auto& b : sorted) {
    if (!(b.mag_step > 0.0) || !std::isfinite(b.mag_step))
      throw ConfigError("velocity grid: band steps must be positive");
    if (!(b.mag_min >= 0.0) || !(b.mag_max >= b.mag_min) || !std::isfinite(b.mag_max))
      throw ConfigError("velocity grid: bands need 0 <= mag_min <= mag_max");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.mag_min < b.mag_min; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].mag_min <= sorted[i - 1].mag_max)
      throw ConfigError("velocity grid: bands overlap");

  // Magnitudes in the caller's band order; dedupe on the generating
  // (magnitude, angle) pair. Any zero magnitude collapses onto v_1 = 0.
  std::vector<std::pair<double, double>> seen;
  std::vector<Vec2> velocities{Vec2::Zero()};
  for (const auto& band : bands) {
    const auto count = static_cast<std::size_t>(
        std::floor((band.mag_max - band.mag_min) / band.mag_step + 1e-9)) + 1;
    for (double angle : angles) {
      if (!std::isfinite(angle)) throw ConfigError("velocity grid: non-finite angle");
      for (std::size_t i = 0; i < count; ++i) {
        const double mag = band.mag_min + static_cast<double>(i) * band.mag_step;
        if (mag == 0.0) continue;
        if (std::find(seen.begin(), seen.end(), std::pair{mag, angle}) != seen.end()) continue;
        seen.emplace_back(mag, angle);
        velocities.push_back(mag * unit_direction(angle));
      }
    }
  }
  return VelocityGrid(std::move(velocities));
}

std::size_t flat_index(std::size_t p, std::size_t n, std::size_t n_hyp) {
  if (n_hyp == 0 || p == 0 || n == 0 || n > n_hyp) throw ContractError("flat_index: index out of range");
  return (p - 1) * n_hyp + n;
}

std::pair<std::size_t, std::size_t> unflat_index(std::size_t flat, std::size_t n_hyp) {
  if (n_hyp == 0 || flat == 0) throw ContractError("unflat_index: index out of range");
  return {(flat - 1) / n_hyp + 1, (flat - 1) % n_hyp + 1};
}

ExtendedImage::ExtendedImage(ComplexVector c, std::size_t pixels, std::size_t hyps)
    : coeffs(std::move(c)), n_pixels(pixels), n_hyp(hyps) {
  if (static_cast<std::size_t>(coeffs.size()) != pixels * hyps)
    throw ContractError("extended image: coefficient length must equal P * N");
}

double wrap_phase_span(double dv, double cpi, double f_max_hz, double e_kl_max_norm, double c) {
  return 2.0 * kPi * f_max_hz / c * e_kl_max_norm * dv * cpi;
}

WrapReport validate_grid_against_wrap(const VelocityGrid& grid, double cpi, double f_max_hz,
                                      double e_kl_max_norm, double c) {
  if (!(cpi > 0.0)) throw ContractError("wrap check: CPI must be positive");
  WrapReport report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (j != i) nearest = std::min(nearest, (grid[i] - grid[j]).norm());
    if (std::isfinite(nearest) && nearest > report.worst_spacing) {
      report.worst_spacing = nearest;
      report.worst_index = i;
    }
  }
  report.worst_phase = wrap_phase_span(report.worst_spacing, cpi, f_max_hz, e_kl_max_norm, c);
  report.margin = kPi - report.worst_phase;
  report.ok = report.worst_phase < kPi;
  return report;
}

}  // namespace msar

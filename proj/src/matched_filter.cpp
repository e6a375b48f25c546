#include "msar/matched_filter.hpp"

#include <algorithm>
#include <cmath>

namespace msar {

std::vector<Complex> SpaceVelocityCube::slice(std::size_t n) const {
  if (n >= n_hyp_) throw ContractError("cube slice: hypothesis out of range");
  return {values_.begin() + static_cast<std::ptrdiff_t>(n * n_pixels_),
          values_.begin() + static_cast<std::ptrdiff_t>((n + 1) * n_pixels_)};
}

SpaceVelocityCube mf_cube(const MotionSarOperator& op, const ComplexVector& r) {
  const std::size_t n_pixels = op.spec().grid.size();
  const std::size_t n_hyp = op.spec().n_hypotheses();
  const ComplexVector back = op.adjoint(r);
  // Unit-modulus kernel: every column has squared norm M.
  const double scale = op.rows() > 0 ? 1.0 / static_cast<double>(op.rows()) : 0.0;
  SpaceVelocityCube cube(n_pixels, n_hyp);
  for (std::size_t p = 0; p < n_pixels; ++p) {
    for (std::size_t n = 0; n < n_hyp; ++n) {
      cube.at(p, n) = back[static_cast<Eigen::Index>(p * n_hyp + n)] * scale;
      cube.column_scale(p, n) = scale;
    }
  }
  return cube;
}

std::vector<double> MaxProjection::magnitudes() const {
  std::vector<double> out(static_cast<std::size_t>(image.size()));
  for (Eigen::Index p = 0; p < image.size(); ++p) out[static_cast<std::size_t>(p)] = std::abs(image[p]);
  return out;
}

MaxProjection mf_max_project(const SpaceVelocityCube& cube, const VelocityGrid& grid) {
  if (cube.n_hyp() != grid.size())
    throw ContractError("mf_max_project: cube and velocity grid disagree on N");
  MaxProjection out;
  out.image = ComplexVector::Zero(static_cast<Eigen::Index>(cube.n_pixels()));
  out.hypothesis.assign(cube.n_pixels(), 0);
  out.velocity_map.assign(cube.n_pixels(), grid[0]);
  for (std::size_t p = 0; p < cube.n_pixels(); ++p) {
    std::size_t best = 0;
    double best_mag = std::abs(cube.at(p, 0));
    for (std::size_t n = 1; n < cube.n_hyp(); ++n) {
      const double mag = std::abs(cube.at(p, n));
      if (mag > best_mag) {
        best_mag = mag;
        best = n;
      }
    }
    out.image[static_cast<Eigen::Index>(p)] = cube.at(p, best);
    out.hypothesis[p] = best;
    out.velocity_map[p] = grid[best];
  }
  return out;
}

std::vector<Detection> threshold_detect(const ComplexVector& image, const std::vector<Vec2>& velocity_map,
                                        const std::vector<std::size_t>& hypothesis, double threshold) {
  if (!(threshold >= 0.0)) throw ContractError("threshold_detect: threshold must be nonnegative");
  const auto n = static_cast<std::size_t>(image.size());
  if (velocity_map.size() != n || hypothesis.size() != n)
    throw ContractError("threshold_detect: image and velocity map sizes differ");
  std::vector<Detection> out;
  for (std::size_t p = 0; p < n; ++p) {
    const double mag = std::abs(image[static_cast<Eigen::Index>(p)]);
    if (mag > threshold) out.push_back({p, mag, velocity_map[p], hypothesis[p]});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.magnitude > b.magnitude; });
  return out;
}

}  // namespace msar

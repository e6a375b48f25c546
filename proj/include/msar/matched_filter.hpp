#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "msar/forward_model.hpp"
#include "msar/velocity_dictionary.hpp"

namespace msar {

// Matched-filter output over every (pixel, velocity hypothesis). Storage is
// hypothesis-major (one contiguous image per hypothesis).
class SpaceVelocityCube {
public:
  SpaceVelocityCube() = default;
  SpaceVelocityCube(std::size_t n_pixels, std::size_t n_hyp)
      : values_(n_pixels * n_hyp), column_scale_(n_pixels * n_hyp, 1.0), n_pixels_(n_pixels), n_hyp_(n_hyp) {}

  std::size_t n_pixels() const { return n_pixels_; }
  std::size_t n_hyp() const { return n_hyp_; }

  Complex at(std::size_t p, std::size_t n) const { return values_.at(n * n_pixels_ + p); }
  Complex& at(std::size_t p, std::size_t n) { return values_.at(n * n_pixels_ + p); }
  /// Weight applied to column (p, n): 1 / |Phi_p(v_n)|^2.
  double column_scale(std::size_t p, std::size_t n) const { return column_scale_.at(n * n_pixels_ + p); }
  double& column_scale(std::size_t p, std::size_t n) { return column_scale_.at(n * n_pixels_ + p); }

  /// Image for hypothesis n.
  std::vector<Complex> slice(std::size_t n) const;

private:
  std::vector<Complex> values_;
  std::vector<double> column_scale_;
  std::size_t n_pixels_ = 0;
  std::size_t n_hyp_ = 0;
};

/// cube(p, n) = Phi_p(v_n)^H r / |Phi_p(v_n)|^2.
SpaceVelocityCube mf_cube(const MotionSarOperator& op, const ComplexVector& r);

struct MaxProjection {
  ComplexVector image;
  std::vector<std::size_t> hypothesis;
  std::vector<Vec2> velocity_map;

  std::vector<double> magnitudes() const;
};

/// Per-pixel magnitude argmax across hypotheses, smallest n on ties.
MaxProjection mf_max_project(const SpaceVelocityCube& cube, const VelocityGrid& grid);

struct Detection {
  std::size_t pixel = 0;
  double magnitude = 0.0;
  Vec2 velocity = Vec2::Zero();
  std::size_t hypothesis = 0;
};

/// Pixels with |image| > threshold, sorted by magnitude descending (pixel index on ties).
std::vector<Detection> threshold_detect(const ComplexVector& image, const std::vector<Vec2>& velocity_map,
                                        const std::vector<std::size_t>& hypothesis, double threshold);

}  // namespace msar

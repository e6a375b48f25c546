#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msar/forward_model.hpp"
#include "msar/matched_filter.hpp"
#include "msar/sparse_solver.hpp"

namespace msar {

struct KSpaceSample {
  std::size_t row = 0;
  std::size_t pulse = 0;
  std::size_t tx = 0;
  std::size_t rx = 0;
  double time = 0.0;
  Vec2 k = Vec2::Zero();  // rad/m
};

/// k = Omega_kl(t) (e_k + e_l) for every measurement row.
std::vector<KSpaceSample> kspace_samples(const OperatorSpec& spec);

struct ResolutionBounds {
  double rho_x = 0.0;  // range, m
  double rho_y = 0.0;  // cross-range, m
};

/// Bounding-box resolution of the annular k-space sector swept by a cone of width dtheta.
ResolutionBounds resolution_bounds(double f0_hz, double bandwidth_hz, double dtheta,
                                   double c = kSpeedOfLight);

/// |truth - estimate|_2^2 / P on magnitude images.
double pixel_error(std::span<const double> truth, std::span<const double> estimate);

struct DetectionScore {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Exact-pixel matching of detections against the scatterer pixels of the truth.
DetectionScore score_detections(const std::vector<Detection>& detections, const SceneTruth& truth,
                                std::size_t n_pixels);

struct VelocityScore {
  std::size_t evaluated = 0;  // true-positive pixels of moving objects
  std::size_t correct = 0;    // estimate is a nearest grid point of the true velocity
  double accuracy = 0.0;      // correct / evaluated, 1 when nothing to evaluate
};

VelocityScore velocity_accuracy(const std::vector<Detection>& detections, const SceneTruth& truth,
                                const VelocityGrid& grid);

// Ordered key/value report. Keys keep insertion order so output is stable.
class MetricsReport {
public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::size_t value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string value(const std::string& key) const;
  std::string to_text() const;
  static MetricsReport parse(const std::string& text);

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// File emission. Every writer is atomic (temp file + rename) and throws
// IoError naming the path on failure.

/// Magnitude grid CSV: header "iy,ix0,...", one row per iy ascending.
void write_csv_grid(const std::filesystem::path& path, const PixelGrid& grid, std::span<const double> values);
std::vector<double> read_csv_grid(const std::filesystem::path& path, const PixelGrid& grid);

/// 16-bit binary PGM of magnitudes scaled linearly from [0, max] to [0, 65535];
/// top row is the largest y. The scale goes to "<path>.scale.txt".
void write_pgm16(const std::filesystem::path& path, const PixelGrid& grid, std::span<const double> values);

/// p,x,y,v_x,v_y,abs_s for every pixel.
void write_velocity_map_csv(const std::filesystem::path& path, const PixelGrid& grid,
                            const std::vector<Vec2>& velocity_map, std::span<const double> magnitudes);
void write_detections_csv(const std::filesystem::path& path, const PixelGrid& grid,
                          const std::vector<Detection>& detections);
void write_kspace_csv(const std::filesystem::path& path, const std::vector<KSpaceSample>& samples);
void write_velocity_grid_csv(const std::filesystem::path& path, const VelocityGrid& grid);
void write_solver_trace_csv(const std::filesystem::path& path, const SolverDiagnostics& diag);
void write_cube_slice_csv(const std::filesystem::path& path, const PixelGrid& grid,
                          const SpaceVelocityCube& cube, std::size_t hypothesis);
void write_metrics(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace msar

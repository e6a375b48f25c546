#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "msar/analysis.hpp"
#include "msar/experiment_config.hpp"

namespace msar {

// Deterministic simulation inputs derived from a config and its seed.
struct ExperimentSetup {
  OperatorSpec spec;          // velocity_set holds the reconstruction dictionary
  VelocityGrid velocity_grid;
  SceneTruth truth;
  PhaseHistory clean;
  NoisyHistory measured;
};

ExperimentSetup build_setup(const ExperimentConfig& config);

struct MethodResult {
  bool enabled = false;
  double pixel_error = 0.0;
  DetectionScore detection;
  VelocityScore velocity;
  std::vector<double> magnitudes;
  std::vector<Vec2> velocity_map;
  std::vector<std::size_t> hypothesis;
  std::vector<Detection> detections;
};

struct ExperimentResult {
  MethodResult ocd;
  MethodResult mf;
  SolverDiagnostics diagnostics;
  double epsilon = 0.0;
  bool converged = true;  // false when the solver stopped short or missed epsilon
  WrapReport wrap;
  MetricsReport metrics;
  double runtime_s = 0.0;
};

// simulate -> invert -> evaluate. With an output directory every artifact is
// written there (config echo, truth, phase history, images, metrics); the
// wall-clock time goes to timing.txt so metrics.txt stays reproducible.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace msar

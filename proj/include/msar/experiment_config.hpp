#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msar/forward_model.hpp"
#include "msar/geometry.hpp"
#include "msar/sparse_solver.hpp"
#include "msar/velocity_dictionary.hpp"
#include "msar/waveform.hpp"

namespace msar {

// One group of the velocity dictionary: every band magnitude at every angle.
struct VelocityGroup {
  std::vector<VelocityBand> bands;
  std::vector<double> angles;  // radians
};

// Everything a run needs. Angles are radians here; the JSON form uses degrees.
struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;

  GeometryOptions geometry;  // geometry.seed is ignored, streams come from `seed`

  FrequencyMode frequency_mode = FrequencyMode::random_tones;
  double f0_hz = 1.5e9;
  double bandwidth_hz = 50e6;
  double pulse_duration_s = 1e-5;

  std::size_t n_pulses = 0;  // 0: one pulse per transmitter
  double pri_s = 2e-3;
  std::size_t samples_per_pulse = 1;
  RefTimePolicy t_ref = RefTimePolicy::start;
  double t_ref_s = 0.0;

  PixelGrid grid{16, 16, 1.0, 0.25};
  bool scene_dynamic = true;  // false freezes every object
  std::vector<ObjectSpec> objects;

  bool use_motion = true;  // false: dictionary {0}
  std::vector<VelocityGroup> velocity_groups;

  bool ocd_enabled = true;
  SolverConfig solver;
  double epsilon_scale = 1.1025;  // epsilon = scale * |noise|^2
  double epsilon_floor = 1e-6;    // relative to |r|^2, used when noise is absent

  bool mf_enabled = false;

  double snr_db = 20.0;
  double detection_threshold = 0.2;
  DopplerModel doppler = DopplerModel::first_order;
  bool phase_history_csv = true;

  std::size_t pulses() const { return n_pulses == 0 ? geometry.n_tx : n_pulses; }
};

/// Parses the JSON form. Every schema problem is collected; the thrown
/// ConfigError lists them one per line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON echo (stable key order, shortest round-trip numbers).
std::string config_to_json(const ExperimentConfig& config);

/// Velocity dictionary the config asks for.
VelocityGrid config_velocity_grid(const ExperimentConfig& config);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  WrapReport wrap;
  std::size_t n_measurements = 0;
  std::size_t n_hypotheses = 0;
  std::size_t n_pixels = 0;

  bool ok() const { return errors.empty(); }
  std::string to_text() const;
};

/// Full up-front validation: module preconditions, |v|/c, scene layout and
/// the phase-wrap advisory (a warning, never an error).
ValidationReport validate_config(const ExperimentConfig& config);

}  // namespace msar

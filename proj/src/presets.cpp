#include "msar/presets.hpp"

namespace msar {

namespace {

const double kSlowDir = deg_to_rad(120.0);
const double kFastDir = deg_to_rad(30.0);

ExperimentConfig multistatic_base(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.seed = 2011;
  cfg.geometry.n_tx = 10;
  cfg.geometry.n_rx = 40;
  cfg.geometry.cone_width = deg_to_rad(45.0);
  cfg.frequency_mode = FrequencyMode::random_tones;
  cfg.f0_hz = 1.5e9;
  cfg.bandwidth_hz = 50e6;
  cfg.pri_s = 2e-3;
  cfg.samples_per_pulse = 1;
  cfg.grid = PixelGrid{32, 128, 1.0, 0.25};
  cfg.objects = replication_objects(20);
  cfg.velocity_groups = replication_velocity_groups();
  cfg.snr_db = 20.0;
  return cfg;
}

// Wide-angle monostatic: 40 collocated elements spread evenly over the cone,
// chirped so that 40 pulses x 10 samples also gives 400 measurements.
ExperimentConfig monostatic_base(const std::string& name) {
  ExperimentConfig cfg = multistatic_base(name);
  cfg.geometry.n_tx = 40;
  cfg.geometry.n_rx = 40;
  cfg.geometry.monostatic = true;
  cfg.geometry.layout = AngleLayout::uniform;
  cfg.frequency_mode = FrequencyMode::chirp;
  cfg.samples_per_pulse = 10;
  return cfg;
}

// 16 x 16 version of the replication scene with the full 29-entry dictionary.
ExperimentConfig desk_base(const std::string& name) {
  ExperimentConfig cfg = multistatic_base(name);
  cfg.grid = PixelGrid{16, 16, 1.0, 0.25};
  cfg.objects = desk_objects(4);
  return cfg;
}

void static_scene(ExperimentConfig& cfg) {
  cfg.scene_dynamic = false;
  cfg.use_motion = false;
}

void motion_ignored(ExperimentConfig& cfg) { cfg.use_motion = false; }

void matched_filter_only(ExperimentConfig& cfg) {
  cfg.ocd_enabled = false;
  cfg.mf_enabled = true;
}

}  // namespace

std::vector<ObjectSpec> replication_objects(std::size_t per_object) {
  return {
      {2, 84, 8, 32, per_object, 0.0, 0.0},
      {2, 12, 8, 32, per_object, 32.5, kFastDir},
      {22, 84, 8, 32, per_object, 4.7, kSlowDir},
  };
}

std::vector<ObjectSpec> desk_objects(std::size_t per_object) {
  return {
      {1, 10, 4, 5, per_object, 0.0, 0.0},
      {1, 1, 4, 5, per_object, 32.5, kFastDir},
      {11, 10, 4, 5, per_object, 4.7, kSlowDir},
  };
}

std::vector<VelocityGroup> replication_velocity_groups() {
  return {{{{3.0, 9.0, 3.0}, {30.0, 40.0, 1.0}}, {kFastDir, kSlowDir}}};
}

std::vector<std::string> preset_names() {
  return {"multistatic-ocd-static",  "multistatic-ocd-ignored",  "multistatic-ocd-dynamic",
          "monostatic-ocd-static",   "monostatic-ocd-ignored",   "monostatic-ocd-dynamic",
          "multistatic-mf-400",      "multistatic-mf-12000",     "desk-small",
          "desk-ocd-static",         "desk-ocd-ignored",         "desk-ocd-dynamic",
          "desk-mf-12000"};
}

ExperimentConfig make_preset(const std::string& name) {
  if (name == "multistatic-ocd-static") {
    auto cfg = multistatic_base(name);
    static_scene(cfg);
    return cfg;
  }
  if (name == "multistatic-ocd-ignored") {
    auto cfg = multistatic_base(name);
    motion_ignored(cfg);
    return cfg;
  }
  if (name == "multistatic-ocd-dynamic") return multistatic_base(name);
  if (name == "monostatic-ocd-static") {
    auto cfg = monostatic_base(name);
    static_scene(cfg);
    return cfg;
  }
  if (name == "monostatic-ocd-ignored") {
    auto cfg = monostatic_base(name);
    motion_ignored(cfg);
    return cfg;
  }
  if (name == "monostatic-ocd-dynamic") return monostatic_base(name);
  if (name == "multistatic-mf-400") {
    auto cfg = multistatic_base(name);
    matched_filter_only(cfg);
    return cfg;
  }
  if (name == "multistatic-mf-12000") {
    auto cfg = multistatic_base(name);
    matched_filter_only(cfg);
    cfg.frequency_mode = FrequencyMode::chirp;
    cfg.samples_per_pulse = 30;
    cfg.phase_history_csv = false;
    return cfg;
  }
  if (name == "desk-small") {
    // 16 x 16 CI scene with a five-entry dictionary: the static hypothesis,
    // the two slow-band points around 4.7 m/s and the two fast-band points
    // bracketing 32.5 m/s.
    auto cfg = multistatic_base(name);
    cfg.grid = PixelGrid{16, 16, 1.0, 0.25};
    cfg.objects = desk_objects(4);
    cfg.velocity_groups = {{{{3.0, 6.0, 3.0}}, {kSlowDir}}, {{{32.0, 33.0, 1.0}}, {kFastDir}}};
    cfg.mf_enabled = true;
    return cfg;
  }
  if (name == "desk-ocd-static") {
    auto cfg = desk_base(name);
    static_scene(cfg);
    return cfg;
  }
  if (name == "desk-ocd-ignored") {
    auto cfg = desk_base(name);
    motion_ignored(cfg);
    return cfg;
  }
  if (name == "desk-ocd-dynamic") {
    // the M = 400 matched filter comes from the same run
    auto cfg = desk_base(name);
    cfg.mf_enabled = true;
    return cfg;
  }
  if (name == "desk-mf-12000") {
    auto cfg = desk_base(name);
    matched_filter_only(cfg);
    cfg.frequency_mode = FrequencyMode::chirp;
    cfg.samples_per_pulse = 30;
    cfg.phase_history_csv = false;
    return cfg;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace msar

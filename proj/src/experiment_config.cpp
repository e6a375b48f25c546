#include "msar/experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "msar/io_util.hpp"
#include "msar/random.hpp"

namespace msar {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

// Collects schema problems instead of stopping at the first one.
class Reader {
public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  const json* section(const json& obj, const std::string& key, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(key, "missing required section '" + key + "'");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(key, "must be an object");
      return nullptr;
    }
    return &*it;
  }

  void allowed(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        fail(join(path, k), "unknown key");
    }
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) return fail(join(path, key), "expected a number");
    out = it->get<double>();
    if (!std::isfinite(out)) fail(join(path, key), "must be finite");
  }

  void count(const json& obj, const std::string& path, const char* key, std::size_t& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      return fail(join(path, key), "expected a nonnegative integer");
    out = it->get<std::size_t>();
  }

  void flag(const json& obj, const std::string& path, const char* key, bool& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) return fail(join(path, key), "expected true or false");
    out = it->get<bool>();
  }

  template <typename E>
  void choice(const json& obj, const std::string& path, const char* key, E& out,
              std::initializer_list<std::pair<const char*, E>> options) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    std::string names;
    for (const auto& [name, value] : options) {
      if (it->is_string() && it->get<std::string>() == name) {
        out = value;
        return;
      }
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(join(path, key), "expected one of: " + names);
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// snapped to 1e-9 deg so the echo of a parsed config reads back as written
double rad_to_deg(double r) { return std::round(r * 180.0 / kPi * 1e9) / 1e9; }

void read_objects(Reader& rd, const json& scene, std::vector<ObjectSpec>& out) {
  const auto it = scene.find("objects");
  if (it == scene.end()) return;
  if (!it->is_array()) return rd.fail("scene.objects", "expected an array");
  out.clear();
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string path = "scene.objects[" + std::to_string(i) + "]";
    const json& o = (*it)[i];
    if (!o.is_object()) {
      rd.fail(path, "expected an object");
      continue;
    }
    rd.allowed(o, path, {"block", "count", "speed", "direction_deg"});
    ObjectSpec spec;
    const auto block = o.find("block");
    if (block == o.end()) {
      rd.fail(path + ".block", "missing [ix0, iy0, width, height]");
    } else if (!block->is_array() || block->size() != 4 ||
               !std::all_of(block->begin(), block->end(),
                            [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); })) {
      rd.fail(path + ".block", "expected four nonnegative integers [ix0, iy0, width, height]");
    } else {
      spec.ix0 = (*block)[0].get<std::size_t>();
      spec.iy0 = (*block)[1].get<std::size_t>();
      spec.width = (*block)[2].get<std::size_t>();
      spec.height = (*block)[3].get<std::size_t>();
    }
    rd.count(o, path, "count", spec.count);
    rd.number(o, path, "speed", spec.speed);
    double deg = 0.0;
    rd.number(o, path, "direction_deg", deg);
    spec.direction = deg_to_rad(deg);
    if (spec.speed < 0.0) rd.fail(path + ".speed", "must be nonnegative");
    out.push_back(spec);
  }
}

void read_velocity_groups(Reader& rd, const json& vg, std::vector<VelocityGroup>& out) {
  const auto it = vg.find("groups");
  if (it == vg.end()) return;
  if (!it->is_array()) return rd.fail("velocity_grid.groups", "expected an array");
  out.clear();
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string path = "velocity_grid.groups[" + std::to_string(i) + "]";
    const json& g = (*it)[i];
    if (!g.is_object()) {
      rd.fail(path, "expected an object");
      continue;
    }
    rd.allowed(g, path, {"bands", "angles_deg"});
    VelocityGroup group;
    const auto bands = g.find("bands");
    if (bands != g.end() && bands->is_array()) {
      for (std::size_t b = 0; b < bands->size(); ++b) {
        const json& band = (*bands)[b];
        if (!band.is_array() || band.size() != 3 ||
            !std::all_of(band.begin(), band.end(), [](const json& v) { return v.is_number(); })) {
          rd.fail(path + ".bands[" + std::to_string(b) + "]", "expected [mag_min, mag_max, mag_step]");
          continue;
        }
        group.bands.push_back({band[0].get<double>(), band[1].get<double>(), band[2].get<double>()});
      }
    } else if (bands != g.end()) {
      rd.fail(path + ".bands", "expected an array");
    }
    const auto angles = g.find("angles_deg");
    if (angles != g.end() && angles->is_array() &&
        std::all_of(angles->begin(), angles->end(), [](const json& v) { return v.is_number(); })) {
      for (const auto& a : *angles) group.angles.push_back(deg_to_rad(a.get<double>()));
    } else if (angles != g.end()) {
      rd.fail(path + ".angles_deg", "expected an array of numbers");
    }
    out.push_back(std::move(group));
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": JSON parse error at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": top level must be a JSON object");

  Reader rd;
  ExperimentConfig cfg;
  rd.allowed(root, "", {"name", "seed", "geometry", "waveform", "schedule", "grid", "scene", "velocity_grid",
                        "solver", "baseline", "snr_db", "detection_threshold", "doppler", "outputs"});
  if (const auto it = root.find("name"); it != root.end()) {
    if (it->is_string()) cfg.name = it->get<std::string>();
    else rd.fail("name", "expected a string");
  }
  if (const auto it = root.find("seed"); it != root.end()) {
    if (it->is_number_unsigned() || (it->is_number_integer() && it->get<long long>() >= 0))
      cfg.seed = it->get<std::uint64_t>();
    else
      rd.fail("seed", "expected a nonnegative integer");
  }

  if (const json* g = rd.section(root, "geometry", true)) {
    rd.allowed(*g, "geometry", {"n_tx", "n_rx", "cone_center_deg", "cone_width_deg", "monostatic", "layout",
                                "origin_delay_s"});
    rd.count(*g, "geometry", "n_tx", cfg.geometry.n_tx);
    rd.count(*g, "geometry", "n_rx", cfg.geometry.n_rx);
    double center = 0.0, width = 45.0;
    rd.number(*g, "geometry", "cone_center_deg", center);
    rd.number(*g, "geometry", "cone_width_deg", width);
    cfg.geometry.cone_center = deg_to_rad(center);
    cfg.geometry.cone_width = deg_to_rad(width);
    rd.flag(*g, "geometry", "monostatic", cfg.geometry.monostatic);
    rd.choice(*g, "geometry", "layout", cfg.geometry.layout,
              {{"random", AngleLayout::random}, {"uniform", AngleLayout::uniform}});
    rd.number(*g, "geometry", "origin_delay_s", cfg.geometry.origin_delay);
  }
  if (const json* w = rd.section(root, "waveform", true)) {
    rd.allowed(*w, "waveform", {"mode", "f0_hz", "bandwidth_hz", "pulse_duration_s"});
    rd.choice(*w, "waveform", "mode", cfg.frequency_mode,
              {{"single_tone_common", FrequencyMode::single_tone_common},
               {"random_tones", FrequencyMode::random_tones},
               {"chirp", FrequencyMode::chirp}});
    rd.number(*w, "waveform", "f0_hz", cfg.f0_hz);
    rd.number(*w, "waveform", "bandwidth_hz", cfg.bandwidth_hz);
    rd.number(*w, "waveform", "pulse_duration_s", cfg.pulse_duration_s);
  }
  if (const json* s = rd.section(root, "schedule", true)) {
    rd.allowed(*s, "schedule", {"n_pulses", "pri_s", "samples_per_pulse", "t_ref"});
    rd.count(*s, "schedule", "n_pulses", cfg.n_pulses);
    rd.number(*s, "schedule", "pri_s", cfg.pri_s);
    rd.count(*s, "schedule", "samples_per_pulse", cfg.samples_per_pulse);
    if (const auto it = s->find("t_ref"); it != s->end()) {
      if (it->is_number()) {
        cfg.t_ref = RefTimePolicy::explicit_time;
        cfg.t_ref_s = it->get<double>();
      } else {
        rd.choice(*s, "schedule", "t_ref", cfg.t_ref,
                  {{"start", RefTimePolicy::start}, {"center", RefTimePolicy::center}});
      }
    }
  }
  if (const json* g = rd.section(root, "grid", true)) {
    rd.allowed(*g, "grid", {"nx", "ny", "dx", "dy"});
    rd.count(*g, "grid", "nx", cfg.grid.nx);
    rd.count(*g, "grid", "ny", cfg.grid.ny);
    rd.number(*g, "grid", "dx", cfg.grid.dx);
    rd.number(*g, "grid", "dy", cfg.grid.dy);
  }
  if (const json* s = rd.section(root, "scene", true)) {
    rd.allowed(*s, "scene", {"motion", "objects"});
    rd.choice(*s, "scene", "motion", cfg.scene_dynamic, {{"dynamic", true}, {"static", false}});
    read_objects(rd, *s, cfg.objects);
  }
  if (const json* v = rd.section(root, "velocity_grid", true)) {
    rd.allowed(*v, "velocity_grid", {"use_motion", "groups"});
    rd.flag(*v, "velocity_grid", "use_motion", cfg.use_motion);
    read_velocity_groups(rd, *v, cfg.velocity_groups);
  }
  if (const json* s = rd.section(root, "solver", false)) {
    rd.allowed(*s, "solver", {"enabled", "mode", "epsilon_scale", "epsilon_floor", "lambda", "max_iters", "tol",
                              "backend", "bisection_steps"});
    rd.flag(*s, "solver", "enabled", cfg.ocd_enabled);
    rd.choice(*s, "solver", "mode", cfg.solver.mode,
              {{"epsilon_constrained", SolverMode::epsilon_constrained},
               {"lambda_penalized", SolverMode::lambda_penalized}});
    rd.number(*s, "solver", "epsilon_scale", cfg.epsilon_scale);
    rd.number(*s, "solver", "epsilon_floor", cfg.epsilon_floor);
    rd.number(*s, "solver", "lambda", cfg.solver.lambda);
    rd.count(*s, "solver", "max_iters", cfg.solver.max_iters);
    rd.number(*s, "solver", "tol", cfg.solver.tol);
    rd.count(*s, "solver", "bisection_steps", cfg.solver.bisection_steps);
    rd.choice(*s, "solver", "backend", cfg.solver.backend,
              {{"proximal_gradient", SolverBackend::proximal_gradient},
               {"interior_point", SolverBackend::interior_point}});
  }
  if (const json* b = rd.section(root, "baseline", false)) {
    rd.allowed(*b, "baseline", {"enabled"});
    rd.flag(*b, "baseline", "enabled", cfg.mf_enabled);
  }
  if (const auto it = root.find("snr_db"); it != root.end()) {
    if (it->is_number()) cfg.snr_db = it->get<double>();
    else if (it->is_string() && it->get<std::string>() == "inf") cfg.snr_db = std::numeric_limits<double>::infinity();
    else rd.fail("snr_db", "expected a number or \"inf\"");
  }
  rd.number(root, "", "detection_threshold", cfg.detection_threshold);
  rd.choice(root, "", "doppler", cfg.doppler,
            {{"first_order", DopplerModel::first_order}, {"exact", DopplerModel::exact}});
  if (const json* o = rd.section(root, "outputs", false)) {
    rd.allowed(*o, "outputs", {"phase_history_csv"});
    rd.flag(*o, "outputs", "phase_history_csv", cfg.phase_history_csv);
  }

  if (!rd.errors.empty()) {
    std::string msg = source + ": " + std::to_string(rd.errors.size()) + " schema error(s)";
    for (const auto& e : rd.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  // Numbers go through format_double so the echo is byte-stable.
  auto num = [](double v) { return ordered::parse(format_double(v)); };
  ordered root;
  root["name"] = cfg.name;
  root["seed"] = cfg.seed;
  root["geometry"] = {{"n_tx", cfg.geometry.n_tx},
                      {"n_rx", cfg.geometry.n_rx},
                      {"cone_center_deg", num(rad_to_deg(cfg.geometry.cone_center))},
                      {"cone_width_deg", num(rad_to_deg(cfg.geometry.cone_width))},
                      {"monostatic", cfg.geometry.monostatic},
                      {"layout", cfg.geometry.layout == AngleLayout::uniform ? "uniform" : "random"},
                      {"origin_delay_s", num(cfg.geometry.origin_delay)}};
  const char* mode = cfg.frequency_mode == FrequencyMode::chirp           ? "chirp"
                     : cfg.frequency_mode == FrequencyMode::random_tones ? "random_tones"
                                                                           : "single_tone_common";
  root["waveform"] = {{"mode", mode},
                      {"f0_hz", num(cfg.f0_hz)},
                      {"bandwidth_hz", num(cfg.bandwidth_hz)},
                      {"pulse_duration_s", num(cfg.pulse_duration_s)}};
  ordered sched = {{"n_pulses", cfg.n_pulses}, {"pri_s", num(cfg.pri_s)}, {"samples_per_pulse", cfg.samples_per_pulse}};
  if (cfg.t_ref == RefTimePolicy::explicit_time) sched["t_ref"] = num(cfg.t_ref_s);
  else sched["t_ref"] = cfg.t_ref == RefTimePolicy::center ? "center" : "start";
  root["schedule"] = sched;
  root["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"dx", num(cfg.grid.dx)}, {"dy", num(cfg.grid.dy)}};
  ordered objects = ordered::array();
  for (const auto& o : cfg.objects)
    objects.push_back({{"block", {o.ix0, o.iy0, o.width, o.height}},
                       {"count", o.count},
                       {"speed", num(o.speed)},
                       {"direction_deg", num(rad_to_deg(o.direction))}});
  root["scene"] = {{"motion", cfg.scene_dynamic ? "dynamic" : "static"}, {"objects", objects}};
  ordered groups = ordered::array();
  for (const auto& g : cfg.velocity_groups) {
    ordered bands = ordered::array(), angles = ordered::array();
    for (const auto& b : g.bands) bands.push_back({num(b.mag_min), num(b.mag_max), num(b.mag_step)});
    for (double a : g.angles) angles.push_back(num(rad_to_deg(a)));
    groups.push_back({{"bands", bands}, {"angles_deg", angles}});
  }
  root["velocity_grid"] = {{"use_motion", cfg.use_motion}, {"groups", groups}};
  root["solver"] = {
      {"enabled", cfg.ocd_enabled},
      {"mode", cfg.solver.mode == SolverMode::lambda_penalized ? "lambda_penalized" : "epsilon_constrained"},
      {"epsilon_scale", num(cfg.epsilon_scale)},
      {"epsilon_floor", num(cfg.epsilon_floor)},
      {"lambda", num(cfg.solver.lambda)},
      {"max_iters", cfg.solver.max_iters},
      {"tol", num(cfg.solver.tol)},
      {"bisection_steps", cfg.solver.bisection_steps},
      {"backend", cfg.solver.backend == SolverBackend::interior_point ? "interior_point" : "proximal_gradient"}};
  root["baseline"] = {{"enabled", cfg.mf_enabled}};
  if (std::isinf(cfg.snr_db)) root["snr_db"] = "inf";
  else root["snr_db"] = num(cfg.snr_db);
  root["detection_threshold"] = num(cfg.detection_threshold);
  root["doppler"] = cfg.doppler == DopplerModel::exact ? "exact" : "first_order";
  root["outputs"] = {{"phase_history_csv", cfg.phase_history_csv}};
  return root.dump(2) + "\n";
}

VelocityGrid config_velocity_grid(const ExperimentConfig& cfg) {
  VelocityGrid grid;
  if (!cfg.use_motion) return grid;
  for (const auto& g : cfg.velocity_groups) grid = grid.merged(build_velocity_grid(g.bands, g.angles));
  return grid;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "status = " << (ok() ? "valid" : "invalid") << "\n";
  out << "pixels = " << n_pixels << "\n";
  out << "measurements = " << n_measurements << "\n";
  out << "hypotheses = " << n_hypotheses << "\n";
  out << "wrap_worst_spacing_mps = " << format_double(wrap.worst_spacing) << "\n";
  out << "wrap_worst_phase_rad = " << format_double(wrap.worst_phase) << "\n";
  out << "wrap_margin_rad = " << format_double(wrap.margin) << "\n";
  out << "wrap_ok = " << (wrap.ok ? "true" : "false") << "\n";
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  for (const auto& e : errors) out << "error: " << e << "\n";
  return out.str();
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  // module messages usually carry their own prefix already
  auto add = [&](const std::string& what, const std::string& msg) {
    rep.errors.push_back(msg.rfind(what + ":", 0) == 0 ? msg : what + ": " + msg);
  };
  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
      return true;
    } catch (const ConfigError& e) {
      add(what, e.what());
    } catch (const ContractError& e) {
      add(what, e.what());
    }
    return false;
  };

  OperatorSpec spec;
  GeometryOptions geo = cfg.geometry;
  geo.seed = derive_seed(cfg.seed, SeedStream::geometry);
  const bool geometry_ok = attempt("geometry", [&] { spec.geometry = make_sensor_geometry(geo); });
  const bool waveform_ok = attempt("waveform", [&] {
    spec.waveforms = assign_frequencies(cfg.geometry.n_tx, cfg.f0_hz, cfg.bandwidth_hz, cfg.frequency_mode,
                                        cfg.pulse_duration_s, derive_seed(cfg.seed, SeedStream::waveform));
    if (!(cfg.f0_hz > 0.5 * cfg.bandwidth_hz)) throw ConfigError("f0 must exceed half the bandwidth");
  });
  const bool schedule_ok = attempt("schedule", [&] {
    spec.schedule = build_schedule(cfg.pulses(), cfg.pri_s, cfg.samples_per_pulse, cfg.t_ref, cfg.pulse_duration_s,
                                   cfg.geometry.n_tx, cfg.t_ref_s);
  });
  const bool grid_ok = attempt("grid", [&] { cfg.grid.validate(); });
  spec.grid = cfg.grid;
  if (grid_ok) {
    rep.n_pixels = cfg.grid.size();
    attempt("scene", [&] { make_scene(cfg.grid, cfg.objects, derive_seed(cfg.seed, SeedStream::scene)); });
  }
  const double limit = 1e-3 * cfg.geometry.wave_speed;
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    if (cfg.objects[i].speed >= limit) {
      std::ostringstream msg;
      msg << "scene.objects[" << i << "]: |v| = " << cfg.objects[i].speed << " m/s violates |v|/c < 1e-3";
      rep.errors.push_back(msg.str());
    }
  }
  VelocityGrid vgrid;
  const bool vgrid_ok = attempt("velocity_grid", [&] { vgrid = config_velocity_grid(cfg); });
  rep.n_hypotheses = vgrid.size();
  if (vgrid_ok) {
    spec.velocity_set = vgrid.velocities();
    if (geometry_ok && waveform_ok && schedule_ok && grid_ok) {
      attempt("operator", [&] { spec.validate(); });
    } else {
      for (std::size_t n = 0; n < vgrid.size(); ++n) {
        if (vgrid[n].norm() >= limit) {
          std::ostringstream msg;
          msg << "velocity_grid: hypothesis " << n << " |v| = " << vgrid[n].norm() << " m/s violates |v|/c < 1e-3";
          rep.errors.push_back(msg.str());
        }
      }
    }
  }
  attempt("solver", [&] { cfg.solver.validate(); });
  if (!(cfg.epsilon_scale > 0.0)) rep.errors.push_back("solver.epsilon_scale: must be positive");
  if (!(cfg.epsilon_floor >= 0.0)) rep.errors.push_back("solver.epsilon_floor: must be nonnegative");
  if (std::isnan(cfg.snr_db) || cfg.snr_db == -std::numeric_limits<double>::infinity())
    rep.errors.push_back("snr_db: must be finite or \"inf\"");
  if (!(cfg.detection_threshold >= 0.0)) rep.errors.push_back("detection_threshold: must be nonnegative");
  if (!cfg.ocd_enabled && !cfg.mf_enabled) rep.warnings.push_back("neither the solver nor the baseline is enabled");

  if (geometry_ok && schedule_ok) rep.n_measurements = cfg.pulses() * spec.geometry.receivers_per_pulse() * cfg.samples_per_pulse;
  if (geometry_ok && waveform_ok && schedule_ok && vgrid_ok) {
    double e_max = 0.0;
    for (std::size_t k = 0; k < spec.geometry.n_tx(); ++k)
      for (std::size_t l = 0; l < spec.geometry.n_rx(); ++l)
        if (!spec.geometry.monostatic || k == l) e_max = std::max(e_max, spec.geometry.bistatic(k, l).norm());
    rep.wrap = validate_grid_against_wrap(vgrid, spec.schedule.cpi_length(), max_frequency_hz(spec.waveforms), e_max,
                                          spec.geometry.wave_speed);
    if (!rep.wrap.ok) {
      std::ostringstream msg;
      msg << "velocity spacing " << format_double(rep.wrap.worst_spacing) << " m/s accumulates "
          << format_double(rep.wrap.worst_phase) << " rad over the CPI (phase wrap advisory, limit pi)";
      rep.warnings.push_back(msg.str());
    }
  }
  return rep;
}

}  // namespace msar

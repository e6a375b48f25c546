#include "msar/experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "msar/io_util.hpp"
#include "msar/random.hpp"

namespace msar {

namespace fs = std::filesystem;

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  const auto report = validate_config(cfg);
  if (!report.ok()) {
    std::string msg = cfg.name + ": " + std::to_string(report.errors.size()) + " validation error(s)";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }

  ExperimentSetup setup;
  GeometryOptions geo = cfg.geometry;
  geo.seed = derive_seed(cfg.seed, SeedStream::geometry);
  OperatorSpec& spec = setup.spec;
  spec.geometry = make_sensor_geometry(geo);
  spec.waveforms = assign_frequencies(cfg.geometry.n_tx, cfg.f0_hz, cfg.bandwidth_hz, cfg.frequency_mode,
                                      cfg.pulse_duration_s, derive_seed(cfg.seed, SeedStream::waveform));
  spec.schedule = build_schedule(cfg.pulses(), cfg.pri_s, cfg.samples_per_pulse, cfg.t_ref, cfg.pulse_duration_s,
                                 cfg.geometry.n_tx, cfg.t_ref_s);
  spec.grid = cfg.grid;
  spec.doppler = cfg.doppler;

  setup.truth = make_scene(cfg.grid, cfg.objects, derive_seed(cfg.seed, SeedStream::scene));
  if (!cfg.scene_dynamic) setup.truth = setup.truth.frozen();

  // Simulate with one column per distinct true velocity; the true velocities
  // are generally not in the reconstruction dictionary.
  OperatorSpec truth_spec = spec;
  truth_spec.velocity_set.clear();
  std::vector<std::size_t> which(setup.truth.scatterers.size());
  for (std::size_t i = 0; i < setup.truth.scatterers.size(); ++i) {
    const Vec2& v = setup.truth.scatterers[i].velocity;
    std::size_t n = 0;
    while (n < truth_spec.velocity_set.size() && truth_spec.velocity_set[n] != v) ++n;
    if (n == truth_spec.velocity_set.size()) truth_spec.velocity_set.push_back(v);
    which[i] = n;
  }
  if (truth_spec.velocity_set.empty()) truth_spec.velocity_set.push_back(Vec2::Zero());
  const MotionSarOperator truth_op(truth_spec);
  ComplexVector coeffs = ComplexVector::Zero(static_cast<Eigen::Index>(truth_op.cols()));
  const std::size_t n_truth = truth_spec.velocity_set.size();
  for (std::size_t i = 0; i < setup.truth.scatterers.size(); ++i) {
    const auto& s = setup.truth.scatterers[i];
    coeffs[static_cast<Eigen::Index>(s.pixel * n_truth + which[i])] += s.reflectivity;
  }
  setup.clean = truth_op.make_history(truth_op.forward(coeffs));
  if (setup.clean.values.norm() == 0.0 || std::isinf(cfg.snr_db)) {
    setup.measured.history = setup.clean;
    setup.measured.signal_norm = setup.clean.values.norm();
  } else {
    setup.measured = add_noise(setup.clean, cfg.snr_db, derive_seed(cfg.seed, SeedStream::noise));
  }

  setup.velocity_grid = config_velocity_grid(cfg);
  spec.velocity_set = setup.velocity_grid.velocities();
  return setup;
}

namespace {

void score(MethodResult& m, const ExperimentSetup& setup, const std::vector<double>& truth_mag,
           const ComplexVector& image, double threshold) {
  m.enabled = true;
  m.magnitudes.resize(static_cast<std::size_t>(image.size()));
  for (Eigen::Index p = 0; p < image.size(); ++p) m.magnitudes[static_cast<std::size_t>(p)] = std::abs(image[p]);
  m.pixel_error = pixel_error(truth_mag, m.magnitudes);
  m.detections = threshold_detect(image, m.velocity_map, m.hypothesis, threshold);
  m.detection = score_detections(m.detections, setup.truth, setup.spec.grid.size());
  m.velocity = velocity_accuracy(m.detections, setup.truth, setup.velocity_grid);
}

void add_scores(MetricsReport& r, const std::string& prefix, const MethodResult& m) {
  r.set(prefix + "_pixel_error", m.pixel_error);
  r.set(prefix + "_detections", m.detections.size());
  r.set(prefix + "_true_positives", m.detection.true_positives);
  r.set(prefix + "_false_positives", m.detection.false_positives);
  r.set(prefix + "_false_negatives", m.detection.false_negatives);
  r.set(prefix + "_precision", m.detection.precision);
  r.set(prefix + "_recall", m.detection.recall);
  r.set(prefix + "_velocity_evaluated", m.velocity.evaluated);
  r.set(prefix + "_velocity_correct", m.velocity.correct);
  r.set(prefix + "_velocity_accuracy", m.velocity.accuracy);
}

std::vector<Vec2> truth_velocity_map(const SceneTruth& truth, std::size_t n_pixels) {
  std::vector<Vec2> v(n_pixels, Vec2::Zero());
  for (const auto& s : truth.scatterers) v.at(s.pixel) = s.velocity;
  return v;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res;
  const ExperimentSetup setup = build_setup(cfg);
  const auto& grid = setup.spec.grid;
  const std::vector<double> truth_mag = setup.truth.magnitudes(grid);
  const ComplexVector& r = setup.measured.history.values;

  double e_max = 0.0;
  for (std::size_t k = 0; k < setup.spec.geometry.n_tx(); ++k)
    for (std::size_t l = 0; l < setup.spec.geometry.n_rx(); ++l)
      if (!setup.spec.geometry.monostatic || k == l) e_max = std::max(e_max, setup.spec.geometry.bistatic(k, l).norm());
  res.wrap = validate_grid_against_wrap(setup.velocity_grid, setup.spec.schedule.cpi_length(),
                                        max_frequency_hz(setup.spec.waveforms), e_max, setup.spec.geometry.wave_speed);

  const MotionSarOperator op(setup.spec);

  if (cfg.ocd_enabled) {
    SolverConfig sc = cfg.solver;
    const double noise_sq = setup.measured.noise_norm * setup.measured.noise_norm;
    sc.epsilon = std::max(cfg.epsilon_scale * noise_sq, cfg.epsilon_floor * r.squaredNorm());
    res.epsilon = sc.epsilon;
    auto sol = solve_l1(op, r, sc, grid.size(), setup.velocity_grid.size());
    auto rec = select_max(sol.extended, setup.velocity_grid);
    res.diagnostics = sol.diagnostics;
    res.converged = sol.diagnostics.converged;
    if (sc.mode == SolverMode::epsilon_constrained && sol.diagnostics.residual_sq > sc.epsilon * (1.0 + 1e-9))
      res.converged = false;
    res.ocd.velocity_map = rec.velocity_map;
    res.ocd.hypothesis = rec.hypothesis;
    score(res.ocd, setup, truth_mag, rec.image, cfg.detection_threshold);
  }

  SpaceVelocityCube cube;
  if (cfg.mf_enabled) {
    cube = mf_cube(op, r);
    const auto mp = mf_max_project(cube, setup.velocity_grid);
    res.mf.velocity_map = mp.velocity_map;
    res.mf.hypothesis = mp.hypothesis;
    score(res.mf, setup, truth_mag, mp.image, cfg.detection_threshold);
  }

  auto& m = res.metrics;
  m.set("name", cfg.name);
  m.set("seed", std::to_string(cfg.seed));
  m.set("seed_geometry", std::to_string(derive_seed(cfg.seed, SeedStream::geometry)));
  m.set("seed_waveform", std::to_string(derive_seed(cfg.seed, SeedStream::waveform)));
  m.set("seed_scene", std::to_string(derive_seed(cfg.seed, SeedStream::scene)));
  m.set("seed_noise", std::to_string(derive_seed(cfg.seed, SeedStream::noise)));
  m.set("pixels", grid.size());
  m.set("measurements", op.rows());
  m.set("hypotheses", setup.velocity_grid.size());
  m.set("scatterers", setup.truth.scatterers.size());
  m.set("snr_db", std::isinf(cfg.snr_db) ? std::string("inf") : format_double(cfg.snr_db));
  m.set("signal_norm", setup.measured.signal_norm);
  m.set("noise_norm", setup.measured.noise_norm);
  m.set("detection_threshold", cfg.detection_threshold);
  m.set("wrap_worst_spacing_mps", res.wrap.worst_spacing);
  m.set("wrap_worst_phase_rad", res.wrap.worst_phase);
  m.set("wrap_ok", std::string(res.wrap.ok ? "true" : "false"));
  if (cfg.ocd_enabled) {
    const auto& d = res.diagnostics;
    m.set("ocd_epsilon", res.epsilon);
    m.set("ocd_lambda", d.lambda);
    m.set("ocd_residual_sq", d.residual_sq);
    m.set("ocd_l1_norm", d.l1_norm);
    m.set("ocd_iterations", d.iterations);
    m.set("ocd_bisection_steps", d.bisection_steps);
    m.set("ocd_bisection_ok", std::string(d.bisection_ok ? "true" : "false"));
    m.set("ocd_converged", std::string(res.converged ? "true" : "false"));
    add_scores(m, "ocd", res.ocd);
  }
  if (cfg.mf_enabled) add_scores(m, "mf", res.mf);

  if (out_dir) {
    const fs::path& dir = *out_dir;
    atomic_write(dir / "config.json", config_to_json(cfg));
    write_csv_grid(dir / "truth_magnitude.csv", grid, truth_mag);
    write_pgm16(dir / "truth_magnitude.pgm", grid, truth_mag);
    write_velocity_map_csv(dir / "truth_velocity.csv", grid, truth_velocity_map(setup.truth, grid.size()), truth_mag);
    write_phase_history(dir / "phase_history.bin", setup.measured.history);
    if (cfg.phase_history_csv) write_phase_history_csv(dir / "phase_history.csv", setup.measured.history, op.layout());
    write_velocity_grid_csv(dir / "velocity_grid.csv", setup.velocity_grid);
    if (cfg.ocd_enabled) {
      write_csv_grid(dir / "ocd_magnitude.csv", grid, res.ocd.magnitudes);
      write_pgm16(dir / "ocd_magnitude.pgm", grid, res.ocd.magnitudes);
      write_velocity_map_csv(dir / "ocd_velocity.csv", grid, res.ocd.velocity_map, res.ocd.magnitudes);
      write_detections_csv(dir / "ocd_detections.csv", grid, res.ocd.detections);
      write_solver_trace_csv(dir / "ocd_solver_trace.csv", res.diagnostics);
    }
    if (cfg.mf_enabled) {
      write_csv_grid(dir / "mf_max_magnitude.csv", grid, res.mf.magnitudes);
      write_pgm16(dir / "mf_max_magnitude.pgm", grid, res.mf.magnitudes);
      write_cube_slice_csv(dir / "mf_zero_velocity.csv", grid, cube, 0);
      write_velocity_map_csv(dir / "mf_velocity.csv", grid, res.mf.velocity_map, res.mf.magnitudes);
      write_detections_csv(dir / "mf_detections.csv", grid, res.mf.detections);
    }
    write_metrics(dir / "metrics.txt", m);
  }
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out_dir) atomic_write(*out_dir / "timing.txt", "runtime_s = " + format_double(res.runtime_s) + "\n");
  return res;
}

}  // namespace msar

// msar: simulate, invert and evaluate moving-target SAR experiments.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msar/analysis.hpp"
#include "msar/experiment.hpp"
#include "msar/io_util.hpp"
#include "msar/oracle_study.hpp"
#include "msar/parallel.hpp"
#include "msar/presets.hpp"
#include "msar/random.hpp"

namespace fs = std::filesystem;
using namespace msar;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNonConvergence = 3, kIo = 4 };

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

// Machine-readable failure line on stderr.
int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << "error: kind=" << kind << " exit=" << code << "\n" << message << "\n";
  return code;
}

ExperimentConfig resolve(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("exactly one of --config or --preset is required");
  ExperimentConfig cfg = c.config.empty() ? make_preset(c.preset) : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) {
  return c.out.empty() ? fs::path("out") / cfg.name : fs::path(c.out);
}

int cmd_run(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const fs::path dir = out_dir(c, cfg);
  const auto res = run_experiment(cfg, dir);
  std::cout << res.metrics.to_text();
  std::cout << "outputs = " << dir.string() << "\n";
  if (!res.converged) return fail(kNonConvergence, "non_convergence", "solver did not converge; outputs were written");
  return kOk;
}

int cmd_validate(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const auto rep = validate_config(cfg);
  std::cout << rep.to_text();
  if (rep.ok() && !c.out.empty()) {
    const fs::path path = fs::path(c.out) / (cfg.name + ".json");
    atomic_write(path, config_to_json(cfg));
    std::cout << "config = " << path.string() << "\n";
  }
  if (!rep.ok()) {
    std::string msg;
    for (const auto& e : rep.errors) msg += e + "\n";
    return fail(kConfig, "config", msg);
  }
  return kOk;
}

int cmd_kspace(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const ExperimentSetup setup = build_setup(cfg);
  const fs::path dir = out_dir(c, cfg);
  write_kspace_csv(dir / "kspace.csv", kspace_samples(setup.spec));
  const double bandwidth = cfg.frequency_mode == FrequencyMode::single_tone_common ? 0.0 : cfg.bandwidth_hz;
  MetricsReport rep;
  rep.set("f0_hz", cfg.f0_hz);
  rep.set("bandwidth_hz", bandwidth);
  rep.set("cone_width_deg", cfg.geometry.cone_width * 180.0 / kPi);
  rep.set("samples", setup.spec.n_measurements());
  if (cfg.geometry.cone_width < kPi / 2) {
    const auto b = resolution_bounds(cfg.f0_hz, bandwidth, cfg.geometry.cone_width);
    rep.set("rho_x_m", b.rho_x);
    rep.set("rho_y_m", b.rho_y);
  }
  write_metrics(dir / "resolution.txt", rep);
  std::cout << rep.to_text() << "outputs = " << dir.string() << "\n";
  return kOk;
}

int cmd_oracle(const Common& c, std::size_t instances) {
  OracleStudyOptions opt;
  opt.instances = instances;
  if (c.seed) opt.seed = *c.seed;
  const auto res = run_oracle_study(opt);
  const fs::path dir = c.out.empty() ? fs::path("out") / "oracle" : fs::path(c.out);
  write_oracle_report(dir, res);
  std::cout << read_file(dir / "oracle_summary.txt") << "outputs = " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-target multistatic SAR: overcomplete velocity dictionary imaging"};
  app.require_subcommand(1);
  Common common;
  std::size_t instances = 60;
  std::uint64_t seed_value = 0;
  std::vector<CLI::Option*> seed_options;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", common.config, "experiment JSON file");
      sub->add_option("--preset", common.preset, "built-in preset name");
    }
    sub->add_option("--out", common.out, "output directory");
    seed_options.push_back(sub->add_option("--seed", seed_value, "override the experiment seed"));
    sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
  };
  auto* run = app.add_subcommand("run", "simulate, reconstruct and score one experiment");
  add_common(run, true);
  auto* validate = app.add_subcommand("validate", "check a config; with --out, write its canonical JSON there");
  add_common(validate, true);
  auto* kspace = app.add_subcommand("kspace", "write k-space samples and resolution bounds");
  add_common(kspace, true);
  auto* oracle = app.add_subcommand("oracle", "compare l1 recovery with exhaustive l0 on small instances");
  add_common(oracle, false);
  oracle->add_option("--instances", instances, "number of random instances");
  app.add_subcommand("presets", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  for (const auto* opt : seed_options)
    if (opt->count() > 0) common.seed = seed_value;

  try {
    set_thread_count(common.threads);
    if (app.got_subcommand("presets")) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return kOk;
    }
    if (*run) return cmd_run(common);
    if (*validate) return cmd_validate(common);
    if (*kspace) return cmd_kspace(common);
    if (*oracle) return cmd_oracle(common, instances);
  } catch (const ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const ContractError& e) {
    return fail(kConfig, "contract", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIo, "io", e.what());
  }
  return kOk;
}

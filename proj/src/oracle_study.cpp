#include "msar/oracle_study.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msar/io_util.hpp"
#include "msar/random.hpp"
#include "msar/sparse_solver.hpp"

namespace msar {

namespace {

OperatorSpec small_spec(Rng& rng, std::size_t& n_hyp) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t nx = pick(1, 3), ny = pick(2, 3);
  n_hyp = pick(2, std::min<std::size_t>(4, 24 / (nx * ny)));

  GeometryOptions g;
  g.n_tx = pick(2, 4);
  g.n_rx = pick(2, 6);
  g.cone_width = deg_to_rad(45.0);
  g.seed = rng();
  OperatorSpec spec;
  spec.geometry = make_sensor_geometry(g);
  const bool chirp = unit(rng) < 0.5;
  const std::size_t n_f = chirp ? pick(2, 3) : 1;
  spec.waveforms = assign_frequencies(g.n_tx, 1.5e9, 50e6, chirp ? FrequencyMode::chirp : FrequencyMode::random_tones,
                                      1e-5, rng());
  spec.schedule = build_schedule(g.n_tx, 2e-3, n_f, RefTimePolicy::start, 1e-5);
  spec.grid = PixelGrid{nx, ny, 0.5 + 3.5 * unit(rng), 0.1 + 0.9 * unit(rng)};
  spec.velocity_set = {Vec2::Zero()};
  while (spec.velocity_set.size() < n_hyp)
    spec.velocity_set.push_back(Vec2(80.0 * (unit(rng) - 0.5), 80.0 * (unit(rng) - 0.5)));
  return spec;
}

double mutual_coherence(const ComplexMatrix& phi) {
  double mu = 0.0;
  for (Eigen::Index a = 0; a < phi.cols(); ++a)
    for (Eigen::Index b = a + 1; b < phi.cols(); ++b)
      mu = std::max(mu, std::abs(phi.col(a).dot(phi.col(b))) / (phi.col(a).norm() * phi.col(b).norm()));
  return mu;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

OracleStudyResult run_oracle_study(const OracleStudyOptions& options) {
  OracleStudyResult result;
  for (std::size_t i = 0; i < options.instances; ++i) {
    Rng rng(splitmix64(options.seed * 0x9e3779b97f4a7c15ULL + i));
    OracleInstance inst;
    inst.index = i;
    inst.sparsity = 1 + i % 2;
    std::size_t n_hyp = 0;
    const OperatorSpec spec = small_spec(rng, n_hyp);
    const MotionSarOperator op(spec);
    const ComplexMatrix phi = op.dense();
    const std::size_t P = spec.grid.size();
    inst.pixels = P;
    inst.hypotheses = n_hyp;
    inst.measurements = op.rows();
    inst.coherence = mutual_coherence(phi);
    inst.cutoff = 1.0 / (2.0 * static_cast<double>(inst.sparsity) - 1.0);
    inst.well_conditioned = inst.coherence < inst.cutoff;

    // Truth: distinct pixels, one hypothesis each.
    std::vector<std::size_t> pixels(P);
    for (std::size_t p = 0; p < P; ++p) pixels[p] = p;
    for (std::size_t j = 0; j < inst.sparsity; ++j)
      std::swap(pixels[j], pixels[std::uniform_int_distribution<std::size_t>(j, P - 1)(rng)]);
    std::uniform_real_distribution<double> amp(0.5, 1.5), phase(0.0, 2.0 * kPi);
    ComplexVector s = ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()));
    for (std::size_t j = 0; j < inst.sparsity; ++j) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(0, n_hyp - 1)(rng);
      const std::size_t col = pixels[j] * n_hyp + n;
      inst.truth.push_back(col);
      s[static_cast<Eigen::Index>(col)] = std::polar(amp(rng), phase(rng));
    }
    std::sort(inst.truth.begin(), inst.truth.end());
    const ComplexVector r = op.forward(s);

    const auto l0 = oracle_l0(phi, r, 2, 1e-10 * r.squaredNorm(), true, n_hyp);
    inst.oracle = l0.support;
    inst.oracle_feasible = l0.feasible;

    SolverConfig cfg;
    cfg.epsilon = 1e-8 * r.squaredNorm();
    cfg.tol = 1e-10;
    cfg.max_iters = 20000;
    cfg.bisection_steps = 30;
    const auto sol = solve_l1(op, r, cfg, P, n_hyp);
    const VelocityGrid vgrid(spec.velocity_set);
    const auto rec = select_max(sol.extended, vgrid);
    const auto mags = rec.magnitudes();
    const double peak = *std::max_element(mags.begin(), mags.end());
    for (std::size_t p = 0; p < P; ++p)
      if (peak > 0.0 && mags[p] > options.support_threshold * peak) inst.recovered.push_back(p * n_hyp + rec.hypothesis[p]);
    inst.match = inst.oracle_feasible && inst.recovered == inst.oracle;

    if (inst.well_conditioned) {
      ++result.well_conditioned;
      if (inst.match) ++result.well_matched;
    }
    if (inst.sparsity == 1) {
      ++result.one_sparse;
      if (inst.match) ++result.one_sparse_matched;
    }
    result.instances.push_back(std::move(inst));
  }
  return result;
}

void write_oracle_report(const std::filesystem::path& dir, const OracleStudyResult& result) {
  std::ostringstream csv;
  csv << "index,sparsity,pixels,hypotheses,measurements,coherence,cutoff,well_conditioned,truth,oracle,recovered,match\n";
  for (const auto& i : result.instances)
    csv << i.index << ',' << i.sparsity << ',' << i.pixels << ',' << i.hypotheses << ',' << i.measurements << ','
        << format_double(i.coherence) << ',' << format_double(i.cutoff) << ',' << (i.well_conditioned ? 1 : 0) << ','
        << join(i.truth) << ',' << join(i.oracle) << ',' << join(i.recovered) << ',' << (i.match ? 1 : 0) << '\n';
  atomic_write(dir / "oracle_instances.csv", csv.str());
  std::ostringstream sum;
  sum << "instances = " << result.instances.size() << "\n"
      << "well_conditioned = " << result.well_conditioned << "\n"
      << "well_conditioned_matched = " << result.well_matched << "\n"
      << "well_conditioned_rate = " << format_double(result.well_rate()) << "\n"
      << "one_sparse = " << result.one_sparse << "\n"
      << "one_sparse_matched = " << result.one_sparse_matched << "\n";
  atomic_write(dir / "oracle_summary.txt", sum.str());
}

}  // namespace msar

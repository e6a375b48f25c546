#include "msar/sparse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "msar/random.hpp"

namespace msar {

void SolverConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ConfigError("solver: epsilon must be nonnegative");
  if (mode == SolverMode::lambda_penalized && !(lambda > 0.0))
    throw ConfigError("solver: lambda must be positive in penalized mode");
  if (!(tol > 0.0)) throw ConfigError("solver: tol must be positive");
  if (max_iters == 0) throw ConfigError("solver: max_iters must be positive");
  if (tol_window == 0) throw ConfigError("solver: tol_window must be positive");
  if (!(band_low > 0.0 && band_low < 1.0)) throw ConfigError("solver: band_low must lie in (0, 1)");
  if (backend == SolverBackend::interior_point)
    throw ConfigError("solver: the interior_point backend is not available in this build");
}

Complex complex_soft_threshold(Complex z, double tau) {
  const double mag = std::abs(z);
  if (mag <= tau || mag == 0.0) return {0.0, 0.0};
  return z * (1.0 - tau / mag);
}

double estimate_operator_norm_sq(const LinearOperator& op, std::size_t iters, double rel_tol) {
  Rng rng(0x5eed);
  std::normal_distribution<double> gauss;
  ComplexVector v(static_cast<Eigen::Index>(op.cols()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  double estimate = 0.0;
  ComplexVector av, w;
  for (std::size_t it = 0; it < iters; ++it) {
    op.apply(v, av);
    op.apply_adjoint(av, w);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = it > 0 && std::abs(next - estimate) <= rel_tol * next;
    estimate = next;
    if (done) break;
  }
  return estimate;
}

namespace {

double l1_norm(const ComplexVector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::abs(x[i]);
  return s;
}

struct InnerResult {
  ComplexVector x;
  std::size_t iterations = 0;
  bool converged = false;
  double residual_sq = 0.0;
  std::vector<double> objective, residual, l1;
};

// Accelerated proximal gradient on |Phi x - r|^2 + lambda |x|_1. Restarting
// on any objective increase (and retrying from the last accepted iterate)
// keeps the accepted objective sequence non-increasing.
InnerResult penalized_solve(const LinearOperator& op, const ComplexVector& r, double lambda,
                            const ComplexVector& x0, const SolverConfig& cfg, double& lipschitz) {
  InnerResult out;
  ComplexVector x = x0;
  ComplexVector ax = op.forward(x);
  ComplexVector x_prev = x, ax_prev = ax;
  double fx = (ax - r).squaredNorm();
  double obj = fx + lambda * l1_norm(x);
  out.objective.push_back(obj);
  out.residual.push_back(std::sqrt(fx));
  out.l1.push_back(l1_norm(x));

  double t = 1.0;
  ComplexVector y, ay, grad, z, az, resid;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    ++out.iterations;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    y = x + beta * (x - x_prev);
    ay = ax + beta * (ax - ax_prev);
    resid = ay - r;
    const double fy = resid.squaredNorm();
    op.apply_adjoint(resid, grad);
    grad *= 2.0;

    double fz = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      z.resize(y.size());
      const double step = 1.0 / lipschitz;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        z[i] = complex_soft_threshold(y[i] - step * grad[i], lambda * step);
      op.apply(z, az);
      fz = (az - r).squaredNorm();
      const ComplexVector d = z - y;
      const double model = fy + grad.dot(d).real() + 0.5 * lipschitz * d.squaredNorm();
      if (fz <= model * (1.0 + 1e-12) + 1e-300) break;
      lipschitz *= 2.0;
    }
    const double l1z = l1_norm(z);
    const double obj_z = fz + lambda * l1z;

    if (obj_z > obj) {
      if (beta == 0.0) {
        // A plain proximal step no longer decreases: rounding floor reached.
        out.converged = true;
        break;
      }
      if (cfg.restart) {
        // Drop the momentum and redo the step from x.
        t = 1.0;
        x_prev = x;
        ax_prev = ax;
        continue;
      }
    }
    x_prev.swap(x);
    ax_prev.swap(ax);
    x.swap(z);
    ax.swap(az);
    t = t_next;
    obj = obj_z;
    out.objective.push_back(obj);
    out.residual.push_back(std::sqrt(fz));
    out.l1.push_back(l1z);

    if (obj == 0.0) {
      out.converged = true;
      break;
    }
    const std::size_t k = out.objective.size();
    if (k > cfg.tol_window) {
      const double past = out.objective[k - 1 - cfg.tol_window];
      if (std::abs(past - obj) <= cfg.tol * std::max(std::abs(obj), 1e-300)) {
        out.converged = true;
        break;
      }
    }
  }
  out.residual_sq = (ax - r).squaredNorm();
  out.x = std::move(x);
  return out;
}

void record(SolverDiagnostics& d, InnerResult& inner, double lambda) {
  d.iterations += inner.iterations;
  d.converged = inner.converged;
  d.lambda = lambda;
  d.residual_sq = inner.residual_sq;
  d.l1_norm = l1_norm(inner.x);
  d.objective_trace = std::move(inner.objective);
  d.residual_trace = std::move(inner.residual);
  d.l1_trace = std::move(inner.l1);
}

}  // namespace

L1Solution solve_l1(const LinearOperator& op, const ComplexVector& r, const SolverConfig& cfg,
                    std::size_t n_pixels, std::size_t n_hyp) {
  cfg.validate();
  if (static_cast<std::size_t>(r.size()) != op.rows())
    throw ContractError("solve_l1: measurement length does not match the operator");
  if (n_pixels * n_hyp != op.cols())
    throw ContractError("solve_l1: P * N does not match the operator width");

  L1Solution sol;
  sol.extended = ExtendedImage(n_pixels, n_hyp);
  auto& diag = sol.diagnostics;
  const ComplexVector zero = ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()));

  const ComplexVector back = op.adjoint(r);
  const double lambda_max = 2.0 * (back.size() ? back.cwiseAbs().maxCoeff() : 0.0);
  const double r_sq = r.squaredNorm();

  auto zero_solution = [&](double lambda) {
    diag.converged = true;
    diag.lambda = lambda;
    diag.residual_sq = r_sq;
    diag.objective_trace = {r_sq};
    diag.residual_trace = {std::sqrt(r_sq)};
    diag.l1_trace = {0.0};
    return sol;
  };

  if (cfg.mode == SolverMode::lambda_penalized && cfg.lambda >= lambda_max)
    return zero_solution(cfg.lambda);
  if (cfg.mode == SolverMode::epsilon_constrained && r_sq <= cfg.epsilon)
    return zero_solution(lambda_max);

  double lipschitz = 2.0 * estimate_operator_norm_sq(op, cfg.power_iters, cfg.power_tol) * 1.02;
  if (!(lipschitz > 0.0)) lipschitz = 1.0;

  if (cfg.mode == SolverMode::lambda_penalized) {
    auto inner = penalized_solve(op, r, cfg.lambda, zero, cfg, lipschitz);
    sol.extended.coeffs = inner.x;
    record(diag, inner, cfg.lambda);
    diag.lipschitz = lipschitz;
    return sol;
  }

  // Residual grows monotonically with lambda; bisect log(lambda) until the
  // residual lands in [band_low * eps, eps].
  double lo = lambda_max * 1e-7;
  double hi = lambda_max;
  ComplexVector warm = zero;
  std::optional<InnerResult> chosen;   // in-band, or the sparsest feasible iterate
  double chosen_lambda = 0.0;
  InnerResult last;
  double last_lambda = 0.0;
  diag.bisection_ok = false;
  for (std::size_t step = 0; step < cfg.bisection_steps; ++step) {
    const double mid = std::sqrt(lo * hi);
    last = penalized_solve(op, r, mid, warm, cfg, lipschitz);
    last_lambda = mid;
    diag.iterations += last.iterations;
    diag.bisection_steps = step + 1;
    warm = last.x;
    const double res = last.residual_sq;
    if (res > cfg.epsilon) {
      hi = mid;
      continue;
    }
    if (!chosen || mid > chosen_lambda) {
      chosen = last;
      chosen_lambda = mid;
    }
    if (res < cfg.band_low * cfg.epsilon) {
      lo = mid;
      continue;
    }
    diag.bisection_ok = true;
    break;
  }
  if (!chosen) {
    chosen = std::move(last);
    chosen_lambda = last_lambda;
  }
  InnerResult& best_inner = *chosen;
  const double best_lambda = chosen_lambda;
  diag.bracket_low = lo;
  diag.bracket_high = hi;
  const std::size_t total_iters = diag.iterations;
  sol.extended.coeffs = best_inner.x;
  record(diag, best_inner, best_lambda);
  diag.iterations = total_iters;
  diag.lipschitz = lipschitz;
  return sol;
}

std::vector<double> Reconstruction::magnitudes() const {
  std::vector<double> out(static_cast<std::size_t>(image.size()));
  for (Eigen::Index p = 0; p < image.size(); ++p) out[static_cast<std::size_t>(p)] = std::abs(image[p]);
  return out;
}

Reconstruction select_max(const ExtendedImage& extended, const VelocityGrid& grid) {
  if (extended.n_hyp != grid.size())
    throw ContractError("select_max: extended image and velocity grid disagree on N");
  Reconstruction rec;
  rec.extended = extended;
  rec.image = ComplexVector::Zero(static_cast<Eigen::Index>(extended.n_pixels));
  rec.hypothesis.assign(extended.n_pixels, 0);
  rec.velocity_map.assign(extended.n_pixels, grid[0]);
  for (std::size_t p = 0; p < extended.n_pixels; ++p) {
    std::size_t best = 0;
    double best_mag = std::abs(extended.at(p, 0));
    for (std::size_t n = 1; n < extended.n_hyp; ++n) {
      const double mag = std::abs(extended.at(p, n));
      if (mag > best_mag) {
        best_mag = mag;
        best = n;
      }
    }
    rec.image[static_cast<Eigen::Index>(p)] = extended.at(p, best);
    rec.hypothesis[p] = best;
    rec.velocity_map[p] = grid[best];
  }
  return rec;
}

std::vector<std::vector<PixelHypothesis>> select_top_m(const ExtendedImage& extended,
                                                       const VelocityGrid& grid,
                                                       std::span<const std::size_t> m_per_pixel) {
  if (extended.n_hyp != grid.size())
    throw ContractError("select_top_m: extended image and velocity grid disagree on N");
  if (m_per_pixel.size() != extended.n_pixels)
    throw ContractError("select_top_m: need one M(p) per pixel");
  std::vector<std::vector<PixelHypothesis>> out(extended.n_pixels);
  std::vector<std::size_t> order(extended.n_hyp);
  for (std::size_t p = 0; p < extended.n_pixels; ++p) {
    const std::size_t keep = m_per_pixel[p];
    if (keep < 1 || keep > extended.n_hyp) throw ContractError("select_top_m: M(p) must lie in [1, N]");
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(extended.at(p, a)) > std::abs(extended.at(p, b));
    });
    for (std::size_t i = 0; i < keep; ++i)
      out[p].push_back({order[i], extended.at(p, order[i]), grid[order[i]]});
  }
  return out;
}

}  // namespace msar

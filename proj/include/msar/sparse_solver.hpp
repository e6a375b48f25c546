#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "msar/forward_model.hpp"
#include "msar/velocity_dictionary.hpp"

namespace msar {

enum class SolverMode {
  epsilon_constrained,  // min |s|_1 s.t. |r - Phi s|^2 <= epsilon
  lambda_penalized,     // min |r - Phi s|^2 + lambda |s|_1
};

enum class SolverBackend { proximal_gradient, interior_point };

struct SolverConfig {
  SolverMode mode = SolverMode::epsilon_constrained;
  double epsilon = 0.0;
  double lambda = 1.0;
  std::size_t max_iters = 2000;
  double tol = 1e-5;           // relative objective change over `tol_window` iterations
  std::size_t tol_window = 5;
  SolverBackend backend = SolverBackend::proximal_gradient;
  bool restart = true;
  std::size_t bisection_steps = 20;
  double band_low = 0.95;      // accept |res|^2 in [band_low * epsilon, epsilon]
  std::size_t power_iters = 50;
  double power_tol = 1e-4;

  void validate() const;
};

struct SolverDiagnostics {
  std::size_t iterations = 0;          // summed over every inner solve
  bool converged = false;
  double lambda = 0.0;
  double lipschitz = 0.0;              // final step constant L (gradient of |r - Phi s|^2)
  double residual_sq = 0.0;
  double l1_norm = 0.0;
  std::vector<double> objective_trace;  // final inner solve
  std::vector<double> residual_trace;   // |r - Phi s|_2, final inner solve
  std::vector<double> l1_trace;
  // Constrained mode only.
  std::size_t bisection_steps = 0;
  bool bisection_ok = true;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
};

struct L1Solution {
  ExtendedImage extended;
  SolverDiagnostics diagnostics;
};

/// z * max(1 - tau / |z|, 0): prox of tau |.| over the complex plane.
Complex complex_soft_threshold(Complex z, double tau);

/// Largest eigenvalue of Phi^H Phi by power iteration.
double estimate_operator_norm_sq(const LinearOperator& op, std::size_t iters, double rel_tol);

// Step 1 of the two-step inversion: complex-modulus l1 over the extended
// operator, solved by accelerated proximal gradient with restart.
L1Solution solve_l1(const LinearOperator& op, const ComplexVector& r, const SolverConfig& cfg,
                    std::size_t n_pixels, std::size_t n_hyp);

struct Reconstruction {
  ExtendedImage extended;
  ComplexVector image;                 // s_p
  std::vector<std::size_t> hypothesis; // n_hat, 0-based
  std::vector<Vec2> velocity_map;      // v_hat_p
  SolverDiagnostics diagnostics;

  std::vector<double> magnitudes() const;
};

/// Step 2: per-pixel magnitude argmax over hypotheses, smallest n on ties.
Reconstruction select_max(const ExtendedImage& extended, const VelocityGrid& grid);

struct PixelHypothesis {
  std::size_t hypothesis = 0;
  Complex value{};
  Vec2 velocity = Vec2::Zero();
};

/// Per pixel the M(p) largest-magnitude hypotheses, sorted by magnitude descending.
std::vector<std::vector<PixelHypothesis>> select_top_m(const ExtendedImage& extended,
                                                       const VelocityGrid& grid,
                                                       std::span<const std::size_t> m_per_pixel);

struct L0Solution {
  std::vector<std::size_t> support;  // 0-based column indices, ascending
  ComplexVector coeffs;              // full-length, zero off the support
  double residual_sq = 0.0;
  bool feasible = false;
};

// Exhaustive l0 search: the smallest support (ties broken by residual) with
// |r - Phi s|^2 <= delta, least-squares coefficients per support. With
// one_per_pixel, at most one hypothesis per pixel block of n_hyp columns.
// Test scale only: at most kOracleMaxColumns columns and budget <= 3.
L0Solution oracle_l0(const ComplexMatrix& phi, const ComplexVector& r, std::size_t budget,
                     double delta, bool one_per_pixel, std::size_t n_hyp);
inline constexpr std::size_t kOracleMaxColumns = 24;

}  // namespace msar

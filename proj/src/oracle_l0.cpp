#include <cmath>
#include <limits>

#include "msar/sparse_solver.hpp"

namespace msar {

namespace {

struct Search {
  const ComplexMatrix& phi;
  const ComplexVector& r;
  bool one_per_pixel;
  std::size_t n_hyp;

  std::vector<std::size_t> current;
  std::vector<std::size_t> best_support;
  ComplexVector best_coeffs;
  double best_res = std::numeric_limits<double>::infinity();

  void evaluate() {
    ComplexVector coeffs;
    double res;
    if (current.empty()) {
      res = r.squaredNorm();
    } else {
      ComplexMatrix sub(phi.rows(), static_cast<Eigen::Index>(current.size()));
      for (std::size_t i = 0; i < current.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = phi.col(static_cast<Eigen::Index>(current[i]));
      coeffs = sub.colPivHouseholderQr().solve(r);
      res = (r - sub * coeffs).squaredNorm();
    }
    if (res < best_res) {
      best_res = res;
      best_support = current;
      best_coeffs = coeffs;
    }
  }

  // Lexicographic enumeration of all size-`size` supports starting at `from`.
  void enumerate(std::size_t from, std::size_t size) {
    if (current.size() == size) {
      evaluate();
      return;
    }
    for (std::size_t c = from; c < static_cast<std::size_t>(phi.cols()); ++c) {
      if (one_per_pixel && !current.empty() && current.back() / n_hyp == c / n_hyp) continue;
      current.push_back(c);
      enumerate(c + 1, size);
      current.pop_back();
    }
  }
};

}  // namespace

L0Solution oracle_l0(const ComplexMatrix& phi, const ComplexVector& r, std::size_t budget,
                     double delta, bool one_per_pixel, std::size_t n_hyp) {
  if (static_cast<std::size_t>(phi.cols()) > kOracleMaxColumns || budget > 3)
    throw ContractError("oracle_l0: instance too large (at most 24 columns and budget 3)");
  if (phi.rows() != r.size()) throw ContractError("oracle_l0: measurement length mismatch");
  if (n_hyp == 0 || phi.cols() % static_cast<Eigen::Index>(n_hyp) != 0)
    throw ContractError("oracle_l0: column count must be a multiple of N");

  L0Solution out;
  out.coeffs = ComplexVector::Zero(phi.cols());
  std::vector<std::size_t> support;
  ComplexVector coeffs;
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t size = 0; size <= budget; ++size) {
    Search search{phi, r, one_per_pixel, n_hyp, {}, {}, {}, std::numeric_limits<double>::infinity()};
    search.enumerate(0, size);
    if (!std::isfinite(search.best_res)) continue;  // no admissible support of this size
    support = search.best_support;
    coeffs = search.best_coeffs;
    residual = search.best_res;
    if (search.best_res <= delta) {
      out.feasible = true;
      break;
    }
  }
  out.support = support;
  out.residual_sq = residual;
  for (std::size_t i = 0; i < support.size(); ++i)
    out.coeffs[static_cast<Eigen::Index>(support[i])] = coeffs[static_cast<Eigen::Index>(i)];
  return out;
}

}  // namespace msar

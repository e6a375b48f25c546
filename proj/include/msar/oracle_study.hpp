#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace msar {

struct OracleStudyOptions {
  std::size_t instances = 60;
  std::uint64_t seed = 1;
  double support_threshold = 0.1;  // relative to the largest recovered |s_p|
};

// One noiseless radar instance small enough (P * N <= 24, budget 2) for the
// exhaustive l0 search.
struct OracleInstance {
  std::size_t index = 0;
  std::size_t sparsity = 0;
  std::size_t pixels = 0;
  std::size_t hypotheses = 0;
  std::size_t measurements = 0;
  double coherence = 0.0;  // largest normalized inner product between distinct columns
  double cutoff = 0.0;     // 1 / (2k - 1)
  bool well_conditioned = false;
  std::vector<std::size_t> truth;      // column indices p * N + n
  std::vector<std::size_t> oracle;
  std::vector<std::size_t> recovered;  // l1 + per-pixel argmax
  bool oracle_feasible = false;
  bool match = false;
};

struct OracleStudyResult {
  std::vector<OracleInstance> instances;
  std::size_t well_conditioned = 0;
  std::size_t well_matched = 0;
  std::size_t one_sparse = 0;
  std::size_t one_sparse_matched = 0;

  double well_rate() const {
    return well_conditioned == 0 ? 0.0 : static_cast<double>(well_matched) / static_cast<double>(well_conditioned);
  }
};

OracleStudyResult run_oracle_study(const OracleStudyOptions& options);

/// One row per instance plus a summary text file next to it.
void write_oracle_report(const std::filesystem::path& dir, const OracleStudyResult& result);

}  // namespace msar

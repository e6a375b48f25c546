#include "msar/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msar/io_util.hpp"

namespace msar {

std::vector<KSpaceSample> kspace_samples(const OperatorSpec& spec) {
  const auto layout = measurement_layout(spec.geometry, spec.schedule);
  std::vector<KSpaceSample> out;
  out.reserve(layout.size());
  for (std::size_t m = 0; m < layout.size(); ++m) {
    const auto& row = layout[m];
    KSpaceSample s;
    s.row = m;
    s.pulse = row.pulse;
    s.tx = row.tx;
    s.rx = row.rx;
    s.time = row.pulse_time + row.time;
    s.k = spatial_frequency(spec, row) * spec.geometry.bistatic(row.tx, row.rx);
    out.push_back(s);
  }
  return out;
}

ResolutionBounds resolution_bounds(double f0_hz, double bandwidth_hz, double dtheta, double c) {
  if (!(dtheta > 0.0) || !(dtheta < kPi / 2))
    throw ContractError("resolution_bounds: cone width must lie in (0, pi/2)");
  if (!(bandwidth_hz >= 0.0)) throw ContractError("resolution_bounds: bandwidth must be nonnegative");
  if (!(f0_hz > 0.5 * bandwidth_hz)) throw ContractError("resolution_bounds: f0 must exceed B/2");
  const double f_hi = f0_hz + 0.5 * bandwidth_hz;
  const double f_lo = f0_hz - 0.5 * bandwidth_hz;
  const double b_eq = f_hi - f_lo * std::cos(0.5 * dtheta);
  return {c / (2.0 * b_eq), c / (4.0 * f_hi * std::sin(0.5 * dtheta))};
}

double pixel_error(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size()) throw ContractError("pixel_error: image sizes differ");
  if (truth.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - estimate[i];
    sum += d * d;
  }
  return sum / static_cast<double>(truth.size());
}

DetectionScore score_detections(const std::vector<Detection>& detections, const SceneTruth& truth,
                                std::size_t n_pixels) {
  std::vector<bool> occupied(n_pixels, false), hit(n_pixels, false);
  for (const auto& s : truth.scatterers) occupied.at(s.pixel) = true;
  DetectionScore score;
  for (const auto& d : detections) {
    if (occupied.at(d.pixel)) {
      ++score.true_positives;
      hit[d.pixel] = true;
    } else {
      ++score.false_positives;
    }
  }
  for (std::size_t p = 0; p < n_pixels; ++p)
    if (occupied[p] && !hit[p]) ++score.false_negatives;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  score.precision = ratio(score.true_positives, score.true_positives + score.false_positives);
  score.recall = ratio(score.true_positives, score.true_positives + score.false_negatives);
  return score;
}

VelocityScore velocity_accuracy(const std::vector<Detection>& detections, const SceneTruth& truth,
                                const VelocityGrid& grid) {
  VelocityScore score;
  for (const auto& d : detections) {
    const auto it = std::find_if(truth.scatterers.begin(), truth.scatterers.end(),
                                 [&](const Scatterer& s) { return s.pixel == d.pixel; });
    if (it == truth.scatterers.end() || it->velocity.isZero(0.0)) continue;
    ++score.evaluated;
    const auto nearest = grid.nearest(it->velocity);
    if (std::find(nearest.begin(), nearest.end(), d.hypothesis) != nearest.end()) ++score.correct;
  }
  score.accuracy = score.evaluated == 0 ? 1.0
                                        : static_cast<double>(score.correct) / static_cast<double>(score.evaluated);
  return score;
}

void MetricsReport::set(const std::string& key, const std::string& value) {
  if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
    throw ContractError("metrics: keys may not contain '=' or newlines");
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void MetricsReport::set(const std::string& key, double value) { set(key, format_double(value)); }

void MetricsReport::set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }

std::string MetricsReport::value(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ContractError("metrics: no key " + key);
}

std::string MetricsReport::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

MetricsReport MetricsReport::parse(const std::string& text) {
  MetricsReport report;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    report.set(line.substr(0, eq), line.substr(eq + 3));
  }
  return report;
}

}  // namespace msar

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "msar/geometry.hpp"
#include "msar/types.hpp"
#include "msar/waveform.hpp"

namespace msar {

enum class DopplerModel {
  first_order,  // (1 + v.e_k/c) / (1 - v.e_l/c) ~ 1 + v.e_k/c, the replication model
  exact,        // keeps the full ratio; for approximation-error studies only
};

// One demodulated sample. Rows are ordered pulse-major, then receiver channel,
// then intra-pulse sample: m = (pulse * channels + channel) * n_f + sample.
struct Measurement {
  std::size_t pulse = 0;
  std::size_t tx = 0;
  std::size_t rx = 0;
  std::size_t sample = 0;
  double pulse_time = 0.0;  // t_k
  double offset = 0.0;      // u = t - tau_kl(x_o)
  double time = 0.0;        // t
};

std::vector<Measurement> measurement_layout(const SensorGeometry& geometry,
                                            const PulseSchedule& schedule);

struct PhaseHistory {
  ComplexVector values;
  std::size_t n_pulses = 0;    // N_tx in the file header
  std::size_t n_channels = 0;  // N_rx in the file header (1 when monostatic)
  std::size_t n_f = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Row index of (pulse, channel, sample).
  std::size_t index(std::size_t pulse, std::size_t channel, std::size_t sample) const {
    return (pulse * n_channels + channel) * n_f + sample;
  }
};

struct OperatorSpec {
  SensorGeometry geometry;
  PixelGrid grid;
  std::vector<Waveform> waveforms;  // one per transmitter
  PulseSchedule schedule;
  std::vector<Vec2> velocity_set{Vec2::Zero()};
  DopplerModel doppler = DopplerModel::first_order;

  std::size_t n_hypotheses() const { return velocity_set.size(); }
  std::size_t n_measurements() const;
  /// Throws ConfigError on inconsistent sizes or |v| >= 1e-3 c.
  void validate() const;
};

/// tau_kl(x) = -x.e_kl / c.
double static_delay(const Vec2& x, const Vec2& e_kl, double c = kSpeedOfLight);

/// eps_kl(x, v) = -tau_k(x_o) + [x + (t_k - t_ref) v].e_l / c for the transmitter firing `pulse`.
double motion_epsilon(const Vec2& x, const Vec2& v, std::size_t pulse, std::size_t rx,
                      const SensorGeometry& geometry, const PulseSchedule& schedule);

/// Omega_kl(t) in rad/m.
double spatial_frequency(const OperatorSpec& spec, const Measurement& m);

/// Stationary kernel exp(-j Omega_kl(t) x.e_kl).
Complex static_phase_element(const OperatorSpec& spec, const Measurement& m, const Vec2& x);

/// Full demodulated kernel for a scatterer at x (reference time) moving with v.
Complex phase_element(const OperatorSpec& spec, const Measurement& m, const Vec2& x, const Vec2& v);

class LinearOperator {
public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(const ComplexVector& x, ComplexVector& y) const = 0;
  virtual void apply_adjoint(const ComplexVector& y, ComplexVector& x) const = 0;

  ComplexVector forward(const ComplexVector& x) const {
    ComplexVector y;
    apply(x, y);
    return y;
  }
  ComplexVector adjoint(const ComplexVector& y) const {
    ComplexVector x;
    apply_adjoint(y, x);
    return x;
  }
};

class DenseOperator final : public LinearOperator {
public:
  explicit DenseOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {}
  std::size_t rows() const override { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const override { return static_cast<std::size_t>(matrix_.cols()); }
  void apply(const ComplexVector& x, ComplexVector& y) const override;
  void apply_adjoint(const ComplexVector& y, ComplexVector& x) const override;
  const ComplexMatrix& matrix() const { return matrix_; }

private:
  ComplexMatrix matrix_;
};

// Matrix-free Phi_V. Column (p, n) sits at p * N + n and holds the kernel of
// pixel p under velocity hypothesis n.
//
// Every kernel phase is affine in the pixel coordinates,
//   phase = x * a_x(m, n) + y * a_y(m, n) + b(m, n),
// so each row factorises into per-column x and y phasor tables of size
// (nx + ny) * N. Those tables are cached when they fit under a memory cap and
// rebuilt per row otherwise; no M x PN matrix is ever formed.
class MotionSarOperator final : public LinearOperator {
public:
  explicit MotionSarOperator(OperatorSpec spec);

  std::size_t rows() const override { return layout_.size(); }
  std::size_t cols() const override { return spec_.grid.size() * spec_.n_hypotheses(); }
  void apply(const ComplexVector& coeffs, ComplexVector& out) const override;
  void apply_adjoint(const ComplexVector& r, ComplexVector& out) const override;

  const OperatorSpec& spec() const { return spec_; }
  const std::vector<Measurement>& layout() const { return layout_; }
  PhaseHistory make_history(ComplexVector values) const;

  /// Column (p, n) evaluated element by element through phase_element.
  ComplexVector column(std::size_t pixel, std::size_t hypothesis) const;

  /// Dense Phi built entry by entry from phase_element. Test oracle only;
  /// refuses anything above kDenseEntryCap entries.
  ComplexMatrix dense() const;
  static constexpr std::size_t kDenseEntryCap = 10'000'000;

private:
  void row_tables(std::size_t m, Complex* x_table, Complex* y_table) const;
  const Complex* cached_x(std::size_t m) const;
  const Complex* cached_y(std::size_t m) const;

  OperatorSpec spec_;
  std::vector<Measurement> layout_;
  std::vector<double> x_coords_;
  std::vector<double> y_coords_;
  std::vector<Complex> x_tables_;  // rows * nx * N when cached
  std::vector<Complex> y_tables_;  // rows * ny * N when cached
  bool cached_ = false;
};

struct NoisyHistory {
  PhaseHistory history;
  double signal_norm = 0.0;
  double noise_norm = 0.0;
};

// Adds circular complex Gaussian noise rescaled so that
// 20 log10(|r| / |n|) equals snr_db exactly. +inf leaves r untouched.
NoisyHistory add_noise(const PhaseHistory& clean, double snr_db, std::uint64_t seed);

// Binary layout: four little-endian int64 (M, N_tx, N_rx, N_f) followed by M
// interleaved little-endian float64 (re, im) pairs.
void write_phase_history(const std::filesystem::path& path, const PhaseHistory& history);
PhaseHistory read_phase_history(const std::filesystem::path& path);
/// CSV with header m,k,l,t,re,im (k = pulse index, l = receiver index,
/// t = absolute sample time t_k + t).
void write_phase_history_csv(const std::filesystem::path& path, const PhaseHistory& history,
                             const std::vector<Measurement>& layout);

}  // namespace msar

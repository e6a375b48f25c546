#include "msar/forward_model.hpp"

#include <cmath>
#include <sstream>

#include "msar/parallel.hpp"
#include "msar/random.hpp"

namespace msar {

namespace {

// Cache the per-row phasor tables up to this many complex entries (64 MiB).
constexpr std::size_t kTableCacheLimit = std::size_t{1} << 22;
constexpr std::size_t kForwardChunks = 64;
constexpr std::size_t kAdjointChunks = 16;

// exp(-j theta)
inline Complex cis_neg(double theta) { return {std::cos(theta), -std::sin(theta)}; }

struct RowKernel {
  double omega;     // Omega_kl(t), rad/m
  Vec2 e_kl;
  Vec2 e_l;
};

RowKernel row_kernel(const OperatorSpec& spec, const Measurement& m) {
  return {spatial_frequency(spec, m), spec.geometry.bistatic(m.tx, m.rx),
          spec.geometry.rx_direction(m.rx)};
}

// Coefficient g multiplying x.e_l and the pixel-independent phase h, so that
// the motion phase equals g * x.e_l + h.
std::pair<double, double> motion_terms(const OperatorSpec& spec, const Measurement& m,
                                       const RowKernel& k, const Vec2& v) {
  const double c = spec.geometry.wave_speed;
  const double dt = m.pulse_time - spec.schedule.reference_time;
  const double v_kl = v.dot(k.e_kl);
  const double v_l = v.dot(k.e_l);
  if (spec.doppler == DopplerModel::first_order) {
    const double tau_k0 = spec.geometry.origin_delays_tx[m.tx];
    const double g = k.omega * v_kl / c;
    const double h = k.omega * v_kl * (m.time + dt - tau_k0 + dt * v_l / c);
    return {g, h};
  }
  const Vec2 e_k = spec.geometry.tx_direction(m.tx);
  const double tau_l0 = spec.geometry.origin_delays_rx[m.rx];
  const double q = (v.dot(e_k) + v_l) / (c - v_l);  // Doppler ratio minus one
  const double g = k.omega * q;
  const double h = k.omega * (dt * v_kl + q * c * (m.time - tau_l0) + q * dt * v_l);
  return {g, h};
}

}  // namespace

std::vector<Measurement> measurement_layout(const SensorGeometry& geometry,
                                            const PulseSchedule& schedule) {
  std::vector<Measurement> rows;
  const std::size_t channels = geometry.receivers_per_pulse();
  rows.reserve(schedule.n_pulses() * channels * schedule.samples_per_pulse);
  for (std::size_t j = 0; j < schedule.n_pulses(); ++j) {
    const std::size_t k = schedule.pulse_tx[j];
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const std::size_t l = geometry.receiver_for(k, ch);
      const double tau0 = geometry.origin_delay(k, l);
      for (std::size_t s = 0; s < schedule.samples_per_pulse; ++s) {
        Measurement m;
        m.pulse = j;
        m.tx = k;
        m.rx = l;
        m.sample = s;
        m.pulse_time = schedule.pulse_times[j];
        m.offset = schedule.sample_offsets[s];
        m.time = tau0 + m.offset;
        rows.push_back(m);
      }
    }
  }
  return rows;
}

std::size_t OperatorSpec::n_measurements() const {
  return schedule.n_pulses() * geometry.receivers_per_pulse() * schedule.samples_per_pulse;
}

void OperatorSpec::validate() const {
  geometry.validate();
  grid.validate();
  if (waveforms.size() != geometry.n_tx())
    throw ConfigError("operator: one waveform per transmitter is required");
  if (schedule.n_pulses() == 0 || schedule.sample_offsets.size() != schedule.samples_per_pulse)
    throw ConfigError("operator: malformed pulse schedule");
  for (std::size_t k : schedule.pulse_tx)
    if (k >= geometry.n_tx()) throw ConfigError("operator: schedule fires a missing transmitter");
  if (velocity_set.empty()) throw ConfigError("operator: empty velocity set");
  const double limit = 1e-3 * geometry.wave_speed;
  for (const auto& v : velocity_set) {
    if (!v.allFinite()) throw ConfigError("operator: non-finite velocity hypothesis");
    if (v.norm() >= limit) {
      std::ostringstream msg;
      msg << "operator: |v| = " << v.norm() << " m/s violates |v|/c < 1e-3";
      throw ConfigError(msg.str());
    }
  }
}

double static_delay(const Vec2& x, const Vec2& e_kl, double c) { return -x.dot(e_kl) / c; }

double motion_epsilon(const Vec2& x, const Vec2& v, std::size_t pulse, std::size_t rx,
                      const SensorGeometry& geometry, const PulseSchedule& schedule) {
  const std::size_t k = schedule.pulse_tx.at(pulse);
  const double dt = schedule.pulse_times.at(pulse) - schedule.reference_time;
  return -geometry.origin_delays_tx.at(k) +
         (x + dt * v).dot(geometry.rx_direction(rx)) / geometry.wave_speed;
}

double spatial_frequency(const OperatorSpec& spec, const Measurement& m) {
  const auto& w = spec.waveforms[m.tx];
  const double tau0 = spec.geometry.origin_delay(m.tx, m.rx);
  return (w.carrier - 2.0 * w.chirp_rate * (m.time - tau0)) / spec.geometry.wave_speed;
}

Complex static_phase_element(const OperatorSpec& spec, const Measurement& m, const Vec2& x) {
  return cis_neg(spatial_frequency(spec, m) * x.dot(spec.geometry.bistatic(m.tx, m.rx)));
}

Complex phase_element(const OperatorSpec& spec, const Measurement& m, const Vec2& x,
                      const Vec2& v) {
  const double omega = spatial_frequency(spec, m);
  const Vec2 e_kl = spec.geometry.bistatic(m.tx, m.rx);
  const Complex stationary = cis_neg(omega * x.dot(e_kl));
  if (spec.doppler == DopplerModel::first_order) {
    const double eps = motion_epsilon(x, v, m.pulse, m.rx, spec.geometry, spec.schedule);
    const double dt = m.pulse_time - spec.schedule.reference_time;
    return stationary * cis_neg(omega * (m.time + dt + eps) * v.dot(e_kl));
  }
  // Exact ratio: the argument shift relative to the stationary delay is
  // [x'.e_kl + q c (t - tau_l(x_o)) + q x'.e_l] / c - x.e_kl / c, x' = x + (t_k - t_ref) v.
  const double c = spec.geometry.wave_speed;
  const Vec2 e_k = spec.geometry.tx_direction(m.tx);
  const Vec2 e_l = spec.geometry.rx_direction(m.rx);
  const double dt = m.pulse_time - spec.schedule.reference_time;
  const double q = (v.dot(e_k) + v.dot(e_l)) / (c - v.dot(e_l));
  const Vec2 moved = x + dt * v;
  const double shift = dt * v.dot(e_kl) + q * c * (m.time - spec.geometry.origin_delays_rx[m.rx]) +
                       q * moved.dot(e_l);
  return stationary * cis_neg(omega * shift);
}

void DenseOperator::apply(const ComplexVector& x, ComplexVector& y) const {
  if (static_cast<std::size_t>(x.size()) != cols()) throw ContractError("dense apply: length mismatch");
  y = matrix_ * x;
}

void DenseOperator::apply_adjoint(const ComplexVector& y, ComplexVector& x) const {
  if (static_cast<std::size_t>(y.size()) != rows()) throw ContractError("dense adjoint: length mismatch");
  x = matrix_.adjoint() * y;
}

MotionSarOperator::MotionSarOperator(OperatorSpec spec)
    : spec_(std::move(spec)), layout_(measurement_layout(spec_.geometry, spec_.schedule)) {
  spec_.validate();
  const auto& grid = spec_.grid;
  x_coords_.resize(grid.nx);
  y_coords_.resize(grid.ny);
  for (std::size_t ix = 0; ix < grid.nx; ++ix) x_coords_[ix] = grid.x_at(ix);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) y_coords_[iy] = grid.y_at(iy);

  const std::size_t n = spec_.n_hypotheses();
  const std::size_t entries = rows() * n * (grid.nx + grid.ny);
  if (entries <= kTableCacheLimit) {
    x_tables_.resize(rows() * grid.nx * n);
    y_tables_.resize(rows() * grid.ny * n);
    parallel_chunks(rows(), kForwardChunks, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t m = b; m < e; ++m)
        row_tables(m, &x_tables_[m * grid.nx * n], &y_tables_[m * grid.ny * n]);
    });
    cached_ = true;
  }
}

void MotionSarOperator::row_tables(std::size_t m, Complex* x_table, Complex* y_table) const {
  const auto& meas = layout_[m];
  const RowKernel k = row_kernel(spec_, meas);
  const std::size_t n_hyp = spec_.n_hypotheses();
  for (std::size_t n = 0; n < n_hyp; ++n) {
    const auto [g, h] = motion_terms(spec_, meas, k, spec_.velocity_set[n]);
    const double ax = k.omega * k.e_kl.x() + g * k.e_l.x();
    const double ay = k.omega * k.e_kl.y() + g * k.e_l.y();
    for (std::size_t ix = 0; ix < x_coords_.size(); ++ix)
      x_table[ix * n_hyp + n] = cis_neg(ax * x_coords_[ix]);
    for (std::size_t iy = 0; iy < y_coords_.size(); ++iy)
      y_table[iy * n_hyp + n] = cis_neg(ay * y_coords_[iy] + h);
  }
}

const Complex* MotionSarOperator::cached_x(std::size_t m) const {
  return &x_tables_[m * spec_.grid.nx * spec_.n_hypotheses()];
}

const Complex* MotionSarOperator::cached_y(std::size_t m) const {
  return &y_tables_[m * spec_.grid.ny * spec_.n_hypotheses()];
}

namespace {

// a * b without the NaN/inf recovery branch of operator*.
inline void cmul_acc(double ar, double ai, double br, double bi, double& re, double& im) {
  re += ar * br - ai * bi;
  im += ar * bi + ai * br;
}

}  // namespace

void MotionSarOperator::apply(const ComplexVector& coeffs, ComplexVector& out) const {
  if (static_cast<std::size_t>(coeffs.size()) != cols())
    throw ContractError("apply_forward: coefficient length does not match P * N");
  const std::size_t nx = spec_.grid.nx, ny = spec_.grid.ny, n_hyp = spec_.n_hypotheses();
  out.setZero(static_cast<Eigen::Index>(rows()));
  const Complex* s = coeffs.data();

  parallel_chunks(rows(), kForwardChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<Complex> xs, ys;
    if (!cached_) {
      xs.resize(nx * n_hyp);
      ys.resize(ny * n_hyp);
    }
    std::vector<double> part_re(n_hyp), part_im(n_hyp);
    for (std::size_t m = b; m < e; ++m) {
      const Complex* xt;
      const Complex* yt;
      if (cached_) {
        xt = cached_x(m);
        yt = cached_y(m);
      } else {
        row_tables(m, xs.data(), ys.data());
        xt = xs.data();
        yt = ys.data();
      }
      double acc_re = 0.0, acc_im = 0.0;
      for (std::size_t iy = 0; iy < ny; ++iy) {
        std::fill(part_re.begin(), part_re.end(), 0.0);
        std::fill(part_im.begin(), part_im.end(), 0.0);
        for (std::size_t ix = 0; ix < nx; ++ix) {
          const Complex* sp = s + (iy * nx + ix) * n_hyp;
          const Complex* xr = xt + ix * n_hyp;
          for (std::size_t n = 0; n < n_hyp; ++n)
            cmul_acc(xr[n].real(), xr[n].imag(), sp[n].real(), sp[n].imag(), part_re[n], part_im[n]);
        }
        const Complex* yr = yt + iy * n_hyp;
        for (std::size_t n = 0; n < n_hyp; ++n)
          cmul_acc(yr[n].real(), yr[n].imag(), part_re[n], part_im[n], acc_re, acc_im);
      }
      out[static_cast<Eigen::Index>(m)] = Complex(acc_re, acc_im);
    }
  });
}

void MotionSarOperator::apply_adjoint(const ComplexVector& r, ComplexVector& out) const {
  if (static_cast<std::size_t>(r.size()) != rows())
    throw ContractError("apply_adjoint: measurement length does not match M");
  const std::size_t nx = spec_.grid.nx, ny = spec_.grid.ny, n_hyp = spec_.n_hypotheses();
  const std::size_t n_cols = cols();
  const std::size_t n_chunks = std::min(kAdjointChunks, std::max<std::size_t>(rows(), 1));

  // Each chunk of rows sums into its own buffer starting from zero; buffers
  // are then added in chunk order, independent of the worker count.
  auto accumulate = [&](std::size_t b, std::size_t e, Complex* acc) {
    std::vector<Complex> xs, ys;
    if (!cached_) {
      xs.resize(nx * n_hyp);
      ys.resize(ny * n_hyp);
    }
    std::vector<double> w_re(ny * n_hyp), w_im(ny * n_hyp);
    for (std::size_t m = b; m < e; ++m) {
      const Complex* xt;
      const Complex* yt;
      if (cached_) {
        xt = cached_x(m);
        yt = cached_y(m);
      } else {
        row_tables(m, xs.data(), ys.data());
        xt = xs.data();
        yt = ys.data();
      }
      const double rr = r[static_cast<Eigen::Index>(m)].real();
      const double ri = r[static_cast<Eigen::Index>(m)].imag();
      // w = conj(y_table) * r_m
      for (std::size_t i = 0; i < ny * n_hyp; ++i) {
        w_re[i] = yt[i].real() * rr + yt[i].imag() * ri;
        w_im[i] = yt[i].real() * ri - yt[i].imag() * rr;
      }
      for (std::size_t iy = 0; iy < ny; ++iy) {
        const double* wr = &w_re[iy * n_hyp];
        const double* wi = &w_im[iy * n_hyp];
        for (std::size_t ix = 0; ix < nx; ++ix) {
          Complex* op = acc + (iy * nx + ix) * n_hyp;
          const Complex* xr = xt + ix * n_hyp;
          for (std::size_t n = 0; n < n_hyp; ++n) {
            // conj(x_table) * w
            const double a = xr[n].real(), bb = -xr[n].imag();
            op[n] += Complex(a * wr[n] - bb * wi[n], a * wi[n] + bb * wr[n]);
          }
        }
      }
    }
  };

  out.setZero(static_cast<Eigen::Index>(n_cols));
  if (thread_count() <= 1) {
    std::vector<Complex> scratch(n_cols);
    parallel_chunks(rows(), n_chunks, [&](std::size_t, std::size_t b, std::size_t e) {
      std::fill(scratch.begin(), scratch.end(), Complex{});
      accumulate(b, e, scratch.data());
      for (std::size_t i = 0; i < n_cols; ++i) out[static_cast<Eigen::Index>(i)] += scratch[i];
    });
    return;
  }
  std::vector<std::vector<Complex>> partial(n_chunks);
  parallel_chunks(rows(), n_chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    partial[c].assign(n_cols, Complex{});
    accumulate(b, e, partial[c].data());
  });
  for (const auto& buf : partial)
    for (std::size_t i = 0; i < buf.size(); ++i) out[static_cast<Eigen::Index>(i)] += buf[i];
}

PhaseHistory MotionSarOperator::make_history(ComplexVector values) const {
  if (static_cast<std::size_t>(values.size()) != rows())
    throw ContractError("phase history length does not match the measurement layout");
  PhaseHistory h;
  h.values = std::move(values);
  h.n_pulses = spec_.schedule.n_pulses();
  h.n_channels = spec_.geometry.receivers_per_pulse();
  h.n_f = spec_.schedule.samples_per_pulse;
  return h;
}

ComplexVector MotionSarOperator::column(std::size_t pixel, std::size_t hypothesis) const {
  if (pixel >= spec_.grid.size() || hypothesis >= spec_.n_hypotheses())
    throw ContractError("column index out of range");
  const Vec2 x = spec_.grid.center(pixel);
  const Vec2& v = spec_.velocity_set[hypothesis];
  ComplexVector col(static_cast<Eigen::Index>(rows()));
  for (std::size_t m = 0; m < rows(); ++m)
    col[static_cast<Eigen::Index>(m)] = phase_element(spec_, layout_[m], x, v);
  return col;
}

ComplexMatrix MotionSarOperator::dense() const {
  if (rows() * cols() > kDenseEntryCap)
    throw ContractError("dense materialization exceeds the test-only entry cap");
  ComplexMatrix phi(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  const std::size_t n_hyp = spec_.n_hypotheses();
  for (std::size_t p = 0; p < spec_.grid.size(); ++p)
    for (std::size_t n = 0; n < n_hyp; ++n)
      phi.col(static_cast<Eigen::Index>(p * n_hyp + n)) = column(p, n);
  return phi;
}

NoisyHistory add_noise(const PhaseHistory& clean, double snr_db, std::uint64_t seed) {
  NoisyHistory out;
  out.history = clean;
  out.signal_norm = clean.values.norm();
  if (std::isinf(snr_db) && snr_db > 0) return out;
  if (!std::isfinite(snr_db)) throw ContractError("add_noise: SNR must be finite or +inf");
  if (out.signal_norm == 0.0) throw ContractError("add_noise: zero signal with finite SNR");

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ComplexVector noise(clean.values.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    noise[i] = Complex(re, im);
  }
  const double target = out.signal_norm * std::pow(10.0, -snr_db / 20.0);
  noise *= target / noise.norm();
  out.history.values += noise;
  out.noise_norm = noise.norm();
  return out;
}

}  // namespace msar

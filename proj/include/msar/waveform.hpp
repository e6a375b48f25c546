#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msar/types.hpp"

namespace msar {

// Linear-FM pulse exp(j alpha t^2) exp(j omega t) on [-duration/2, duration/2].
// A continuous-wave tone is the alpha = 0 case.
struct Waveform {
  double carrier = 0.0;     // omega_k, rad/s
  double chirp_rate = 0.0;  // alpha_k, rad/s^2
  double duration = 0.0;    // tau_c, s

  double carrier_hz() const { return carrier / (2.0 * kPi); }
  double bandwidth_hz() const { return chirp_rate * duration / kPi; }
  bool is_cw() const { return chirp_rate == 0.0; }
};

enum class FrequencyMode {
  single_tone_common,  // every transmitter at f0, CW
  random_tones,        // CW tones uniform in [f0 - B/2, f0 + B/2]
  chirp,               // common f0 carrier, chirp bandwidth B
};

std::vector<Waveform> assign_frequencies(std::size_t n_tx, double f0_hz, double bandwidth_hz,
                                         FrequencyMode mode, double duration,
                                         std::uint64_t seed);

/// Highest instantaneous frequency (Hz) any of the waveforms reaches.
double max_frequency_hz(const std::vector<Waveform>& waveforms);

enum class RefTimePolicy { start, center, explicit_time };

// TDMA pulse train. Pulse j fires at j * pri from transmitter j mod n_tx, so
// with n_pulses == n_tx transmitter k fires pulse k. Within each pulse the
// receivers sample at the same offsets u relative to the origin-referenced
// echo, spread uniformly over [-duration/2, duration/2].
struct PulseSchedule {
  std::vector<double> pulse_times;       // t_k
  std::vector<std::size_t> pulse_tx;     // transmitter firing each pulse
  double reference_time = 0.0;           // t_ref
  double pri = 0.0;
  std::size_t samples_per_pulse = 1;     // N_f
  double pulse_duration = 0.0;
  std::vector<double> sample_offsets;    // u_s, length N_f

  std::size_t n_pulses() const { return pulse_times.size(); }
  /// Coherent processing interval: (n_pulses - 1) * pri + pulse_duration.
  double cpi_length() const;
};

PulseSchedule build_schedule(std::size_t n_pulses, double pri, std::size_t n_f,
                             RefTimePolicy policy, double pulse_duration,
                             std::size_t n_tx = 0, double explicit_reference = 0.0);

/// Instantaneous angular frequency (rad/s) omega_k - 2 alpha_k u at intra-pulse offset u.
inline double instantaneous_omega(const Waveform& w, double offset) {
  return w.carrier - 2.0 * w.chirp_rate * offset;
}

}  // namespace msar

#include "msar/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "msar/random.hpp"

namespace msar {

std::vector<Waveform> assign_frequencies(std::size_t n_tx, double f0_hz, double bandwidth_hz,
                                         FrequencyMode mode, double duration,
                                         std::uint64_t seed) {
  if (!(bandwidth_hz >= 0.0) || !std::isfinite(bandwidth_hz))
    throw ConfigError("waveform: bandwidth must be finite and nonnegative");
  if (!(f0_hz > 0.0)) throw ConfigError("waveform: carrier frequency must be positive");
  if (!(duration > 0.0)) throw ConfigError("waveform: pulse duration must be positive");
  if (n_tx == 0) throw ConfigError("waveform: at least one transmitter is required");

  std::vector<Waveform> out(n_tx);
  Rng rng(seed);
  std::uniform_real_distribution<double> tone(f0_hz - 0.5 * bandwidth_hz, f0_hz + 0.5 * bandwidth_hz);
  for (auto& w : out) {
    w.duration = duration;
    switch (mode) {
      case FrequencyMode::single_tone_common:
        w.carrier = 2.0 * kPi * f0_hz;
        break;
      case FrequencyMode::random_tones:
        w.carrier = 2.0 * kPi * (bandwidth_hz > 0.0 ? tone(rng) : f0_hz);
        break;
      case FrequencyMode::chirp:
        w.carrier = 2.0 * kPi * f0_hz;
        w.chirp_rate = kPi * bandwidth_hz / duration;
        break;
    }
  }
  return out;
}

double max_frequency_hz(const std::vector<Waveform>& waveforms) {
  double f = 0.0;
  for (const auto& w : waveforms)
    f = std::max(f, (w.carrier + std::abs(w.chirp_rate) * w.duration) / (2.0 * kPi));
  return f;
}

double PulseSchedule::cpi_length() const {
  if (pulse_times.empty()) return 0.0;
  return (pulse_times.back() - pulse_times.front()) + pulse_duration;
}

PulseSchedule build_schedule(std::size_t n_pulses, double pri, std::size_t n_f,
                             RefTimePolicy policy, double pulse_duration, std::size_t n_tx,
                             double explicit_reference) {
  if (n_pulses < 1) throw ConfigError("schedule: at least one pulse is required");
  if (!(pri > 0.0)) throw ConfigError("schedule: PRI must be positive");
  if (n_f < 1) throw ConfigError("schedule: at least one sample per pulse is required");
  if (!(pulse_duration > 0.0)) throw ConfigError("schedule: pulse duration must be positive");
  if (pulse_duration > pri) throw ConfigError("schedule: pulses overlap (duration exceeds PRI)");
  if (n_tx == 0) n_tx = n_pulses;

  PulseSchedule s;
  s.pri = pri;
  s.samples_per_pulse = n_f;
  s.pulse_duration = pulse_duration;
  s.pulse_times.resize(n_pulses);
  s.pulse_tx.resize(n_pulses);
  for (std::size_t j = 0; j < n_pulses; ++j) {
    s.pulse_times[j] = static_cast<double>(j) * pri;
    s.pulse_tx[j] = j % n_tx;
  }
  s.sample_offsets.resize(n_f);
  for (std::size_t i = 0; i < n_f; ++i) {
    s.sample_offsets[i] = n_f == 1 ? 0.0
                                   : pulse_duration * (static_cast<double>(i) / static_cast<double>(n_f - 1) - 0.5);
  }
  switch (policy) {
    case RefTimePolicy::start: s.reference_time = s.pulse_times.front(); break;
    case RefTimePolicy::center:
      s.reference_time = 0.5 * (s.pulse_times.front() + s.pulse_times.back());
      break;
    case RefTimePolicy::explicit_time: s.reference_time = explicit_reference; break;
  }
  return s;
}

}  // namespace msar

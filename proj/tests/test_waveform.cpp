#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "msar/forward_model.hpp"
#include "msar/waveform.hpp"

using namespace msar;

TEST(AssignFrequencies, SingleToneCommon) {
  const auto w = assign_frequencies(10, 1.5e9, 0.0, FrequencyMode::single_tone_common, 1e-5, 1);
  ASSERT_EQ(w.size(), 10u);
  for (const auto& x : w) {
    EXPECT_EQ(x.carrier, 2.0 * kPi * 1.5e9);
    EXPECT_TRUE(x.is_cw());
  }
}

TEST(AssignFrequencies, RandomTonesWithinBand) {
  const auto w = assign_frequencies(10, 1.5e9, 50e6, FrequencyMode::random_tones, 1e-5, 4);
  for (const auto& x : w) {
    EXPECT_GE(x.carrier_hz(), 1.475e9);
    EXPECT_LE(x.carrier_hz(), 1.525e9);
    EXPECT_EQ(x.chirp_rate, 0.0);
  }
  EXPECT_NE(w[0].carrier, w[1].carrier);
  const auto again = assign_frequencies(10, 1.5e9, 50e6, FrequencyMode::random_tones, 1e-5, 4);
  EXPECT_EQ(again[3].carrier, w[3].carrier);
}

TEST(AssignFrequencies, ChirpBandwidth) {
  const auto w = assign_frequencies(1, 1.5e9, 50e6, FrequencyMode::chirp, 1e-5, 0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NEAR(w[0].bandwidth_hz(), 50e6, 1e-6);
  EXPECT_EQ(w[0].carrier_hz(), 1.5e9);
  EXPECT_NEAR(max_frequency_hz(w), 1.525e9, 1e-3);
}

TEST(AssignFrequencies, RejectsNegativeBandwidth) {
  EXPECT_THROW(assign_frequencies(2, 1.5e9, -1.0, FrequencyMode::random_tones, 1e-5, 0), ConfigError);
}

TEST(BuildSchedule, TdmaPulseTrain) {
  const auto s = build_schedule(10, 2e-3, 1, RefTimePolicy::start, 1e-5);
  ASSERT_EQ(s.n_pulses(), 10u);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_DOUBLE_EQ(s.pulse_times[k], 2e-3 * static_cast<double>(k));
    EXPECT_EQ(s.pulse_tx[k], k);
  }
  for (std::size_t k = 1; k < 10; ++k) EXPECT_GE(s.pulse_times[k] - s.pulse_times[k - 1], s.pri * (1 - 1e-12));
  EXPECT_EQ(s.reference_time, 0.0);
  EXPECT_EQ(s.sample_offsets, std::vector<double>{0.0});
  EXPECT_NEAR(s.cpi_length(), 9 * 2e-3 + 1e-5, 1e-15);
}

TEST(BuildSchedule, MeasurementCounts) {
  GeometryOptions g;
  g.n_tx = 10;
  g.n_rx = 40;
  const auto geo = make_sensor_geometry(g);
  EXPECT_EQ(measurement_layout(geo, build_schedule(10, 2e-3, 1, RefTimePolicy::start, 1e-5)).size(), 400u);
  EXPECT_EQ(measurement_layout(geo, build_schedule(10, 2e-3, 30, RefTimePolicy::start, 1e-5)).size(), 12000u);
}

TEST(BuildSchedule, SinglePulseAndPolicies) {
  const auto one = build_schedule(1, 5.0, 1, RefTimePolicy::start, 1e-5);
  EXPECT_EQ(one.pulse_times, std::vector<double>{0.0});
  EXPECT_EQ(one.reference_time, 0.0);
  EXPECT_DOUBLE_EQ(build_schedule(5, 1e-3, 1, RefTimePolicy::center, 1e-5).reference_time, 2e-3);
  EXPECT_EQ(build_schedule(5, 1e-3, 1, RefTimePolicy::explicit_time, 1e-5, 0, 0.7).reference_time, 0.7);
  const auto rr = build_schedule(6, 1e-3, 1, RefTimePolicy::start, 1e-5, 4);
  EXPECT_EQ(rr.pulse_tx, (std::vector<std::size_t>{0, 1, 2, 3, 0, 1}));
  EXPECT_THROW(build_schedule(0, 1e-3, 1, RefTimePolicy::start, 1e-5), ConfigError);
  EXPECT_THROW(build_schedule(2, 1e-6, 1, RefTimePolicy::start, 1e-5), ConfigError);
}

TEST(BuildSchedule, ChirpSweepSpansBandwidth) {
  const double tau = 1e-5;
  const auto w = assign_frequencies(1, 1.5e9, 50e6, FrequencyMode::chirp, tau, 0)[0];
  const auto s = build_schedule(1, 1e-3, 30, RefTimePolicy::start, tau);
  double lo = 1e300, hi = -1e300;
  for (double u : s.sample_offsets) {
    const double f = instantaneous_omega(w, u) / (2 * kPi);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  EXPECT_NEAR((hi - lo) / 50e6, 1.0, 1e-9);
  EXPECT_NEAR(0.5 * (hi + lo), 1.5e9, 1e-3);
}

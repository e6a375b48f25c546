#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "msar/forward_model.hpp"
#include "msar/parallel.hpp"
#include "test_support.hpp"

using namespace msar;
using msar::testing::random_complex;
using msar::testing::random_spec;
using msar::testing::SpecShape;

namespace {

// Written straight from the kernel definition with no shared helpers:
// exp(-j W x.e_kl) exp(-j W (t + t_k - t_ref + eps) v.e_kl).
Complex oracle_kernel(const OperatorSpec& spec, std::size_t pulse, std::size_t rx, double u,
                      const Vec2& x, const Vec2& v) {
  const auto& g = spec.geometry;
  const std::size_t k = spec.schedule.pulse_tx[pulse];
  const double c = g.wave_speed;
  const double ek_x = std::cos(g.tx_angles[k]), ek_y = std::sin(g.tx_angles[k]);
  const double el_x = std::cos(g.rx_angles[rx]), el_y = std::sin(g.rx_angles[rx]);
  const double ekl_x = ek_x + el_x, ekl_y = ek_y + el_y;
  const double tau0 = g.origin_delays_tx[k] + g.origin_delays_rx[rx];
  const double t = tau0 + u;
  const double w = (spec.waveforms[k].carrier - 2.0 * spec.waveforms[k].chirp_rate * u) / c;
  const double dt = spec.schedule.pulse_times[pulse] - spec.schedule.reference_time;
  const double eps = -g.origin_delays_tx[k] + ((x.x() + dt * v.x()) * el_x + (x.y() + dt * v.y()) * el_y) / c;
  const double phase = w * (x.x() * ekl_x + x.y() * ekl_y) +
                       w * (t + dt + eps) * (v.x() * ekl_x + v.y() * ekl_y);
  return std::polar(1.0, -phase);
}

ComplexMatrix oracle_dense(const OperatorSpec& spec) {
  const std::size_t channels = spec.geometry.monostatic ? 1 : spec.geometry.n_rx();
  const std::size_t n_f = spec.schedule.samples_per_pulse;
  const std::size_t M = spec.schedule.n_pulses() * channels * n_f;
  const std::size_t N = spec.velocity_set.size();
  ComplexMatrix phi(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(spec.grid.size() * N));
  std::size_t m = 0;
  for (std::size_t j = 0; j < spec.schedule.n_pulses(); ++j) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const std::size_t l = spec.geometry.monostatic ? spec.schedule.pulse_tx[j] : ch;
      for (std::size_t s = 0; s < n_f; ++s, ++m) {
        for (std::size_t iy = 0; iy < spec.grid.ny; ++iy) {
          for (std::size_t ix = 0; ix < spec.grid.nx; ++ix) {
            const double x = (static_cast<double>(ix) - 0.5 * static_cast<double>(spec.grid.nx - 1)) * spec.grid.dx;
            const double y = (static_cast<double>(iy) - 0.5 * static_cast<double>(spec.grid.ny - 1)) * spec.grid.dy;
            const std::size_t p = iy * spec.grid.nx + ix;
            for (std::size_t n = 0; n < N; ++n)
              phi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p * N + n)) =
                  oracle_kernel(spec, j, l, spec.schedule.sample_offsets[s], Vec2(x, y), spec.velocity_set[n]);
          }
        }
      }
    }
  }
  return phi;
}

// Static image at the k-vectors W(t) e_kl, summed directly.
ComplexVector nudft(const OperatorSpec& spec, const ComplexVector& image) {
  const auto& g = spec.geometry;
  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(spec.n_measurements()));
  Eigen::Index m = 0;
  for (std::size_t j = 0; j < spec.schedule.n_pulses(); ++j) {
    const std::size_t k = spec.schedule.pulse_tx[j];
    for (std::size_t l = 0; l < g.n_rx(); ++l) {
      for (double u : spec.schedule.sample_offsets) {
        const double w = (spec.waveforms[k].carrier - 2.0 * spec.waveforms[k].chirp_rate * u) / g.wave_speed;
        const double kx = w * (std::cos(g.tx_angles[k]) + std::cos(g.rx_angles[l]));
        const double ky = w * (std::sin(g.tx_angles[k]) + std::sin(g.rx_angles[l]));
        Complex acc{};
        for (std::size_t p = 0; p < spec.grid.size(); ++p) {
          const Vec2 x = spec.grid.center(p);
          acc += image[static_cast<Eigen::Index>(p)] * std::polar(1.0, -(kx * x.x() + ky * x.y()));
        }
        out[m++] = acc;
      }
    }
  }
  return out;
}

double rel_inner_gap(const LinearOperator& op, const ComplexVector& s, const ComplexVector& r) {
  const Complex lhs = op.forward(s).dot(r);  // conj(Phi s) . r
  const Complex rhs = s.dot(op.adjoint(r));
  return std::abs(lhs - rhs) / (s.norm() * r.norm());
}

}  // namespace

TEST(StaticDelay, Examples) {
  EXPECT_EQ(static_delay(Vec2::Zero(), Vec2(1.3, 0.2)), 0.0);
  EXPECT_EQ(static_delay(Vec2(0, 5), Vec2(2, 0)), 0.0);
  EXPECT_NEAR(static_delay(Vec2(3, 4), Vec2(2, 0), 3e8), -2e-8, 1e-22);
}

TEST(MotionEpsilon, Examples) {
  GeometryOptions opt;
  opt.cone_width = deg_to_rad(10.0);
  auto g = make_sensor_geometry(opt);
  g.rx_angles = {0.0};
  g.wave_speed = 3e8;
  auto s = build_schedule(2, 2e-3, 1, RefTimePolicy::start, 1e-5, 1);
  EXPECT_EQ(motion_epsilon(Vec2::Zero(), Vec2::Zero(), 0, 0, g, s), 0.0);
  g.origin_delays_tx = {1e-6};
  EXPECT_DOUBLE_EQ(motion_epsilon(Vec2::Zero(), Vec2::Zero(), 0, 0, g, s), -1e-6);
  g.origin_delays_tx = {0.0};
  // pulse 1 sits at t_k - t_ref = 2 ms
  EXPECT_NEAR(motion_epsilon(Vec2(1, 0), Vec2(10, 0), 1, 0, g, s), 1.02 / 3e8, 1e-22);
  EXPECT_NEAR(motion_epsilon(Vec2(1, 0), Vec2(10, 0), 1, 0, g, s), 3.4e-9, 1e-22);
}

TEST(PhaseElement, OriginAndUnitModulus) {
  std::mt19937_64 rng(1);
  SpecShape shape;
  shape.chirp = true;
  shape.n_f = 3;
  shape.origin_delays = true;
  const auto spec = random_spec(rng, shape);
  const auto rows = measurement_layout(spec.geometry, spec.schedule);
  std::uniform_real_distribution<double> pos(-50, 50), vel(-100, 100);
  for (const auto& m : rows) {
    EXPECT_EQ(phase_element(spec, m, Vec2::Zero(), Vec2::Zero()), Complex(1.0, 0.0));
    for (int i = 0; i < 20; ++i) {
      const Vec2 x(pos(rng), pos(rng)), v(vel(rng), vel(rng));
      EXPECT_NEAR(std::abs(phase_element(spec, m, x, v)), 1.0, 1e-12);
      // v = 0 collapses to the stationary kernel exactly
      EXPECT_EQ(phase_element(spec, m, x, Vec2::Zero()), static_phase_element(spec, m, x));
    }
  }
}

TEST(PhaseElement, CwStaticIsFourierKernel) {
  std::mt19937_64 rng(2);
  const auto spec = random_spec(rng, SpecShape{});
  const auto rows = measurement_layout(spec.geometry, spec.schedule);
  const Vec2 x(3.0, -7.5);
  for (const auto& m : rows) {
    const double w = spec.waveforms[m.tx].carrier / kSpeedOfLight;
    const Vec2 e = spec.geometry.bistatic(m.tx, m.rx);
    const Complex expect = std::polar(1.0, -w * x.dot(e));
    EXPECT_LT(std::abs(phase_element(spec, m, x, Vec2::Zero()) - expect), 1e-12);
  }
}

TEST(PhaseElement, MatchesIndependentKernel) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    SpecShape shape;
    shape.chirp = trial % 2 == 0;
    shape.n_f = 2;
    shape.origin_delays = true;
    const auto spec = random_spec(rng, shape);
    const auto rows = measurement_layout(spec.geometry, spec.schedule);
    for (const auto& m : rows) {
      const Vec2 x(10.0, -4.0), v(25.0, 13.0);
      EXPECT_LT(std::abs(phase_element(spec, m, x, v) - oracle_kernel(spec, m.pulse, m.rx, m.offset, x, v)), 1e-9);
    }
  }
}

TEST(Operator, StaticCwMatchesNudft) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    SpecShape shape;
    shape.n_tx = 4;
    shape.n_rx = 5;
    shape.nx = 6;
    shape.ny = 5;
    shape.n_vel = 1;
    const auto spec = random_spec(rng, shape);
    const MotionSarOperator op(spec);
    const auto image = random_complex(rng, spec.grid.size());
    const auto a = op.forward(image);
    const auto b = nudft(spec, image);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Operator, StaticChirpMatchesNudft) {
  std::mt19937_64 rng(5);
  SpecShape shape;
  shape.n_tx = 3;
  shape.n_rx = 4;
  shape.n_f = 7;
  shape.nx = 5;
  shape.ny = 4;
  shape.n_vel = 1;
  shape.chirp = true;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  const auto image = random_complex(rng, spec.grid.size());
  EXPECT_LT((op.forward(image) - nudft(spec, image)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Operator, DenseMatchesIndependentOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 12; ++trial) {
    SpecShape shape;
    shape.n_tx = 2 + trial % 3;
    shape.n_rx = 3;
    shape.n_f = 1 + trial % 4;
    shape.nx = 3;
    shape.ny = 4;
    shape.n_vel = 3;
    shape.chirp = trial % 2 == 1;
    shape.monostatic = trial % 4 == 3;
    shape.origin_delays = trial % 3 == 0;
    const auto spec = random_spec(rng, shape);
    const MotionSarOperator op(spec);
    const ComplexMatrix oracle = oracle_dense(spec);
    const ComplexMatrix phi = op.dense();
    ASSERT_EQ(phi.rows(), oracle.rows());
    EXPECT_LT((phi - oracle).cwiseAbs().maxCoeff(), 1e-9);
    const auto s = random_complex(rng, op.cols());
    const ComplexVector ref = oracle * s;
    EXPECT_LT((op.forward(s) - ref).norm(), 1e-9 * ref.norm());
    const auto r = random_complex(rng, op.rows());
    const ComplexVector ref_adj = oracle.adjoint() * r;
    EXPECT_LT((op.adjoint(r) - ref_adj).norm(), 1e-9 * ref_adj.norm());
  }
}

TEST(Operator, AdjointSpecExample) {
  // 4 pixels, 2 velocities, 6 measurements
  std::mt19937_64 rng(7);
  SpecShape shape;
  shape.n_tx = 2;
  shape.n_rx = 3;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  ASSERT_EQ(op.rows(), 6u);
  ASSERT_EQ(op.cols(), 8u);
  const DenseOperator dense(op.dense());
  const auto s = random_complex(rng, 8);
  const auto r = random_complex(rng, 6);
  EXPECT_LE(rel_inner_gap(op, s, r), 1e-10);
  EXPECT_LE(rel_inner_gap(dense, s, r), 1e-10);
}

TEST(Operator, AdjointIdentityRandomized) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> small(1, 5);
  for (int trial = 0; trial < 120; ++trial) {
    SpecShape shape;
    shape.n_tx = small(rng);
    shape.n_rx = small(rng);
    shape.n_f = small(rng);
    shape.nx = small(rng);
    shape.ny = small(rng);
    shape.n_vel = small(rng);
    shape.chirp = trial % 2 == 0;
    shape.monostatic = trial % 5 == 0;
    shape.origin_delays = trial % 3 == 0;
    shape.doppler = trial % 7 == 0 ? DopplerModel::exact : DopplerModel::first_order;
    const auto spec = random_spec(rng, shape);
    const MotionSarOperator op(spec);
    const auto s = random_complex(rng, op.cols());
    const auto r = random_complex(rng, op.rows());
    EXPECT_LE(rel_inner_gap(op, s, r), 1e-10) << "trial " << trial;
  }
}

TEST(Operator, CanonicalBasisAndLinearity) {
  std::mt19937_64 rng(9);
  SpecShape shape;
  shape.n_f = 3;
  shape.chirp = true;
  shape.nx = 3;
  shape.ny = 2;
  shape.n_vel = 3;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  EXPECT_EQ(op.forward(ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()))).norm(), 0.0);
  EXPECT_EQ(op.adjoint(ComplexVector::Zero(static_cast<Eigen::Index>(op.rows()))).norm(), 0.0);
  for (std::size_t p = 0; p < spec.grid.size(); ++p) {
    for (std::size_t n = 0; n < spec.n_hypotheses(); ++n) {
      ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()));
      e[static_cast<Eigen::Index>(p * spec.n_hypotheses() + n)] = 1.0;
      EXPECT_LT((op.forward(e) - op.column(p, n)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  const ComplexMatrix phi = op.dense();
  for (std::size_t m = 0; m < op.rows(); ++m) {
    ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(op.rows()));
    e[static_cast<Eigen::Index>(m)] = 1.0;
    const ComplexVector row = phi.row(static_cast<Eigen::Index>(m)).adjoint();
    EXPECT_LT((op.adjoint(e) - row).cwiseAbs().maxCoeff(), 1e-12);
  }
  const auto s1 = random_complex(rng, op.cols());
  const auto s2 = random_complex(rng, op.cols());
  const Complex a(0.3, -1.2), b(2.0, 0.5);
  const ComplexVector lhs = op.forward(a * s1 + b * s2);
  const ComplexVector rhs = a * op.forward(s1) + b * op.forward(s2);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(Operator, UnitModulusEntries) {
  std::mt19937_64 rng(10);
  SpecShape shape;
  shape.n_vel = 4;
  shape.n_f = 2;
  const MotionSarOperator op(random_spec(rng, shape));
  EXPECT_LT((op.dense().cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Operator, OneHotHypothesisEqualsSingleVelocityOperator) {
  std::mt19937_64 rng(11);
  SpecShape shape;
  shape.n_vel = 4;
  shape.nx = 3;
  shape.ny = 3;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  const auto image = random_complex(rng, spec.grid.size());
  for (std::size_t n = 0; n < spec.n_hypotheses(); ++n) {
    OperatorSpec single = spec;
    single.velocity_set = {spec.velocity_set[n]};
    const MotionSarOperator one(single);
    ComplexVector ext = ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()));
    for (std::size_t p = 0; p < spec.grid.size(); ++p)
      ext[static_cast<Eigen::Index>(p * spec.n_hypotheses() + n)] = image[static_cast<Eigen::Index>(p)];
    const ComplexVector a = op.forward(ext), b = one.forward(image);
    EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
  }
}

TEST(Operator, UncachedPathMatchesColumns) {
  // Large enough to exceed the phasor table cache.
  std::mt19937_64 rng(12);
  SpecShape shape;
  shape.n_tx = 10;
  shape.n_rx = 40;
  shape.n_f = 30;
  shape.nx = 32;
  shape.ny = 128;
  shape.n_vel = 2;
  shape.chirp = true;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(op.cols()));
  const std::size_t p = spec.grid.index_of(7, 90);
  e[static_cast<Eigen::Index>(p * 2 + 1)] = 1.0;
  EXPECT_LT((op.forward(e) - op.column(p, 1)).cwiseAbs().maxCoeff(), 1e-9);
  const auto r = random_complex(rng, op.rows());
  const Complex expect = op.column(p, 1).dot(r);
  EXPECT_LT(std::abs(op.adjoint(r)[static_cast<Eigen::Index>(p * 2 + 1)] - expect), 1e-9 * std::abs(expect) + 1e-9);
  EXPECT_THROW(op.dense(), ContractError);
}

TEST(Operator, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 rng(13);
  SpecShape shape;
  shape.n_tx = 4;
  shape.n_rx = 6;
  shape.nx = 8;
  shape.ny = 8;
  shape.n_vel = 3;
  const MotionSarOperator op(random_spec(rng, shape));
  const auto s = random_complex(rng, op.cols());
  const auto r = random_complex(rng, op.rows());
  set_thread_count(1);
  const ComplexVector f1 = op.forward(s), a1 = op.adjoint(r);
  set_thread_count(4);
  const ComplexVector f4 = op.forward(s), a4 = op.adjoint(r);
  set_thread_count(1);
  EXPECT_EQ(f1, f4);
  EXPECT_EQ(a1, a4);
}

TEST(Operator, ContractErrors) {
  std::mt19937_64 rng(14);
  const MotionSarOperator op(random_spec(rng, SpecShape{}));
  EXPECT_THROW(op.forward(ComplexVector::Zero(3)), ContractError);
  EXPECT_THROW(op.adjoint(ComplexVector::Zero(2)), ContractError);
  EXPECT_THROW(op.column(op.cols(), 0), ContractError);
}

TEST(OperatorSpec, VelocityBound) {
  std::mt19937_64 rng(15);
  auto spec = random_spec(rng, SpecShape{});
  spec.velocity_set.push_back(Vec2(3e5, 0.0));
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.velocity_set.back() = Vec2(2.99e5, 0.0);
  EXPECT_NO_THROW(spec.validate());
  spec.velocity_set.clear();
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Doppler, ExactAgreesWithFirstOrderToSecondOrder) {
  std::mt19937_64 rng(16);
  SpecShape shape;
  shape.n_vel = 1;
  auto spec = random_spec(rng, shape);
  spec.velocity_set = {Vec2(30.0, 10.0)};
  auto exact = spec;
  exact.doppler = DopplerModel::exact;
  const auto rows = measurement_layout(spec.geometry, spec.schedule);
  const Vec2 x(5.0, -3.0);
  for (const auto& m : rows) {
    const Complex a = phase_element(spec, m, x, spec.velocity_set[0]);
    const Complex b = phase_element(exact, m, x, spec.velocity_set[0]);
    // both share every term linear in v/c; what is left is tiny
    EXPECT_LT(std::abs(std::arg(a * std::conj(b))), 1e-3);
  }
  const MotionSarOperator op(exact);
  const auto s = random_complex(rng, op.cols());
  const ComplexVector ref = op.dense() * s;
  EXPECT_LT((op.forward(s) - ref).norm(), 1e-10 * ref.norm());
}

TEST(Measurements, LayoutOrder) {
  std::mt19937_64 rng(17);
  SpecShape shape;
  shape.n_tx = 3;
  shape.n_rx = 2;
  shape.n_f = 4;
  const auto spec = random_spec(rng, shape);
  const MotionSarOperator op(spec);
  const auto h = op.make_history(ComplexVector::Zero(24));
  for (std::size_t m = 0; m < op.rows(); ++m) {
    const auto& row = op.layout()[m];
    EXPECT_EQ(h.index(row.pulse, row.rx, row.sample), m);
    EXPECT_EQ(row.tx, row.pulse);
  }
  shape.monostatic = true;
  const MotionSarOperator mono(random_spec(rng, shape));
  ASSERT_EQ(mono.rows(), 12u);
  for (const auto& row : mono.layout()) EXPECT_EQ(row.rx, row.tx);
}

TEST(Noise, SnrAndDeterminism) {
  std::mt19937_64 rng(18);
  PhaseHistory clean;
  clean.values = random_complex(rng, 400);
  clean.n_pulses = 10;
  clean.n_channels = 40;
  clean.n_f = 1;
  const auto same = add_noise(clean, std::numeric_limits<double>::infinity(), 1);
  EXPECT_EQ(same.history.values, clean.values);
  const auto a = add_noise(clean, 20.0, 42);
  const auto b = add_noise(clean, 20.0, 42);
  EXPECT_EQ(a.history.values, b.history.values);
  const ComplexVector noise = a.history.values - clean.values;
  EXPECT_NEAR(noise.norm() / clean.values.norm(), 0.1, 1e-12);
  EXPECT_NEAR(20.0 * std::log10(clean.values.norm() / noise.norm()), 20.0, 0.1);
  EXPECT_NE(add_noise(clean, 20.0, 43).history.values, a.history.values);
  // roughly circular: real and imaginary energy split evenly
  EXPECT_NEAR(noise.real().squaredNorm() / noise.squaredNorm(), 0.5, 0.1);

  PhaseHistory zero = clean;
  zero.values.setZero();
  EXPECT_THROW(add_noise(zero, 20.0, 1), ContractError);
  EXPECT_NO_THROW(add_noise(zero, std::numeric_limits<double>::infinity(), 1));
}

TEST(PhaseHistoryIo, BinaryRoundTripAndHeader) {
  std::mt19937_64 rng(19);
  PhaseHistory h;
  h.values = random_complex(rng, 24);
  h.n_pulses = 2;
  h.n_channels = 3;
  h.n_f = 4;
  const auto dir = std::filesystem::temp_directory_path() / "msar_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "r.bin";
  write_phase_history(path, h);
  EXPECT_EQ(std::filesystem::file_size(path), 32u + 24u * 16u);
  std::ifstream in(path, std::ios::binary);
  unsigned char head[8];
  in.read(reinterpret_cast<char*>(head), 8);
  EXPECT_EQ(head[0], 24);
  for (int i = 1; i < 8; ++i) EXPECT_EQ(head[i], 0);
  const auto back = read_phase_history(path);
  EXPECT_EQ(back.values, h.values);
  EXPECT_EQ(back.n_pulses, 2u);
  EXPECT_EQ(back.n_channels, 3u);
  EXPECT_EQ(back.n_f, 4u);

  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(read_phase_history(path), IoError);
  EXPECT_THROW(read_phase_history(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(PhaseHistoryIo, CsvExport) {
  std::mt19937_64 rng(20);
  SpecShape shape;
  shape.n_f = 2;
  const MotionSarOperator op(random_spec(rng, shape));
  const auto h = op.make_history(random_complex(rng, op.rows()));
  const auto dir = std::filesystem::temp_directory_path() / "msar_csv_test";
  std::filesystem::create_directories(dir);
  write_phase_history_csv(dir / "r.csv", h, op.layout());
  std::ifstream in(dir / "r.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "m,k,l,t,re,im");
  std::size_t count = 0;
  while (std::getline(in, line)) ++count;
  EXPECT_EQ(count, op.rows());
  std::filesystem::remove_all(dir);
}

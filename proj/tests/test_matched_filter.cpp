#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "msar/matched_filter.hpp"
#include "test_support.hpp"

using namespace msar;
using msar::testing::random_complex;
using msar::testing::random_spec;
using msar::testing::SpecShape;

namespace {

SpecShape mf_shape() {
  SpecShape shape;
  shape.n_tx = 4;
  shape.n_rx = 8;
  shape.n_f = 4;
  shape.chirp = true;
  shape.nx = 5;
  shape.ny = 4;
  shape.n_vel = 4;
  return shape;
}

}  // namespace

TEST(MfCube, ZeroMeasurement) {
  std::mt19937_64 rng(1);
  const MotionSarOperator op(random_spec(rng, mf_shape()));
  const auto cube = mf_cube(op, ComplexVector::Zero(static_cast<Eigen::Index>(op.rows())));
  for (std::size_t n = 0; n < cube.n_hyp(); ++n)
    for (const auto& v : cube.slice(n)) EXPECT_EQ(v, Complex(0, 0));
}

TEST(MfCube, PerfectFocusOnGrid) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = random_spec(rng, mf_shape());
    const MotionSarOperator op(spec);
    const std::size_t p = rng() % spec.grid.size(), n = rng() % spec.n_hypotheses();
    const Complex amp = std::polar(1.3, 0.7 * trial);
    const ComplexVector r = amp * op.column(p, n);
    const auto cube = mf_cube(op, r);
    EXPECT_LT(std::abs(cube.at(p, n) - amp), 1e-12);
    // the focus is the global argmax of the cube
    for (std::size_t q = 0; q < spec.grid.size(); ++q)
      for (std::size_t m = 0; m < spec.n_hypotheses(); ++m)
        EXPECT_LE(std::abs(cube.at(q, m)), std::abs(amp) + 1e-12);
    EXPECT_NEAR(cube.column_scale(p, n), 1.0 / static_cast<double>(op.rows()), 1e-18);
  }
}

TEST(MfCube, SharedPathWithAdjoint) {
  std::mt19937_64 rng(3);
  const auto spec = random_spec(rng, mf_shape());
  const MotionSarOperator op(spec);
  const auto r = random_complex(rng, op.rows());
  const auto cube = mf_cube(op, r);
  const ComplexVector back = op.adjoint(r);
  for (std::size_t p = 0; p < spec.grid.size(); ++p) {
    for (std::size_t n = 0; n < spec.n_hypotheses(); ++n) {
      const Complex expect = back[static_cast<Eigen::Index>(p * spec.n_hypotheses() + n)] /
                             op.column(p, n).squaredNorm();
      EXPECT_LT(std::abs(cube.at(p, n) - expect), 1e-12 * std::abs(expect) + 1e-15);
    }
  }
}

TEST(MfCube, ZeroSliceIsStaticBackprojection) {
  std::mt19937_64 rng(4);
  const auto spec = random_spec(rng, mf_shape());
  const MotionSarOperator op(spec);
  OperatorSpec stat = spec;
  stat.velocity_set = {Vec2::Zero()};
  const MotionSarOperator static_op(stat);
  const auto image = random_complex(rng, spec.grid.size());
  const ComplexVector r = static_op.forward(image);
  const auto cube = mf_cube(op, r);
  const auto static_cube = mf_cube(static_op, r);
  const auto slice = cube.slice(0);
  for (std::size_t p = 0; p < spec.grid.size(); ++p) EXPECT_EQ(slice[p], static_cube.at(p, 0));
}

TEST(MaxProject, ZeroOneHotExhaustive) {
  const VelocityGrid grid(std::vector<Vec2>{Vec2::Zero(), Vec2(1, 0), Vec2(0, 1), Vec2(2, 2)});
  SpaceVelocityCube cube(3, 4);
  auto mp = mf_max_project(cube, grid);
  for (std::size_t p = 0; p < 3; ++p) {
    EXPECT_EQ(mp.hypothesis[p], 0u);
    EXPECT_EQ(mp.velocity_map[p], Vec2::Zero());
    EXPECT_EQ(mp.magnitudes()[p], 0.0);
  }
  cube.at(2, 3) = Complex(0.5, 0);
  mp = mf_max_project(cube, grid);
  EXPECT_EQ(mp.hypothesis[2], 3u);
  EXPECT_EQ(mp.velocity_map[2], Vec2(2, 2));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    SpaceVelocityCube c(3, 4);
    const auto vals = random_complex(rng, 12);
    for (std::size_t i = 0; i < 12; ++i) c.at(i / 4, i % 4) = vals[static_cast<Eigen::Index>(i)];
    const auto out = mf_max_project(c, grid);
    for (std::size_t p = 0; p < 3; ++p) {
      std::size_t best = 0;
      for (std::size_t n = 1; n < 4; ++n)
        if (std::abs(c.at(p, n)) > std::abs(c.at(p, best))) best = n;
      EXPECT_EQ(out.hypothesis[p], best);
    }
  }
  EXPECT_THROW(mf_max_project(SpaceVelocityCube(3, 2), grid), ContractError);
}

TEST(ThresholdDetect, Rules) {
  ComplexVector img(4);
  img << Complex(0.1, 0), Complex(0, 0.5), Complex(0.2, 0), Complex(0.9, 0);
  const std::vector<Vec2> vel(4, Vec2::Zero());
  const std::vector<std::size_t> hyp(4, 0);
  const auto det = threshold_detect(img, vel, hyp, 0.2);
  ASSERT_EQ(det.size(), 2u);  // 0.2 itself is not above the threshold
  EXPECT_EQ(det[0].pixel, 3u);
  EXPECT_EQ(det[1].pixel, 1u);
  EXPECT_TRUE(threshold_detect(img, vel, hyp, std::numeric_limits<double>::infinity()).empty());
  EXPECT_TRUE(threshold_detect(ComplexVector::Zero(4), vel, hyp, 0.0).empty());
  EXPECT_THROW(threshold_detect(img, std::vector<Vec2>(3), hyp, 0.2), ContractError);
}

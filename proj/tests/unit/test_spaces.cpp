#include <gtest/gtest.h>

#include <algorithm>

#include "bolt/error.hpp"
#include "bolt/spaces.hpp"
#include "oracles.hpp"

using bolt::BoxSpace;
using bolt::Matrix;
using bolt::RngSeed;
using bolt::SampleMode;
using bolt::Vector;

namespace {

BoxSpace unit_square() { return BoxSpace(Vector::Zero(2), Vector::Ones(2)); }

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST(BoxSpace, ContainsIsClosed) {
  const auto s = unit_square();
  EXPECT_TRUE(s.contains(v2(0, 1)));
  EXPECT_FALSE(s.contains(v2(0.5, 1.0001)));
  const BoxSpace line(Vector::Constant(1, -2.0), Vector::Constant(1, 3.0));
  EXPECT_TRUE(line.contains(Vector::Constant(1, -2.0)));
}

TEST(BoxSpace, ContainsRejectsWrongDimension) {
  try {
    unit_square().contains(Vector::Zero(3));
    FAIL() << "expected a dimension error";
  } catch (const bolt::DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(BoxSpace, ConstructionValidatesBounds) {
  EXPECT_THROW(BoxSpace(Vector::Zero(0), Vector::Zero(0)), bolt::ValidationError);
  EXPECT_THROW(BoxSpace(Vector::Zero(2), Vector::Ones(3)), bolt::DimensionError);
  try {
    BoxSpace(v2(0, 1), v2(1, 1));
    FAIL();
  } catch (const bolt::ValidationError& e) {
    ASSERT_TRUE(e.field().has_value());
    EXPECT_EQ(*e.field(), "lower[1]");
  }
}

TEST(BoxSpace, SampleEmpty) {
  const Matrix m = unit_square().sample(0, SampleMode::uniform, RngSeed{1});
  EXPECT_EQ(m.rows(), 0);
  EXPECT_EQ(m.cols(), 2);
}

TEST(BoxSpace, UniformMeanNearCentre) {
  const Matrix m = unit_square().sample(1000, SampleMode::uniform, RngSeed{42});
  for (int d = 0; d < 2; ++d) {
    const double mean = m.col(d).mean();
    EXPECT_GE(mean, 0.45);
    EXPECT_LE(mean, 0.55);
  }
}

TEST(BoxSpace, SamplesStayInsideAndAreDeterministic) {
  const BoxSpace s(Eigen::Vector3d(-5, 0, 2), Eigen::Vector3d(10, 15, 2.5));
  for (auto mode : {SampleMode::uniform, SampleMode::quasirandom}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Matrix a = s.sample(257, mode, RngSeed{seed});
      const Matrix b = s.sample(257, mode, RngSeed{seed});
      EXPECT_EQ(a, b);
      for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_TRUE(s.contains(a.row(i).transpose()));
    }
  }
}

TEST(BoxSpace, QuasirandomBeatsMedianUniformDiscrepancy) {
  const auto s = unit_square();
  std::vector<double> uniform;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    uniform.push_back(oracle::star_discrepancy_2d(s.sample(64, SampleMode::uniform, RngSeed{1000 + seed}), 8));
  std::nth_element(uniform.begin(), uniform.begin() + 50, uniform.end());
  const double median = uniform[50];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LT(oracle::star_discrepancy_2d(s.sample(64, SampleMode::quasirandom, RngSeed{seed}), 8), median);
  }
}

TEST(Sobol, MatchesReferencePointsWithoutShift) {
  // scipy.stats.qmc.Sobol(d=6, scramble=False), points 1..8
  const double ref[8][6] = {{0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
                            {0.75, 0.25, 0.25, 0.25, 0.75, 0.75},
                            {0.25, 0.75, 0.75, 0.75, 0.25, 0.25},
                            {0.375, 0.375, 0.625, 0.875, 0.375, 0.125},
                            {0.875, 0.875, 0.125, 0.375, 0.875, 0.625},
                            {0.625, 0.125, 0.875, 0.625, 0.625, 0.875},
                            {0.125, 0.625, 0.375, 0.125, 0.125, 0.375},
                            {0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125}};
  bolt::SobolEngine engine(6);
  const Matrix m = engine.draw(8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(m(i, j), ref[i][j]) << i << "," << j;
}

TEST(Sobol, FirstPointIsNotTheOrigin) {
  bolt::SobolEngine engine(3, 7, true);
  EXPECT_GT(engine.next().norm(), 0.0);
  EXPECT_THROW(bolt::SobolEngine(65), bolt::DimensionError);
}

TEST(Sobol, ShiftedPointsStayInUnitCube) {
  bolt::SobolEngine engine(64, 99, true);
  const Matrix m = engine.draw(512);
  EXPECT_GE(m.minCoeff(), 0.0);
  EXPECT_LT(m.maxCoeff(), 1.0);
}

TEST(ShrinkToRegion, Examples) {
  const auto s = unit_square();
  const auto a = s.shrink_to_region(v2(0.5, 0.5), v2(0.1, 0.1));
  EXPECT_NEAR(a.lower()[0], 0.4, 1e-15);
  EXPECT_NEAR(a.upper()[1], 0.6, 1e-15);
  const auto b = s.shrink_to_region(v2(0.05, 0.5), v2(0.1, 0.1));
  EXPECT_EQ(b.lower()[0], 0.0);
  EXPECT_NEAR(b.upper()[0], 0.15, 1e-15);
  EXPECT_NEAR(b.lower()[1], 0.4, 1e-15);
  EXPECT_EQ(s.shrink_to_region(v2(0.5, 0.5), v2(10, 10)), s);
}

TEST(ShrinkToRegion, RejectsBadInput) {
  const auto s = unit_square();
  EXPECT_THROW(s.shrink_to_region(v2(1.5, 0.5), v2(0.1, 0.1)), bolt::ValidationError);
  EXPECT_THROW(s.shrink_to_region(v2(0.5, 0.5), v2(0.0, 0.1)), bolt::ValidationError);
}

TEST(ShrinkToRegion, ResultIsSubsetOnRandomInputs) {
  const auto s = BoxSpace(v2(-5, 0), v2(10, 15));
  bolt::Rng rng(RngSeed{3});
  for (int k = 0; k < 200; ++k) {
    const Vector c = s.sample(1, SampleMode::uniform, RngSeed{static_cast<std::uint64_t>(k)}).row(0).transpose();
    const Vector h = v2(0.01 + 10 * rng.uniform(), 0.01 + 10 * rng.uniform());
    const auto r = s.shrink_to_region(c, h);
    EXPECT_TRUE((r.lower().array() >= s.lower().array()).all());
    EXPECT_TRUE((r.upper().array() <= s.upper().array()).all());
    EXPECT_TRUE((r.lower().array() < r.upper().array()).all());
  }
}

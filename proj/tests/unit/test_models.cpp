#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bolt/error.hpp"
#include "bolt/models.hpp"
#include "oracles.hpp"

using bolt::Dataset;
using bolt::GPHyperparameters;
using bolt::GPModel;
using bolt::KernelFamily;
using bolt::Matrix;
using bolt::RngSeed;
using bolt::Vector;

namespace {

GPHyperparameters hyper(KernelFamily family, double v, Vector l, double mean, double noise) {
  GPHyperparameters hp;
  hp.kernel.family = family;
  hp.kernel.variance = v;
  hp.kernel.lengthscales = std::move(l);
  hp.mean = mean;
  hp.noise_variance = noise;
  return hp;
}

oracle::KernelFn kernel_oracle(const GPHyperparameters& hp) {
  const double v = hp.kernel.variance;
  const Vector l = hp.kernel.lengthscales;
  if (hp.kernel.family == KernelFamily::squared_exponential)
    return [v, l](const Vector& a, const Vector& b) { return oracle::se_kernel(a, b, v, l); };
  return [v, l](const Vector& a, const Vector& b) { return oracle::matern52_kernel(a, b, v, l); };
}

struct Instance {
  GPHyperparameters hp;
  Dataset data;
};

Instance random_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  bolt::Rng rng(RngSeed{seed});
  Matrix x(n, d);
  Matrix y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform();
    y(i, 0) = std::sin(3.0 * x.row(i).sum()) + 0.3 * rng.normal();
  }
  Vector l(d);
  for (Eigen::Index j = 0; j < d; ++j) l[j] = 0.2 + rng.uniform();
  const auto family = seed % 2 ? KernelFamily::squared_exponential : KernelFamily::matern52;
  return {hyper(family, 0.5 + 2.0 * rng.uniform(), l, rng.normal() * 0.5, 0.01 + 0.2 * rng.uniform()), Dataset(x, y)};
}

}  // namespace

TEST(Kernel, ScalarValues) {
  const Vector a = Vector::Zero(1);
  const Vector b = Vector::Ones(1);
  auto se = hyper(KernelFamily::squared_exponential, 1, Vector::Ones(1), 0, 0).kernel;
  auto m52 = hyper(KernelFamily::matern52, 1, Vector::Ones(1), 0, 0).kernel;
  EXPECT_NEAR(se(a, b), 0.60653066, 1e-8);
  EXPECT_NEAR(m52(a, b), 0.52399411, 1e-8);
  EXPECT_NEAR(se(a, b), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(m52(a, b), (1 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0)), 1e-15);
  se.variance = 2.5;
  EXPECT_EQ(se(a, a), 2.5);
}

TEST(Kernel, MatrixMatchesPointwiseOracle) {
  auto inst = random_instance(4, 6, 3);
  const Matrix k = bolt::kernel_matrix(inst.hp.kernel, inst.data.query_points(), inst.data.query_points().topRows(4));
  const Matrix want = oracle::gram(kernel_oracle(inst.hp), inst.data.query_points(), inst.data.query_points().topRows(4));
  EXPECT_LT((k - want).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(bolt::kernel_matrix(inst.hp.kernel, Matrix::Zero(2, 2), Matrix::Zero(2, 3)), bolt::DimensionError);
}

TEST(Kernel, RejectsInvalidParameters) {
  EXPECT_THROW(hyper(KernelFamily::matern52, 0.0, Vector::Ones(1), 0, 0).validate(), bolt::ValidationError);
  EXPECT_THROW(hyper(KernelFamily::matern52, 1.0, Vector::Zero(1), 0, 0).validate(), bolt::ValidationError);
  EXPECT_THROW(hyper(KernelFamily::matern52, 1.0, Vector::Ones(1), 0, -1).validate(), bolt::ValidationError);
}

TEST(LogMarginalLikelihood, SinglePoint) {
  const Dataset d(Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  const auto r = bolt::log_marginal_likelihood(hyper(KernelFamily::matern52, 1, Vector::Ones(1), 0, 0), d);
  EXPECT_NEAR(r.value, -0.91893853, 1e-7);
  EXPECT_NEAR(r.value, -0.5 * std::log(2 * std::numbers::pi), 1e-7);
}

TEST(LogMarginalLikelihood, ZeroResidual) {
  const Dataset d(Matrix::Zero(1, 1), Matrix::Constant(1, 1, 3.0));
  const auto r = bolt::log_marginal_likelihood(hyper(KernelFamily::matern52, 2.0, Vector::Ones(1), 3.0, 0.5), d);
  EXPECT_NEAR(r.value, -0.5 * std::log(2.5 + r.jitter) - 0.5 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(LogMarginalLikelihood, MatchesDenseRecomputation) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto n = static_cast<Eigen::Index>(1 + (s * 7) % 50);
    auto inst = random_instance(s, n, 1 + static_cast<Eigen::Index>(s % 3));
    const auto r = bolt::log_marginal_likelihood(inst.hp, inst.data);
    const double want = oracle::dense_lml(kernel_oracle(inst.hp), inst.data.query_points(),
                                          inst.data.observations().col(0), inst.hp.mean, inst.hp.noise_variance + r.jitter);
    EXPECT_NEAR(r.value, want, 1e-8 * std::max(1.0, std::abs(want))) << "seed " << s;
  }
}

TEST(LogMarginalLikelihood, GradientMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = random_instance(100 + s, 5, 1 + static_cast<Eigen::Index>(s % 3));
    const Vector theta = bolt::pack_hyperparameters(inst.hp);
    const auto family = inst.hp.kernel.family;
    const auto r = bolt::log_marginal_likelihood(inst.hp, inst.data);
    const Vector fd = oracle::central_difference(
        [&](const Vector& t) { return bolt::log_marginal_likelihood(bolt::unpack_hyperparameters(t, family), inst.data).value; },
        theta);
    EXPECT_LT(oracle::relative_error(r.gradient, fd), 1e-5) << "seed " << s;
  }
}

TEST(LogMarginalLikelihood, PackRoundTrip) {
  auto inst = random_instance(1, 3, 2);
  const auto back = bolt::unpack_hyperparameters(bolt::pack_hyperparameters(inst.hp), inst.hp.kernel.family);
  EXPECT_NEAR(back.kernel.variance, inst.hp.kernel.variance, 1e-14);
  EXPECT_NEAR(back.noise_variance, inst.hp.noise_variance, 1e-14);
  EXPECT_EQ(back.mean, inst.hp.mean);
}

TEST(Predict, PriorWithoutData) {
  const GPModel m(hyper(KernelFamily::matern52, 1.7, Vector::Ones(2), 0.3, 0.1), Dataset(2, 1));
  const auto p = m.predict(Matrix::Random(4, 2));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(p.mean[i], 0.3);
    EXPECT_EQ(p.variance[i], 1.7);
  }
  const auto [dm, dv] = m.predict_gradient(Vector::Zero(2));
  EXPECT_EQ(dm.norm(), 0.0);
  EXPECT_EQ(dv.norm(), 0.0);
}

TEST(Predict, NoiseFreeInterpolation) {
  auto inst = random_instance(3, 6, 2);
  inst.hp.noise_variance = 0.0;
  inst.hp.kernel.lengthscales = Vector::Constant(2, 0.1);
  const GPModel m(inst.hp, inst.data);
  const auto p = m.predict(inst.data.query_points());
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(p.mean[i], inst.data.observations()(i, 0), 1e-6);
    EXPECT_LE(p.variance[i], 1e-8);
  }
}

TEST(Predict, TwoPointDenseOracle) {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  Matrix y(2, 1);
  y << 0.0, 1.0;
  const auto hp = hyper(KernelFamily::squared_exponential, 1.0, Vector::Ones(1), 0.0, 0.1);
  const GPModel m(hp, Dataset(x, y));
  const auto p = m.predict(Matrix::Constant(1, 1, 0.5));
  const auto [mean, var] =
      oracle::dense_posterior(kernel_oracle(hp), x, y.col(0), 0.0, 0.1 + m.jitter(), Vector::Constant(1, 0.5));
  EXPECT_NEAR(p.mean[0], mean, 1e-10);
  EXPECT_NEAR(p.variance[0], var, 1e-10);
}

TEST(Predict, RandomDenseOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto inst = random_instance(200 + s, 12, 2);
    const GPModel m(inst.hp, inst.data);
    const Matrix q = Matrix::Random(5, 2).array() * 0.5 + 0.5;
    const auto p = m.predict(q);
    for (int i = 0; i < 5; ++i) {
      const auto [mean, var] = oracle::dense_posterior(kernel_oracle(inst.hp), inst.data.query_points(),
                                                       inst.data.observations().col(0), inst.hp.mean,
                                                       inst.hp.noise_variance + m.jitter(), q.row(i).transpose());
      EXPECT_NEAR(p.mean[i], mean, 1e-9);
      EXPECT_NEAR(p.variance[i], std::max(var, 0.0), 1e-9);
    }
  }
}

TEST(Predict, JointAgreesWithMarginals) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto inst = random_instance(300 + s, 10, 3);
    const GPModel m(inst.hp, inst.data);
    const Matrix q = Matrix::Random(7, 3);
    const auto p = m.predict(q);
    const auto j = m.predict_joint(q);
    EXPECT_LT((p.mean - j.mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p.variance - j.covariance.diagonal()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((j.covariance - j.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Predict, VarianceShrinksWithMoreData) {
  auto inst = random_instance(5, 20, 2);
  inst.hp.noise_variance = 0.0;
  const Matrix q = Matrix::Random(10, 2);
  Vector previous = GPModel(inst.hp, Dataset(2, 1)).predict(q).variance;
  for (int n = 1; n <= 20; ++n) {
    const Dataset sub(inst.data.query_points().topRows(n), inst.data.observations().topRows(n));
    const Vector now = GPModel(inst.hp, sub).predict(q).variance;
    EXPECT_TRUE((now.array() <= previous.array() + 1e-8).all()) << "n=" << n;
    previous = now;
  }
}

TEST(PredictGradient, SymmetricDataGivesZeroSlope) {
  Matrix x(2, 1);
  x << -1.0, 1.0;
  const GPModel m(hyper(KernelFamily::matern52, 1, Vector::Ones(1), 0, 0.01), Dataset(x, Matrix::Constant(2, 1, 2.0)));
  EXPECT_NEAR(m.predict_gradient(Vector::Zero(1)).first[0], 0.0, 1e-14);
}

TEST(PredictGradient, MatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = random_instance(400 + s, 8, 1 + static_cast<Eigen::Index>(s % 4));
    const GPModel m(inst.hp, inst.data);
    bolt::Rng rng(RngSeed{s});
    Vector x(inst.hp.kernel.lengthscales.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform();
    const auto p = m.predict_with_gradient(x);
    const auto mean_at = [&](const Vector& z) { return m.predict(z.transpose()).mean[0]; };
    const auto var_at = [&](const Vector& z) { return m.predict(z.transpose()).variance[0]; };
    EXPECT_LT(oracle::relative_error(p.mean_gradient, oracle::central_difference(mean_at, x)), 1e-5) << s;
    EXPECT_LT(oracle::relative_error(p.variance_gradient, oracle::central_difference(var_at, x)), 1e-5) << s;
    EXPECT_NEAR(p.mean, mean_at(x), 1e-12);
  }
}

TEST(PredictGradient, MaternAtTrainingPointIsFinite) {
  auto inst = random_instance(8, 5, 2);
  inst.hp.kernel.family = KernelFamily::matern52;
  const GPModel m(inst.hp, inst.data);
  const auto p = m.predict_with_gradient(inst.data.query_points().row(0).transpose());
  EXPECT_TRUE(p.mean_gradient.allFinite());
  EXPECT_TRUE(p.variance_gradient.allFinite());
  EXPECT_THROW(m.predict_with_gradient(Vector::Zero(3)), bolt::DimensionError);
}

TEST(Sample, DegenerateCovarianceReturnsMean) {
  auto inst = random_instance(9, 6, 1);
  inst.hp.noise_variance = 0.0;
  const GPModel m(inst.hp, inst.data);
  const Matrix s = m.sample(inst.data.query_points().topRows(1), 5, RngSeed{1});
  const double mean = m.predict(inst.data.query_points().topRows(1)).mean[0];
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s(i, 0), mean, 1e-3);
}

TEST(Sample, MomentsAtOnePoint) {
  auto inst = random_instance(10, 6, 1);
  const GPModel m(inst.hp, inst.data);
  const Matrix q = Matrix::Constant(1, 1, 0.37);
  const auto p = m.predict(q);
  const std::size_t n = 10000;
  const Matrix s = m.sample(q, n, RngSeed{77});
  const double mean = s.col(0).mean();
  const double var = (s.col(0).array() - mean).square().sum() / (n - 1);
  EXPECT_LT(std::abs(mean - p.mean[0]), 4.0 * std::sqrt(p.variance[0]) / std::sqrt(double(n)));
  EXPECT_LT(std::abs(var / p.variance[0] - 1.0), 0.1);
}

TEST(Sample, JointDrawsAreDeterministic) {
  auto inst = random_instance(11, 6, 2);
  const GPModel m(inst.hp, inst.data);
  const Matrix q = Matrix::Random(4, 2);
  EXPECT_EQ(m.sample(q, 3, RngSeed{5}), m.sample(q, 3, RngSeed{5}));
  EXPECT_THROW(m.sample(q, 0, RngSeed{5}), bolt::ValidationError);
}

TEST(JitteredCholesky, FailsWithAttemptedJitter) {
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  try {
    bolt::jittered_cholesky(a, 1.0);
    FAIL();
  } catch (const bolt::NotPositiveDefiniteError& e) {
    EXPECT_NEAR(e.attempted_jitter(), 1e-2, 1e-12);
  }
  Matrix ones = Matrix::Ones(3, 3);
  const auto c = bolt::jittered_cholesky(ones, 1.0);
  EXPECT_GE(c.jitter, 1e-8);
}

TEST(Fit, DeterministicAndAscending) {
  auto inst = random_instance(12, 15, 2);
  bolt::FitConfig cfg;
  bolt::FitReport r1;
  bolt::FitReport r2;
  const GPModel a = bolt::fit_gp(inst.data, cfg, RngSeed{3}, &r1);
  const GPModel b = bolt::fit_gp(inst.data, cfg, RngSeed{3}, &r2);
  EXPECT_EQ(a.hyperparameters(), b.hyperparameters());
  ASSERT_EQ(r1.restarts.size(), 5u);
  for (const auto& r : r1.restarts)
    if (r.succeeded) EXPECT_GE(r.final_lml, r.initial_lml);
  const double best = bolt::log_marginal_likelihood(a.hyperparameters(), inst.data).value;
  for (const auto& r : r1.restarts)
    if (r.succeeded) EXPECT_GE(best, r.initial_lml);
}

TEST(Fit, SkipsTinyDatasets) {
  const Dataset one(Matrix::Constant(1, 2, 0.5), Matrix::Constant(1, 1, 2.0));
  bolt::FitReport report;
  const GPModel m = bolt::fit_gp(one, {}, RngSeed{1}, &report);
  EXPECT_TRUE(report.skipped);
  EXPECT_EQ(m.hyperparameters(), bolt::default_hyperparameters(one, {}));
}

TEST(Fit, RecoversLengthscaleOfSyntheticDraws) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    bolt::Rng rng(RngSeed{1000 + seed});
    Matrix x(40, 1);
    for (int i = 0; i < 40; ++i) x(i, 0) = rng.uniform();
    const auto truth = hyper(KernelFamily::squared_exponential, 1.0, Vector::Constant(1, 0.3), 0.0, 0.01);
    Matrix k = oracle::gram(kernel_oracle(truth), x, x);
    k.diagonal().array() += 0.01 + 1e-10;
    const Matrix l = k.llt().matrixL();
    Vector z(40);
    for (int i = 0; i < 40; ++i) z[i] = rng.normal();
    const Matrix y = l * z;
    bolt::FitConfig cfg;
    cfg.family = KernelFamily::squared_exponential;
    cfg.input_range = Vector::Ones(1);
    const GPModel m = bolt::fit_gp(Dataset(x, y), cfg, RngSeed{seed});
    const double ell = m.hyperparameters().kernel.lengthscales[0];
    if (ell > 0.15 && ell < 0.6) ++hits;
  }
  EXPECT_GE(hits, 8);
}

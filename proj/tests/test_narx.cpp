#include <gtest/gtest.h>

#include "pigp/error.hpp"
#include "pigp/metrics.hpp"
#include "pigp/narx.hpp"
#include "pigp/generators.hpp"

using namespace pigp;

namespace {

SequenceData scalar_sequence(std::vector<double> u, std::vector<double> y) {
  SequenceData s;
  s.u = Eigen::VectorXd::Map(u.data(), static_cast<Eigen::Index>(u.size()));
  s.y = Eigen::VectorXd::Map(y.data(), static_cast<Eigen::Index>(y.size()));
  s.dt = 1.0;
  return s;
}

// y_t = 0.5 y_{t-1} + 0.3 u_t, noise free
SequenceData ar1_sequence(Eigen::Index T, double y0, std::uint64_t seed) {
  SequenceData s;
  s.u = band_limited_series(T, 1.0, 0.01, 0.2, 5, 1.0, seed);
  s.y.resize(T);
  s.y[0] = y0;
  for (Eigen::Index t = 1; t < T; ++t) s.y[t] = 0.5 * s.y[t - 1] + 0.3 * s.u(t, 0);
  s.dt = 1.0;
  return s;
}

}  // namespace

TEST(LagMatrix, HandConstructed) {
  NarxConfig cfg;
  cfg.lags_u = 1;
  cfg.lags_y = 1;
  const auto lm = build_lag_matrix(scalar_sequence({1, 2, 3}, {10, 20, 30}), cfg);
  Eigen::MatrixXd X(2, 3);
  X << 2, 1, 10, 3, 2, 20;
  EXPECT_EQ(lm.X, X);
  EXPECT_EQ(lm.targets, Eigen::Vector2d(20, 30));

  cfg.lags_u = 0;
  const auto lm2 = build_lag_matrix(scalar_sequence({5, 6}, {1, 2}), cfg);
  EXPECT_EQ(lm2.X, Eigen::RowVector2d(6, 1));
  EXPECT_EQ(lm2.targets, Eigen::VectorXd::Constant(1, 2.0));
}

TEST(LagMatrix, RowCountIdentity) {
  const auto seq = ar1_sequence(30, 1.0, 3);
  for (int lu = 0; lu <= 6; ++lu) {
    for (int ly = 1; ly <= 6; ++ly) {
      NarxConfig cfg;
      cfg.lags_u = lu;
      cfg.lags_y = ly;
      const auto lm = build_lag_matrix(seq, cfg);
      EXPECT_EQ(lm.X.rows() + std::max(lu, ly), seq.length());
      EXPECT_EQ(lm.X.cols(), cfg.regressor_dimension(1));
    }
  }
}

TEST(LagMatrix, Errors) {
  NarxConfig cfg;
  cfg.lags_u = 2;
  cfg.lags_y = 3;
  EXPECT_THROW(build_lag_matrix(scalar_sequence({1, 2, 3}, {1, 2, 3}), cfg), Error);
  auto seq = scalar_sequence({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
  seq.time = Eigen::VectorXd(5);
  *seq.time << 0, 1, 2, 3.5, 4.5;
  cfg.lags_u = 1;
  cfg.lags_y = 1;
  EXPECT_THROW(build_lag_matrix(seq, cfg), Error);
  cfg.lags_y = 0;
  EXPECT_THROW(build_lag_matrix(scalar_sequence({1, 2, 3}, {1, 2, 3}), cfg), Error);
}

TEST(Narx, InputAugmentationAddsOneColumn) {
  MorisonTaskSpec spec;
  spec.steps = 40;
  const auto seq = generate_morison_series(spec);
  NarxConfig bb;
  bb.lags_u = 2;
  bb.lags_y = 3;
  NarxConfig aug = bb;
  aug.mode = NarxMode::InputAugmentation;
  aug.morison = {1.0, 1.5};
  const auto a = build_lag_matrix(seq, bb);
  const auto b = build_lag_matrix(seq, aug);
  EXPECT_EQ(b.X.cols(), a.X.cols() + 1);
  EXPECT_EQ(b.X(4, b.X.cols() - 1), morison_force(aug.morison, b.X(4, 0), b.X(4, 1)));
}

TEST(Narx, ResidualMeanWithExactMorisonHasZeroWeights) {
  MorisonTaskSpec spec;
  spec.steps = 60;
  spec.discrepancy = 0.0;
  spec.noise = 0.0;
  const auto seq = generate_morison_series(spec);
  NarxConfig cfg;
  cfg.lags_u = 2;
  cfg.lags_y = 2;
  cfg.mode = NarxMode::ResidualMean;
  cfg.morison = {spec.drag, spec.inertia};
  const auto model = fit_narx(seq, cfg, KernelSpec::squared_exponential(1.0, {1.0}), 0.01);
  EXPECT_EQ(model.gp().weights().cwiseAbs().maxCoeff(), 0.0);
  // prior fallback: prediction equals the Morison output exactly
  const auto p = predict_osa(model, seq);
  const auto lm = build_lag_matrix(seq, cfg);
  for (Eigen::Index i = 0; i < lm.X.rows(); ++i) EXPECT_EQ(p.mean[i], morison_on_row(cfg.morison, lm.X.row(i).transpose()));
}

TEST(Narx, ResidualModeEqualsZeroMeanFitOnResiduals) {
  MorisonTaskSpec spec;
  spec.steps = 80;
  const auto seq = generate_morison_series(spec);
  NarxConfig cfg;
  cfg.lags_u = 1;
  cfg.lags_y = 2;
  cfg.mode = NarxMode::ResidualMean;
  cfg.morison = {0.9, 1.4};
  const auto kernel = KernelSpec::squared_exponential(0.5, {2.0});
  const auto model = fit_narx(seq, cfg, kernel, 0.01);
  const auto p = predict_osa(model, seq);

  const auto lm = build_lag_matrix(seq, cfg);
  Eigen::VectorXd morison(lm.X.rows());
  for (Eigen::Index i = 0; i < lm.X.rows(); ++i) morison[i] = morison_on_row(cfg.morison, lm.X.row(i).transpose());
  const auto zero = fit_exact({lm.X, lm.targets - morison, std::nullopt}, kernel, MeanFunctionSpec::zero(), 0.01);
  const auto pz = predict(zero, lm.X);
  for (Eigen::Index i = 0; i < lm.X.rows(); ++i) {
    EXPECT_EQ(p.mean[i], pz.mean[i] + morison[i]);
    EXPECT_EQ(p.variance[i], pz.variance[i]);
  }
}

TEST(Narx, OneStepAheadOnLinearAr1) {
  const auto train = ar1_sequence(120, 1.0, 5);
  NarxConfig cfg;
  cfg.lags_u = 0;
  cfg.lags_y = 1;
  const auto model = fit_narx(train, cfg, KernelSpec::squared_exponential(1.0, {2.0}), 1e-8);
  const auto test = ar1_sequence(60, -0.5, 6);
  const auto p = predict_osa(model, test);
  for (Eigen::Index t = 1; t < test.length(); ++t)
    EXPECT_NEAR(p.mean[t - 1], 0.5 * test.y[t - 1] + 0.3 * test.u(t, 0), 1e-3);
  // composition with the lag matrix
  const auto direct = predict(model.gp(), build_lag_matrix(test, cfg).X);
  EXPECT_EQ(p.mean, direct.mean);
  // interpolation on the training sequence
  const auto pt = predict_osa(model, train);
  EXPECT_LE(nmse(train.y.tail(pt.mean.size()), pt.mean), 0.1);
}

TEST(Narx, FreeRunGeometricDecay) {
  // model that learned y_t = 0.5 y_{t-1} on regressors [u_t, y_{t-1}] with u = 0
  NarxConfig cfg;
  cfg.lags_u = 0;
  cfg.lags_y = 1;
  Dataset rows;
  rows.X = Eigen::MatrixXd::Zero(41, 2);
  rows.X.col(1) = Eigen::VectorXd::LinSpaced(41, -1.0, 9.0);
  rows.y = 0.5 * rows.X.col(1);
  const auto gp = fit_exact(rows, KernelSpec::squared_exponential(1.0, {1.0, 3.0}), MeanFunctionSpec::zero(), 1e-8);
  const NarxModel model(cfg, 1, gp);
  Eigen::VectorXd seed(1);
  seed << 8.0;
  const auto traj = simulate_free_run(model, Eigen::MatrixXd::Zero(8, 1), seed);
  ASSERT_EQ(traj.size(), 8);
  double expect = 8.0;
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    expect *= 0.5;
    EXPECT_NEAR(traj[i], expect, 1e-2);
  }
}

TEST(Narx, FreeRunZeroModelAndSeedErrors) {
  NarxConfig cfg;
  cfg.lags_u = 1;
  cfg.lags_y = 2;
  SequenceData seq;
  seq.u = Eigen::MatrixXd::Random(20, 1);
  seq.y = Eigen::VectorXd::Zero(20);
  const auto model = fit_narx(seq, cfg, KernelSpec::squared_exponential(1.0, {1.0}), 0.1);
  const auto traj = simulate_free_run(model, seq.u, Eigen::VectorXd::Zero(2));
  EXPECT_EQ(traj.size(), 19);
  EXPECT_EQ(traj.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(simulate_free_run(model, seq.u, Eigen::VectorXd::Zero(3)), Error);
}

TEST(Narx, FreeRunMatchesOsaOnExactLinearSystem) {
  const auto train = ar1_sequence(150, 0.0, 11);
  NarxConfig cfg;
  cfg.lags_u = 1;
  cfg.lags_y = 1;
  const auto model = fit_narx(train, cfg, KernelSpec::squared_exponential(1.0, {3.0}), 1e-8);
  const auto test = ar1_sequence(21, 0.4, 12);
  const auto osa = predict_osa(model, test);  // rows t = 1..20
  Eigen::VectorXd seed(1);
  seed << test.y[0];
  const auto free = simulate_free_run(model, test.u, seed);  // t = 1..20
  ASSERT_EQ(free.size(), osa.mean.size());
  EXPECT_LE((free - osa.mean).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Coverage, Examples) {
  Eigen::MatrixXd train(2, 1), test(4, 1);
  train << 0, 1;
  test << 0.5, 1.5, -0.5, 0.2;
  EXPECT_DOUBLE_EQ(coverage_metric(train, test), 50.0);
  Eigen::MatrixXd box(2, 2), inside(3, 2), out(2, 2);
  box << 0, 0, 1, 1;
  inside << 0.1, 0.2, 1, 1, 0.5, 0;
  out << 2, 2, 2, 2;
  EXPECT_DOUBLE_EQ(coverage_metric(box, inside), 100.0);
  EXPECT_DOUBLE_EQ(coverage_metric(box, out), 0.0);
  EXPECT_THROW(coverage_metric(Eigen::MatrixXd(0, 2), inside), Error);
  EXPECT_THROW(coverage_metric(box, Eigen::MatrixXd::Zero(2, 3)), Error);
}

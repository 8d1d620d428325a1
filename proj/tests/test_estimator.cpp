#include <gtest/gtest.h>

#include "comet/estimator.hpp"
#include "comet/synthetic.hpp"
#include "oracles.hpp"

namespace comet {
namespace {

AccuracySamples line_samples(double intercept, double slope, std::vector<int> levels = {1, 2}, int combos = 3) {
  AccuracySamples s;
  s.points.push_back({0, 0, intercept});
  for (int l : levels) {
    for (int c = 0; c < combos; ++c) s.points.push_back({l, c, intercept + slope * l});
  }
  return s;
}

TEST(PosteriorTest, MatchesDenseClosedForm) {
  const std::vector<double> x = {0, 1, 1, 1, 2, 2, 2, 3.5};
  const std::vector<double> y = {0.8, 0.79, 0.77, 0.8, 0.74, 0.76, 0.75, 0.7};
  for (double precision : {1e-8, 1e-3, 0.5, 4.0}) {
    EstimatorOptions opts;
    opts.prior_precision = precision;
    opts.a0 = 0.3;
    opts.b0 = 0.02;
    const Posterior post = fit_posterior(x, y, opts);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd target(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      design(static_cast<Eigen::Index>(i), 0) = 1.0;
      design(static_cast<Eigen::Index>(i), 1) = x[i];
      target(static_cast<Eigen::Index>(i)) = y[i];
    }
    const oracle::NigPosterior want = oracle::nig_posterior(design, target, precision, opts.a0, opts.b0);
    EXPECT_NEAR(post.mean(0), want.mean(0), 1e-8);
    EXPECT_NEAR(post.mean(1), want.mean(1), 1e-8);
    EXPECT_NEAR(post.a, want.a, 1e-12);
    EXPECT_NEAR(post.b, want.b, 1e-8);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(post.covariance(i, j), want.v(i, j), 1e-8 * std::max(1.0, std::abs(want.v(i, j))));
    }
  }
}

TEST(PredictiveTest, StudentTQuantileFromTable) {
  Posterior post;
  post.mean = Eigen::Vector2d(0.5, 0.0);
  post.covariance = Eigen::Matrix2d::Zero();
  post.a = 5.0;  // 10 degrees of freedom
  post.b = 5.0;  // unit scale
  const PredictiveInterval pi = predictive(post, 3.0, 0.95);
  EXPECT_NEAR(pi.dof, 10.0, 1e-12);
  EXPECT_NEAR(pi.scale, 1.0, 1e-12);
  EXPECT_NEAR(pi.upper - pi.mean, 2.228138851986, 1e-9);
  EXPECT_NEAR(pi.mean - pi.lower, 2.228138851986, 1e-9);
}

TEST(PredictiveTest, ScaleGrowsAwayFromData) {
  const std::vector<double> x = {0, 1, 1, 2, 2};
  const std::vector<double> y = {0.9, 0.88, 0.87, 0.85, 0.86};
  const Posterior post = fit_posterior(x, y, EstimatorOptions{});
  EXPECT_GT(predictive(post, -5.0, 0.95).scale, predictive(post, 1.0, 0.95).scale);
}

TEST(FitPredictTest, NoiselessLineExtrapolatesOneStep) {
  const Prediction p = fit_predict(line_samples(0.8, -0.01));
  EXPECT_NEAR(p.p_next, 0.81, 1e-6);
  EXPECT_EQ(p.raw_p_next, p.p_next);
  EXPECT_NEAR(p.current_f1, 0.8, 1e-12);
  EXPECT_LT(p.u, 1e-2);
  EXPECT_GE(p.u, 0.0);
}

TEST(FitPredictTest, NoisySamplesWidenInterval) {
  AccuracySamples quiet = line_samples(0.8, -0.01);
  AccuracySamples noisy = quiet;
  for (std::size_t i = 1; i < noisy.points.size(); ++i) noisy.points[i].f1 += (i % 2 ? 0.03 : -0.03);
  EXPECT_GT(fit_predict(noisy).u, fit_predict(quiet).u);
}

TEST(FitPredictTest, RankDeficiency) {
  AccuracySamples s;
  s.points = {{0, 0, 0.5}, {0, 1, 0.5}, {0, 2, 0.5}};
  EXPECT_THROW(fit_predict(s), RankDeficiencyError);
  s.points = {{0, 0, 0.5}, {1, 0, 0.4}};
  EXPECT_THROW(fit_predict(s), RankDeficiencyError);
}

TEST(FitPredictTest, MissingCurrentPoint) {
  AccuracySamples s;
  s.points = {{1, 0, 0.5}, {2, 0, 0.4}, {2, 1, 0.45}};
  EXPECT_THROW(fit_predict(s), EstimationError);
}

TEST(MeasureTest, SevenPointsForTwoLevelsThreeCombos) {
  SyntheticSpec spec;
  spec.rows = 300;
  spec.seed = 2;
  const Dataset d = generate_synthetic(spec);
  const AccuracySamples s =
      measure_pollution_effect(d, 0, ErrorType::kGaussianNoise, ModelSpec{}, EstimatorOptions{}, 5);
  EXPECT_EQ(s.points.size(), 1u + 2u * 3u);
  EXPECT_EQ(s.states.size(), 6u);
  EXPECT_EQ(s.points.front().level, 0);
  EXPECT_NEAR(s.current_f1(), measure_f1(ModelSpec{}, d), 1e-12);
  for (const PollutedState& st : s.states) EXPECT_EQ(st.touched_train.size(), st.level.cells_for(d.split().train.size()));
  const AccuracySamples again =
      measure_pollution_effect(d, 0, ErrorType::kGaussianNoise, ModelSpec{}, EstimatorOptions{}, 5);
  EXPECT_EQ(s.points, again.points);
  EXPECT_TRUE(d.all_clean());
}

TEST(MeasureTest, SuppliedCurrentF1SkipsRefit) {
  SyntheticSpec spec;
  spec.rows = 200;
  const Dataset d = generate_synthetic(spec);
  const AccuracySamples s =
      measure_pollution_effect(d, 1, ErrorType::kMissingValues, ModelSpec{}, EstimatorOptions{}, 1, 0.42);
  EXPECT_EQ(s.current_f1(), 0.42);
}

TEST(MeasureTest, IncompatibleErrorSurfacesBeforeFitting) {
  SyntheticSpec spec;
  spec.rows = 200;
  const Dataset d = generate_synthetic(spec);
  EXPECT_THROW(measure_pollution_effect(d, 0, ErrorType::kCategoricalShift, ModelSpec{}, EstimatorOptions{}, 1),
               CompatibilityError);
}

TEST(DiscrepancyTest, MeanShiftAndClamp) {
  DiscrepancyLog log;
  const CandidateKey key{2, ErrorType::kScaling};
  log.record(key, 0.8, 0.85);
  log.record(key, 0.7, 0.73);
  EXPECT_NEAR(*log.mean_discrepancy(key), 0.04, 1e-12);
  EXPECT_FALSE(log.mean_discrepancy({0, ErrorType::kScaling}).has_value());
  EXPECT_EQ(log.size(), 2u);

  Prediction p;
  p.feature = 2;
  p.error = ErrorType::kScaling;
  p.p_next = 0.5;
  p.raw_p_next = 0.5;
  EXPECT_NEAR(adjust(p, log).p_next, 0.54, 1e-12);
  EXPECT_EQ(adjust(p, log).raw_p_next, 0.5);
  p.p_next = 0.99;
  EXPECT_EQ(adjust(p, log).p_next, 1.0);
  p.p_next = 1.3;  // clamped even without history
  p.feature = 0;
  EXPECT_EQ(adjust(p, log).p_next, 1.0);
}

TEST(DiscrepancyTest, RejectsOutOfRangeValues) {
  DiscrepancyLog log;
  EXPECT_THROW(log.record({0, ErrorType::kMissingValues}, 1.2, 0.5), InvalidArgument);
  EXPECT_THROW(log.record({0, ErrorType::kMissingValues}, 0.5, -0.1), InvalidArgument);
}

}  // namespace
}  // namespace comet

#include <gtest/gtest.h>

#include <algorithm>

#include "comet/baselines.hpp"
#include "comet/synthetic.hpp"

namespace comet {
namespace {

// Informative features 0-1, noise 2-3; `levels` gives pre-pollution steps per feature.
Dataset dirty_data(std::vector<int> levels, ErrorType error = ErrorType::kMissingValues, std::uint64_t seed = 5) {
  SyntheticSpec spec;
  spec.rows = 625;
  spec.class_sep = 1.0;
  spec.seed = seed;
  Dataset d = generate_synthetic(spec);
  PrePollutionSetting setting;
  setting.seed = seed;
  for (FeatureId f = 0; f < d.num_features(); ++f) {
    const int l = f < levels.size() ? levels[f] : 0;
    setting.features.push_back({d.feature(f).name, PollutionLevel(l), std::vector<ErrorType>(static_cast<std::size_t>(l), error)});
  }
  apply_pre_pollution(d, setting);
  return d;
}

BaselineConfig config(double budget, std::uint64_t seed = 1) {
  BaselineConfig c;
  c.budget = budget;
  c.seed = seed;
  return c;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

TEST(ShapleyTest, SampledMatchesExactTwoFeatureEnumeration) {
  // Non-additive model, so the two orderings give different contributions.
  const RawModel model = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = 1.5 * x(i, 0) - x(i, 1) + 0.8 * x(i, 0) * x(i, 1);
    return out;
  };
  const Eigen::MatrixXd explain = random_matrix(10, 2, 1);
  const Eigen::MatrixXd background = random_matrix(40, 2, 2);
  // Exact values written out by hand for two players.
  Eigen::MatrixXd hand(10, 2);
  auto v = [&](Eigen::Index i, bool a, bool b) {
    double s = 0;
    for (Eigen::Index j = 0; j < background.rows(); ++j) {
      const double x0 = a ? explain(i, 0) : background(j, 0);
      const double x1 = b ? explain(i, 1) : background(j, 1);
      s += 1.5 * x0 - x1 + 0.8 * x0 * x1;
    }
    return s / static_cast<double>(background.rows());
  };
  for (Eigen::Index i = 0; i < 10; ++i) {
    hand(i, 0) = 0.5 * ((v(i, true, false) - v(i, false, false)) + (v(i, true, true) - v(i, false, true)));
    hand(i, 1) = 0.5 * ((v(i, false, true) - v(i, false, false)) + (v(i, true, true) - v(i, true, false)));
  }
  const Eigen::MatrixXd exact = exact_shapley(model, explain, background);
  const Eigen::MatrixXd sampled = sampled_shapley(model, explain, background, 32, 9);
  EXPECT_LT((exact - hand).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((sampled - exact).cwiseAbs().maxCoeff(), 0.01);
}

TEST(ShapleyTest, EfficiencyAndNullFeature) {
  const RawModel model = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd {
    return (x.col(0).array() * x.col(1).array() + x.col(2).array().square()).matrix();
  };
  const Eigen::MatrixXd explain = random_matrix(5, 4, 3);
  const Eigen::MatrixXd background = random_matrix(20, 4, 4);
  const Eigen::MatrixXd phi = sampled_shapley(model, explain, background, 6, 1);
  const Eigen::VectorXd full = model(explain);
  const double base = model(background).mean();
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(phi.row(i).sum(), full(i) - base, 1e-10);
    EXPECT_NEAR(phi(i, 3), 0.0, 1e-12);
  }
}

TEST(ShapleyTest, ImportanceRanksInformativeFirstAndIsDeterministic) {
  SyntheticSpec spec;
  spec.rows = 500;
  spec.class_sep = 2.0;
  const Dataset d = generate_synthetic(spec);
  const ImportanceRanking r = shapley_importance(ModelSpec{}, d, {}, 3);
  ASSERT_EQ(r.entries.size(), 4u);
  EXPECT_LT(r.entries[0].feature, 2u);
  EXPECT_LT(r.entries[1].feature, 2u);
  for (std::size_t i = 1; i < r.entries.size(); ++i) EXPECT_GE(r.entries[i - 1].importance, r.entries[i].importance);
  EXPECT_EQ(shapley_importance(ModelSpec{}, d, {}, 3).entries, r.entries);
}

TEST(FirTest, CleansOnlyDirtyFeatureAndRecordsEachStep) {
  const Dataset d = dirty_data({0, 0, 0, 4});
  const BaselineResult r = fir_session(d, config(10));
  ASSERT_FALSE(r.steps.empty());
  for (const BaselineStep& s : r.steps) EXPECT_EQ(s.key.feature, 3u);
  EXPECT_EQ(r.trajectory.points.size(), r.steps.size() + 1);
  EXPECT_EQ(r.steps.size(), 4u);  // four steps clean four pollution steps
}

TEST(FirTest, CursorMovesOnWhenFeatureIsClean) {
  const Dataset d = dirty_data({2, 2, 2, 2});
  const BaselineResult r = fir_session(d, config(8));
  ASSERT_EQ(r.steps.size(), 8u);
  // Features are worked through in blocks, never interleaved.
  std::vector<FeatureId> order;
  for (const BaselineStep& s : r.steps) {
    if (order.empty() || order.back() != s.key.feature) order.push_back(s.key.feature);
  }
  std::vector<FeatureId> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::unique(sorted.begin(), sorted.end()), sorted.end());
}

TEST(RrTest, SingleDirtyFeatureIsForced) {
  const Dataset d = dirty_data({0, 3});
  for (std::uint64_t seed : {1, 2, 3}) {
    const BaselineResult r = rr_run(d, config(5, seed));
    for (const BaselineStep& s : r.steps) EXPECT_EQ(s.key.feature, 1u);
  }
}

TEST(RrTest, MeanOfFiveRepeatsWithinEnvelope) {
  const Dataset d = dirty_data({3, 3, 3, 3});
  const RandomResult r = rr_session(d, config(6), 5);
  ASSERT_EQ(r.propagated.size(), 5u);
  ASSERT_EQ(r.mean.points.size(), 7u);
  for (std::size_t u = 0; u < 7; ++u) {
    double lo = 1, hi = 0, sum = 0;
    for (const auto& p : r.propagated) {
      lo = std::min(lo, p[u]);
      hi = std::max(hi, p[u]);
      sum += p[u];
    }
    EXPECT_GE(r.mean.points[u].f1, lo - 1e-12);
    EXPECT_LE(r.mean.points[u].f1, hi + 1e-12);
    EXPECT_NEAR(r.mean.points[u].f1, sum / 5, 1e-12);
  }
  const RandomResult again = rr_session(d, config(6), 5);
  EXPECT_EQ(again.mean, r.mean);
}

TEST(ClTest, OneEstimatorPass) {
  const Dataset d = dirty_data({4, 4, 2, 2});
  SessionConfig cfg;
  cfg.budget = 8;
  cfg.seed = 2;
  Session s(d, [&] {
    SessionConfig c = cfg;
    c.frozen_ranking = true;
    return c;
  }());
  s.run();
  const auto& frozen = s.state().frozen;
  ASSERT_FALSE(frozen.empty());
  for (const IterationRecord& rec : s.state().records) {
    for (const CandidateSummary& c : rec.candidates) {
      auto it = std::find_if(frozen.begin(), frozen.end(), [&](const ScoredCandidate& f) { return f.key() == c.key; });
      ASSERT_NE(it, frozen.end());
      EXPECT_EQ(c.score, it->score);
    }
  }
  const SessionResult r = cl_session(d, cfg);
  EXPECT_EQ(r.trajectory, s.state().trajectory);
}

TEST(AcTest, GradientOrderMatchesBruteForce) {
  const Dataset d = dirty_data({5, 5, 5, 5});
  ModelSpec spec;
  const TrainedModel model = fit(spec, d);
  const auto& train = d.split().train;
  const std::vector<std::size_t> ranked = rank_by_gradient(model, d, train);
  // Recompute every norm from the encoded rows directly.
  const auto linear = static_cast<const LinearClassifier&>(model.classifier());
  std::vector<std::pair<double, std::size_t>> brute;
  for (std::size_t r : train) {
    bool dirty = false;
    for (const Feature& f : d.features()) dirty |= f.cells.is_dirty(r);
    if (!dirty) continue;
    const std::size_t one[] = {r};
    const Eigen::VectorXd x = model.pipeline().transform(d, one).row(0).transpose();
    brute.emplace_back(linear.record_gradient(x, d.labels()[r]).norm(), r);
  }
  ASSERT_EQ(ranked.size(), brute.size());
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    auto norm_of = [&](std::size_t row) {
      return std::find_if(brute.begin(), brute.end(), [&](const auto& b) { return b.second == row; })->first;
    };
    EXPECT_GE(norm_of(ranked[i - 1]), norm_of(ranked[i]));
  }
}

TEST(AcTest, RequiresGradientModel) {
  BaselineConfig c = config(5);
  c.spec.algorithm = Algorithm::kKnn;
  EXPECT_THROW(ac_session(dirty_data({2}), c), CapabilityError);
}

TEST(AcTest, CleanDataIsFlat) {
  const ActiveCleanResult r = ac_session(dirty_data({}), config(5));
  EXPECT_TRUE(r.batches.empty());
  EXPECT_EQ(r.trajectory.points.size(), 1u);
}

TEST(AcTest, CleansStepSizedRecordBatches) {
  const Dataset d = dirty_data({20, 20, 20, 20});
  const std::size_t pre = clean_records(d, d.split().train).size();
  const ActiveCleanResult r = ac_session(d, config(4));
  EXPECT_EQ(r.pretrain_rows, pre);
  ASSERT_EQ(r.batches.size(), 4u);
  for (const ActiveCleanBatch& b : r.batches) {
    EXPECT_EQ(b.rows.size(), 5u + 2u);
    EXPECT_EQ(b.cost, 1.0);  // one error type under constant costs
  }
  EXPECT_EQ(r.ledger.spent(), 4.0);
}

TEST(OracleTest, CommitsMaximumMeasuredRatio) {
  const Dataset d = dirty_data({6, 6, 3, 3});
  const OracleResult r = oracle_session(d, config(6));
  ASSERT_EQ(r.iterations.size(), 6u);
  for (const OracleIteration& it : r.iterations) {
    const auto committed = std::find_if(it.evaluations.begin(), it.evaluations.end(),
                                        [&](const OracleEvaluation& e) { return e.key == it.committed; });
    ASSERT_NE(committed, it.evaluations.end());
    for (const OracleEvaluation& e : it.evaluations) EXPECT_GE(committed->ratio, e.ratio);
  }
  // The committed step reproduces its evaluated F1.
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    const auto committed = std::find_if(it.evaluations.begin(), it.evaluations.end(),
                                        [&](const OracleEvaluation& e) { return e.key == it.committed; });
    EXPECT_EQ(r.trajectory.points[i + 1].f1, committed->f1_after);
  }
}

TEST(OracleTest, SoleCandidateCommittedEvenWhenHarmful) {
  const Dataset d = dirty_data({0, 0, 0, 2});
  const OracleResult r = oracle_session(d, config(2));
  ASSERT_EQ(r.iterations.size(), 2u);
  for (const OracleIteration& it : r.iterations) {
    EXPECT_EQ(it.evaluations.size(), 1u);
    EXPECT_EQ(it.committed.feature, 3u);
  }
}

TEST(GainRatioTest, ZeroCost) {
  EXPECT_EQ(gain_ratio(0.1, 2), 0.05);
  EXPECT_TRUE(std::isinf(gain_ratio(0.1, 0)));
  EXPECT_LT(gain_ratio(-0.1, 0), 0);
  EXPECT_EQ(gain_ratio(0, 0), 0);
}

}  // namespace
}  // namespace comet

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "comet/recommender.hpp"
#include "comet/synthetic.hpp"

namespace comet {
namespace {

Dataset polluted_data(std::uint64_t seed = 3, int steps = 10) {
  SyntheticSpec spec;
  spec.rows = 625;
  spec.categorical = 1;
  spec.class_sep = 1.2;
  spec.seed = seed;
  Dataset d = generate_synthetic(spec);
  PrePollutionSetting setting;
  setting.seed = seed;
  for (const Feature& f : d.features()) setting.features.push_back({f.name, PollutionLevel(0), {}});
  setting.features[0] = {d.feature(0).name, PollutionLevel(steps), std::vector<ErrorType>(steps, ErrorType::kScaling)};
  setting.features[1] = {d.feature(1).name, PollutionLevel(steps),
                         std::vector<ErrorType>(steps, ErrorType::kMissingValues)};
  apply_pre_pollution(d, setting);
  return d;
}

SessionConfig small_config(double budget = 6) {
  SessionConfig cfg;
  cfg.budget = budget;
  cfg.seed = 7;
  return cfg;
}

TEST(CostTest, ClosedForms) {
  const CostModel c = CostModel::constant(1.5);
  const CostModel o = CostModel::one_shot(2, 0);
  const CostModel l = CostModel::linear(1, 1);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(c.next_step_cost(k), 1.5);
    EXPECT_EQ(o.next_step_cost(k), k == 0 ? 2.0 : 0.0);
    EXPECT_EQ(l.next_step_cost(k), 1.0 + k);
  }
  EXPECT_THROW(c.next_step_cost(-1), InvalidArgument);
}

TEST(CostTest, TextRoundTrip) {
  for (const CostModel& m : {CostModel::constant(1), CostModel::one_shot(2, 0), CostModel::linear(0.5, 1.25)}) {
    EXPECT_EQ(parse_cost_model(to_string(m)), m);
  }
  EXPECT_EQ(parse_cost_model("linear(1, 2)"), CostModel::linear(1, 2));
  EXPECT_THROW(parse_cost_model("step(1)"), InvalidArgument);
  EXPECT_THROW(parse_cost_model("constant(-1)"), InvalidArgument);
  EXPECT_THROW(parse_cost_model("constant(x)"), InvalidArgument);
}

TEST(CostTest, MixedAssignment) {
  const CostAssignment a = CostAssignment::mixed();
  EXPECT_EQ(next_step_cost(a, ErrorType::kMissingValues, 0), 2.0);
  EXPECT_EQ(next_step_cost(a, ErrorType::kMissingValues, 3), 0.0);
  EXPECT_EQ(next_step_cost(a, ErrorType::kGaussianNoise, 2), 3.0);
  EXPECT_EQ(next_step_cost(a, ErrorType::kScaling, 9), 1.0);
  EXPECT_EQ(next_step_cost(CostAssignment::uniform(CostModel::constant(4)), ErrorType::kScaling, 0), 4.0);
}

TEST(LedgerTest, ChargesAndRefuses) {
  BudgetLedger ledger(3);
  ledger.charge({0, {0, ErrorType::kScaling}, 2, true, false});
  EXPECT_EQ(ledger.remaining(), 1.0);
  EXPECT_THROW(ledger.charge({1, {0, ErrorType::kScaling}, 1.5, true, false}), BudgetExceededError);
  ledger.charge({1, {0, ErrorType::kScaling}, 1, false, false});
  EXPECT_EQ(ledger.remaining(), 0.0);
  ledger.charge({2, {0, ErrorType::kScaling}, 0, true, true});
  EXPECT_EQ(ledger.entries().size(), 3u);
}

TEST(ScoreTest, BenefitOverCost) {
  Prediction p;
  p.p_next = 0.9;
  p.u = 0.04;
  EXPECT_NEAR(score(p, 1), 0.86, 1e-12);
  EXPECT_NEAR(score(p, 2), 0.43, 1e-12);
  EXPECT_TRUE(std::isinf(score(p, 0)));
  EXPECT_THROW(score(p, -1), InvalidArgument);
}

ScoredCandidate candidate(FeatureId f, ErrorType e, double p_next, double u, double cost) {
  ScoredCandidate c;
  c.prediction.feature = f;
  c.prediction.error = e;
  c.prediction.p_next = p_next;
  c.prediction.u = u;
  c.cost = cost;
  c.score = score(c.prediction, cost);
  return c;
}

TEST(RankTest, FilterThenOrder) {
  std::vector<ScoredCandidate> cands = {
      candidate(0, ErrorType::kScaling, 0.80, 0.01, 1),         // filtered: not above current
      candidate(1, ErrorType::kMissingValues, 0.85, 0.02, 2),   // 0.415
      candidate(2, ErrorType::kMissingValues, 0.84, 0.01, 1),   // 0.83
      candidate(3, ErrorType::kGaussianNoise, 0.82, 0.05, 0),   // inf, numerator 0.77
      candidate(4, ErrorType::kGaussianNoise, 0.90, 0.05, 0),   // inf, numerator 0.85
      candidate(5, ErrorType::kScaling, 0.84, 0.01, 1),         // ties with feature 2
  };
  const auto ranked = rank(cands, 0.80);
  ASSERT_EQ(ranked.size(), 5u);
  EXPECT_EQ(ranked[0].key().feature, 4u);
  EXPECT_EQ(ranked[1].key().feature, 3u);
  EXPECT_EQ(ranked[2].key().feature, 2u);
  EXPECT_EQ(ranked[3].key().feature, 5u);
  EXPECT_EQ(ranked[4].key().feature, 1u);
}

TEST(RankTest, SameFeatureTieUsesErrorOrder) {
  std::vector<ScoredCandidate> cands = {candidate(0, ErrorType::kScaling, 0.9, 0.1, 1),
                                        candidate(0, ErrorType::kMissingValues, 0.9, 0.1, 1)};
  const auto ranked = rank(cands, 0.5);
  EXPECT_EQ(ranked[0].key().error, ErrorType::kMissingValues);
}

TEST(BufferTest, MergesByRow) {
  CleaningBuffer b;
  const CandidateKey k{1, ErrorType::kScaling};
  b.store(k, {{3, 1.0, false}, {5, 2.0, false}});
  b.store(k, {{5, 7.0, false}, {9, 0.0, true}});
  const auto cells = b.take(k);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[1].value, 7.0);
  EXPECT_FALSE(b.contains(k));
  EXPECT_TRUE(b.take(k).empty());
}

TEST(SelectCellsTest, PriorityCellsFirstAndQuota) {
  const Dataset d = polluted_data();
  const CandidateKey key{0, ErrorType::kScaling};
  const PollutedState probe = pollute(d, 0, ErrorType::kMissingValues, PollutionLevel(20), 4);
  std::vector<std::size_t> expected;
  for (std::size_t r : probe.touched_train) {
    if (d.feature(0).cells.is_dirty(r) && expected.size() < 5) expected.push_back(r);
  }
  ASSERT_EQ(expected.size(), 5u);
  std::vector<PollutedState> priority = {probe};
  const auto rows = select_step_cells(d, key, priority, 1);
  EXPECT_EQ(rows.size(), 5u + 2u);  // ceil(1% of 500) + ceil(1% of 125)
  std::sort(expected.begin(), expected.end());
  EXPECT_TRUE(std::equal(expected.begin(), expected.end(), rows.begin()));
  for (std::size_t r : rows) EXPECT_TRUE(d.feature(0).cells.is_dirty(r));
  EXPECT_EQ(select_step_cells(d, key, priority, 1), rows);
}

TEST(SelectCellsTest, FewerDirtyCellsThanQuota) {
  Dataset d = polluted_data();
  std::vector<std::size_t> dirty = dirty_rows(d, 0, SplitPart::kTrain);
  dirty.resize(dirty.size() - 2);
  clean_cells(d, 0, dirty);
  for (std::size_t r : dirty_rows(d, 0, SplitPart::kTest)) {
    const std::size_t one[] = {r};
    clean_cells(d, 0, one);
  }
  EXPECT_EQ(select_step_cells(d, {0, ErrorType::kScaling}, {}, 3).size(), 2u);
}

TEST(ApplyCellsTest, ValidatesCategoryCodes) {
  Dataset d = polluted_data();
  const FeatureId cat = d.num_features() - 1;
  const CellValue bad[] = {{0, 99.0, false}};
  EXPECT_THROW(apply_cells(d, cat, bad), InvalidArgument);
  const CellValue nan[] = {{0, std::nan(""), false}};
  EXPECT_THROW(apply_cells(d, 0, nan), InvalidArgument);
  const CellValue out_of_range[] = {{d.num_rows(), 1.0, false}};
  EXPECT_THROW(apply_cells(d, 0, out_of_range), InvalidArgument);
}

TEST(SessionTest, ZeroBudgetIsExhaustedImmediately) {
  Session s(polluted_data(), small_config(0));
  EXPECT_EQ(s.status(), SessionStatus::kBudgetExhausted);
  EXPECT_FALSE(s.recommend().has_value());
  EXPECT_EQ(s.state().trajectory.points.size(), 1u);
  EXPECT_THROW(s.execute(Recommendation{}), BudgetExceededError);
}

TEST(SessionTest, CleanDatasetFinishesImmediately) {
  SyntheticSpec spec;
  spec.rows = 200;
  Session s(generate_synthetic(spec), small_config());
  EXPECT_EQ(s.status(), SessionStatus::kFinished);
  EXPECT_TRUE(s.open_keys().empty());
  EXPECT_FALSE(s.recommend().has_value());
}

TEST(SessionTest, SimulatedNeedsTruth) {
  Dataset d = polluted_data();
  d.drop_truth();
  EXPECT_THROW(Session(d, small_config()), MissingTruthError);
}

TEST(SessionTest, OpenKeysFollowDirt) {
  const Session s(polluted_data(), small_config());
  const std::vector<CandidateKey> want = {{0, ErrorType::kScaling}, {1, ErrorType::kMissingValues}};
  EXPECT_EQ(s.open_keys(), want);
}

TEST(SessionTest, RecommendationIsCachedUntilDataChanges) {
  Session s(polluted_data(), small_config());
  const auto r1 = s.recommend();
  ASSERT_TRUE(r1.has_value());
  const Round* round = s.round();
  ASSERT_NE(round, nullptr);
  EXPECT_EQ(round->candidates.size(), 2u);
  for (const auto& [key, states] : round->dprime) EXPECT_EQ(states.size(), 6u);
  const auto r2 = s.recommend();
  EXPECT_EQ(r1->candidate.key(), r2->candidate.key());
  EXPECT_EQ(r1->candidate.score, r2->candidate.score);
  EXPECT_FALSE(r1->dprime_train.empty());
}

TEST(SessionTest, RunRespectsBudgetAndInvariants) {
  const SessionResult r = run_session(polluted_data(), small_config(8));
  EXPECT_LE(r.ledger.spent(), 8.0 + 1e-9);
  double sum = 0.0;
  for (const LedgerEntry& e : r.ledger.entries()) sum += e.cost;
  EXPECT_NEAR(sum, r.ledger.spent(), 1e-12);
  EXPECT_NE(r.status, SessionStatus::kActive);
  for (std::size_t i = 1; i < r.trajectory.points.size(); ++i) {
    EXPECT_GE(r.trajectory.points[i].budget, r.trajectory.points[i - 1].budget);
  }
  EXPECT_EQ(r.trajectory.back().budget, r.ledger.spent());
  std::size_t attempts = 0;
  for (const IterationRecord& rec : r.records) attempts += rec.attempts.size();
  EXPECT_EQ(attempts, r.ledger.entries().size());
  EXPECT_EQ(r.discrepancies.size(), attempts);
}

TEST(SessionTest, AcceptedStepsRaiseF1) {
  Session s(polluted_data(), small_config(10));
  s.run();
  for (const IterationRecord& rec : s.state().records) {
    for (const Attempt& a : rec.attempts) {
      if (a.outcome == StepOutcome::kAccepted) EXPECT_GT(a.f1_after, a.f1_before);
      if (a.outcome == StepOutcome::kRejected) EXPECT_LE(a.f1_after, a.f1_before);
    }
  }
  EXPECT_NO_THROW(s.data().validate());
}

TEST(SessionTest, SameSeedSameRun) {
  const SessionResult a = run_session(polluted_data(), small_config());
  const SessionResult b = run_session(polluted_data(), small_config());
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.ledger, b.ledger);
  EXPECT_EQ(a.records, b.records);
}

TEST(SessionTest, RestartFromStateContinuesIdentically) {
  Session whole(polluted_data(), small_config(10));
  whole.run();

  Session first(polluted_data(), small_config(10));
  first.run_iteration();
  first.run_iteration();
  Session resumed(first.state());
  resumed.run();
  EXPECT_EQ(resumed.state().trajectory, whole.state().trajectory);
  EXPECT_EQ(resumed.state().ledger, whole.state().ledger);
  EXPECT_EQ(resumed.state().data, whole.state().data);
}

SessionConfig interactive_config(double budget) {
  SessionConfig cfg = small_config(budget);
  cfg.mode = SessionMode::kInteractive;
  return cfg;
}

TEST(SessionTest, RejectedStepRevertsBuffersAndCharges) {
  Dataset d = polluted_data();
  Session s(d, interactive_config(20));
  const auto rec = s.recommend();
  ASSERT_TRUE(rec.has_value());
  const CandidateKey key = rec->candidate.key();
  // Resubmitting the current values leaves F1 unchanged, which is not an improvement.
  const std::size_t rows[] = {d.split().train[0], d.split().train[1]};
  const std::vector<CellValue> cells = current_cells(d, key.feature, rows);
  const double cost = rec->cost;
  ASSERT_GT(cost, 0.0);
  const Attempt a = s.execute(*rec, cells);
  EXPECT_EQ(a.outcome, rec->fallback ? StepOutcome::kFallback : StepOutcome::kRejected);
  if (rec->fallback) GTEST_SKIP() << "ranking was empty";
  EXPECT_EQ(s.data(), d);
  EXPECT_TRUE(s.state().buffer.contains(key));
  EXPECT_TRUE(s.state().rejected.contains(key));
  EXPECT_EQ(s.state().ledger.spent(), cost);
  EXPECT_EQ(s.state().steps_done.at(key), 1);
  EXPECT_EQ(s.state().iteration, 0);
  EXPECT_EQ(s.state().trajectory.points.size(), 2u);
  // The rejected key is not recommended again in this iteration.
  const auto next = s.recommend();
  ASSERT_TRUE(next.has_value());
  if (!next->fallback) EXPECT_NE(next->candidate.key(), key);
}

TEST(SessionTest, BufferedFallbackCostsNothing) {
  Dataset d = polluted_data();
  SessionConfig cfg = interactive_config(20);
  cfg.error_types = {ErrorType::kScaling};  // one open key
  Session s(d, cfg);
  // Interactive sessions know nothing about dirt, so close the other features.
  for (FeatureId f = 1; f < d.num_features(); ++f) s.mark_fully_clean(f);
  ASSERT_EQ(s.open_keys().size(), 1u);
  auto rec = s.recommend();
  ASSERT_TRUE(rec.has_value());
  const std::size_t rows[] = {d.split().train[0]};
  const std::vector<CellValue> cells = current_cells(d, 0, rows);
  const Attempt first = s.execute(*rec, cells);
  if (first.outcome != StepOutcome::kRejected) GTEST_SKIP() << "first step was not rejected";
  rec = s.recommend();
  ASSERT_TRUE(rec.has_value());
  EXPECT_TRUE(rec->fallback);
  EXPECT_TRUE(rec->buffered);
  EXPECT_EQ(rec->cost, 0.0);
  const double spent = s.state().ledger.spent();
  const Attempt second = s.execute(*rec);
  EXPECT_TRUE(second.from_buffer);
  EXPECT_EQ(second.outcome, StepOutcome::kFallback);
  EXPECT_EQ(s.state().ledger.spent(), spent);
  EXPECT_EQ(s.state().iteration, 1);
  EXPECT_FALSE(s.state().buffer.contains({0, ErrorType::kScaling}));
}

TEST(SessionTest, MarkFullyCleanClosesFeature) {
  Session s(polluted_data(), interactive_config(5));
  const std::size_t before = s.open_keys().size();
  s.mark_fully_clean(0);
  EXPECT_LT(s.open_keys().size(), before);
  for (const CandidateKey& k : s.open_keys()) EXPECT_NE(k.feature, 0u);
  EXPECT_THROW(s.mark_fully_clean(99), InvalidArgument);
}

TEST(SessionTest, FrozenRankingReusesFirstPass) {
  SessionConfig cfg = small_config(8);
  cfg.frozen_ranking = true;
  Session s(polluted_data(), cfg);
  s.run();
  ASSERT_FALSE(s.state().frozen.empty());
  for (const IterationRecord& rec : s.state().records) {
    for (const CandidateSummary& c : rec.candidates) {
      auto it = std::find_if(s.state().frozen.begin(), s.state().frozen.end(),
                             [&](const ScoredCandidate& f) { return f.key() == c.key; });
      ASSERT_NE(it, s.state().frozen.end());
      EXPECT_EQ(it->prediction.p_next, c.p_next);
    }
  }
}

TEST(LedgerTest, CsvNamesFeatures) {
  const Dataset d = polluted_data();
  BudgetLedger ledger(5);
  ledger.charge({0, {1, ErrorType::kMissingValues}, 2, true, false});
  std::ostringstream out;
  ledger.write_csv(out, d);
  EXPECT_EQ(out.str(), "iteration,feature,error_type,cost,accepted,from_buffer\n0," + d.feature(1).name +
                           "," + std::string(to_string(ErrorType::kMissingValues)) + ",2,1,0\n");
}

}  // namespace
}  // namespace comet

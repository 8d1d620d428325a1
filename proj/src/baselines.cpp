#include "comet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "comet/parallel.hpp"

namespace comet {

namespace {

// Shared plumbing for the feature-wise baselines: same cell selection,
// cost accounting and F1 measurement as a COMET session.
class StepRunner {
 public:
  StepRunner(Dataset& data, const BaselineConfig& config) : data_(data), config_(config), ledger_(config.budget) {
    if (config.budget < 0) throw InvalidArgument("budget must be non-negative");
    if (!data.has_truth()) throw MissingTruthError("baseline sessions clean from a truth store");
    f1_ = current_f1(config.spec, data);
    trajectory_.add(0.0, f1_);
  }

  double f1() const { return f1_; }
  const BudgetLedger& ledger() const { return ledger_; }

  std::vector<CandidateKey> dirty_keys(FeatureId f) const {
    std::vector<CandidateKey> keys;
    for (ErrorType e : config_.error_types) {
      if (!is_compatible(e, data_.feature(f).kind)) continue;
      if (dirty_count(data_, {f, e}) > 0) keys.push_back({f, e});
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  }

  std::vector<CandidateKey> dirty_keys() const {
    std::vector<CandidateKey> keys;
    for (FeatureId f = 0; f < data_.num_features(); ++f) {
      for (const CandidateKey& k : dirty_keys(f)) keys.push_back(k);
    }
    return keys;
  }

  double cost(CandidateKey key) const {
    auto it = steps_done_.find(key);
    return next_step_cost(config_.costs, key.error, it == steps_done_.end() ? 0 : it->second);
  }
  bool affordable(CandidateKey key) const { return ledger_.affordable(cost(key)); }

  std::vector<CellValue> step_cells(CandidateKey key, std::uint64_t seed) const {
    return truth_cells(data_, key.feature, select_step_cells(data_, key, {}, seed));
  }

  BaselineStep commit(CandidateKey key, std::span<const CellValue> cells, int iteration) {
    BaselineStep step;
    step.key = key;
    step.cost = cost(key);
    step.cells = cells.size();
    ledger_.charge({iteration, key, step.cost, true, false});
    ++steps_done_[key];
    apply_cells(data_, key.feature, cells);
    f1_ = current_f1(config_.spec, data_);
    step.f1_after = f1_;
    trajectory_.add(ledger_.spent(), f1_);
    return step;
  }

  BaselineResult finish(std::vector<BaselineStep> steps) {
    return {std::move(trajectory_), std::move(ledger_), std::move(steps)};
  }

  BudgetCurve& trajectory() { return trajectory_; }

 private:
  Dataset& data_;
  const BaselineConfig& config_;
  BudgetLedger ledger_;
  std::map<CandidateKey, int> steps_done_;
  BudgetCurve trajectory_;
  double f1_ = 0.0;
};

std::uint64_t key_tag(CandidateKey key) {
  return (static_cast<std::uint64_t>(key.feature) << 8) | static_cast<std::uint64_t>(key.error);
}

std::vector<std::size_t> sample_rows(std::span<const std::size_t> rows, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out = rng.sample(std::vector<std::size_t>(rows.begin(), rows.end()),
                                            static_cast<std::size_t>(std::max(k, 0)));
  std::sort(out.begin(), out.end());
  return out;
}

// Adds each permutation's marginal contributions to phi.
void accumulate_permutation(const RawModel& model, const Eigen::MatrixXd& explain, const Eigen::MatrixXd& background,
                            const std::vector<Eigen::Index>& order, Eigen::MatrixXd& phi) {
  const Eigen::Index m = explain.rows(), d = explain.cols(), b = background.rows();
  // Rows: instance i, coalition size k in [0, d], background row j.
  Eigen::MatrixXd z(m * (d + 1) * b, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k <= d; ++k) {
      const Eigen::Index base = (i * (d + 1) + k) * b;
      z.middleRows(base, b) = background;
      for (Eigen::Index s = 0; s < k; ++s) {
        z.col(order[static_cast<std::size_t>(s)]).segment(base, b).setConstant(explain(i, order[static_cast<std::size_t>(s)]));
      }
    }
  }
  const Eigen::VectorXd out = model(z);
  for (Eigen::Index i = 0; i < m; ++i) {
    double prev = out.segment((i * (d + 1)) * b, b).mean();
    for (Eigen::Index k = 1; k <= d; ++k) {
      const double v = out.segment((i * (d + 1) + k) * b, b).mean();
      phi(i, order[static_cast<std::size_t>(k - 1)]) += v - prev;
      prev = v;
    }
  }
}

}  // namespace

Eigen::MatrixXd sampled_shapley(const RawModel& model, const Eigen::MatrixXd& explain,
                                const Eigen::MatrixXd& background, int permutations, std::uint64_t seed) {
  if (permutations < 1) throw InvalidArgument("at least one permutation is required");
  if (background.rows() == 0) throw InvalidArgument("Shapley values need background rows");
  if (explain.cols() != background.cols()) throw ShapeMismatchError("explain and background widths differ");
  const Eigen::Index d = explain.cols();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(explain.rows(), d);
  const int pairs = (permutations + 1) / 2;
  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (int p = 0; p < pairs; ++p) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order);
    accumulate_permutation(model, explain, background, order, phi);
    std::reverse(order.begin(), order.end());
    accumulate_permutation(model, explain, background, order, phi);
  }
  return phi / (2.0 * pairs);
}

Eigen::MatrixXd exact_shapley(const RawModel& model, const Eigen::MatrixXd& explain,
                              const Eigen::MatrixXd& background) {
  const Eigen::Index d = explain.cols();
  if (d > 8) throw InvalidArgument("exact Shapley enumeration is limited to 8 features");
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(explain.rows(), d);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double count = 0;
  do {
    accumulate_permutation(model, explain, background, order, phi);
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return phi / count;
}

Eigen::MatrixXd raw_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.num_features()));
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    const ColumnData& c = data.feature(f).cells;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          c.missing[rows[i]] ? std::numeric_limits<double>::quiet_NaN() : c.values[rows[i]];
    }
  }
  return raw;
}

ImportanceRanking shapley_importance(const ModelSpec& spec, const Dataset& data, const ShapleyOptions& options,
                                     std::uint64_t seed) {
  const TrainedModel model = fit(spec, data);
  const auto& train = data.split().train;
  const Eigen::MatrixXd background = raw_rows(data, sample_rows(train, options.background, derive_seed(seed, {0})));
  const Eigen::MatrixXd explain = raw_rows(data, sample_rows(train, options.explain, derive_seed(seed, {1})));

  // Binary models explain the positive-class score, multiclass models
  // average the magnitudes over every class score.
  const int classes = data.num_classes() <= 2 ? 1 : data.num_classes();
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.num_features()));
  for (int c = 0; c < classes; ++c) {
    const Eigen::Index column = classes == 1 ? data.positive_class() : c;
    const RawModel output = [&](const Eigen::MatrixXd& raw) -> Eigen::VectorXd {
      return model.scores_raw(raw).col(column);
    };
    const Eigen::MatrixXd phi =
        sampled_shapley(output, explain, background, options.permutations, derive_seed(seed, {2}));
    importance += phi.cwiseAbs().colwise().mean().transpose();
  }
  importance /= classes;

  ImportanceRanking ranking;
  for (FeatureId f = 0; f < data.num_features(); ++f) ranking.entries.push_back({f, importance(static_cast<Eigen::Index>(f))});
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
  return ranking;
}

BaselineResult fir_session(Dataset data, const BaselineConfig& config, const ShapleyOptions& shapley) {
  StepRunner runner(data, config);
  const ImportanceRanking ranking = shapley_importance(config.spec, data, shapley, derive_seed(config.seed, {0}));
  std::vector<BaselineStep> steps;
  for (int iteration = 0;; ++iteration) {
    std::optional<CandidateKey> key;
    for (const FeatureImportance& entry : ranking.entries) {
      const auto keys = runner.dirty_keys(entry.feature);
      if (!keys.empty()) {
        key = keys.front();
        break;
      }
    }
    if (!key || !runner.affordable(*key)) break;
    const auto cells = runner.step_cells(*key, derive_seed(config.seed, {1, static_cast<std::uint64_t>(iteration)}));
    steps.push_back(runner.commit(*key, cells, iteration));
  }
  return runner.finish(std::move(steps));
}

BaselineResult rr_run(Dataset data, const BaselineConfig& config) {
  StepRunner runner(data, config);
  Rng rng(derive_seed(config.seed, {0}));
  std::vector<BaselineStep> steps;
  for (int iteration = 0;; ++iteration) {
    std::vector<CandidateKey> options;
    for (FeatureId f = 0; f < data.num_features(); ++f) {
      const auto keys = runner.dirty_keys(f);
      if (!keys.empty() && runner.affordable(keys.front())) options.push_back(keys.front());
    }
    if (options.empty()) break;
    const CandidateKey key = options[rng.index(options.size())];
    const auto cells = runner.step_cells(key, derive_seed(config.seed, {1, static_cast<std::uint64_t>(iteration)}));
    steps.push_back(runner.commit(key, cells, iteration));
  }
  return runner.finish(std::move(steps));
}

RandomResult rr_session(const Dataset& data, const BaselineConfig& config, int repeats) {
  if (repeats < 1) throw InvalidArgument("random recommendations need at least one repeat");
  RandomResult out;
  const int units = static_cast<int>(std::floor(config.budget + 1e-9));
  for (int r = 0; r < repeats; ++r) {
    BaselineConfig c = config;
    c.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(r)});
    out.repeats.push_back(rr_run(data, c));
    out.propagated.push_back(propagate(out.repeats.back().trajectory, units));
  }
  out.mean = dense_curve(pointwise_mean(out.propagated));
  return out;
}

SessionResult cl_session(Dataset data, const SessionConfig& config) {
  SessionConfig c = config;
  c.frozen_ranking = true;
  return run_session(std::move(data), c);
}

std::vector<std::size_t> clean_records(const Dataset& data, std::span<const std::size_t> rows) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows) {
    bool clean = true;
    for (const Feature& f : data.features()) clean = clean && !f.cells.is_dirty(r);
    if (clean) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> rank_by_gradient(const TrainedModel& model, const Dataset& data,
                                          std::span<const std::size_t> rows) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t r : rows) {
    bool dirty = false;
    for (const Feature& f : data.features()) dirty = dirty || f.cells.is_dirty(r);
    if (dirty) scored.emplace_back(per_record_gradient(model, data, r).norm(), r);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

ActiveCleanResult ac_session(Dataset data, const BaselineConfig& config) {
  if (!supports_gradients(config.spec.algorithm)) {
    throw CapabilityError("ActiveClean needs per-record gradients; " + std::string(to_string(config.spec.algorithm)) +
                          " has none");
  }
  if (!data.has_truth()) throw MissingTruthError("baseline sessions clean from a truth store");
  ActiveCleanResult out;
  out.ledger = BudgetLedger(config.budget);
  double f1 = current_f1(config.spec, data);
  out.trajectory.add(0.0, f1);
  std::map<ErrorType, int> steps_done;

  const auto& train = data.split().train;
  out.pretrain_rows = clean_records(data, train).size();
  for (int iteration = 0;; ++iteration) {
    std::vector<std::size_t> fit_rows = clean_records(data, train);
    std::optional<TrainedModel> model;
    try {
      if (!fit_rows.empty()) model = fit(config.spec, data, fit_rows);
    } catch (const DegenerateLabelsError&) {
    }
    if (!model) model = fit(config.spec, data, train);

    ActiveCleanBatch batch;
    for (SplitPart part : {SplitPart::kTrain, SplitPart::kTest}) {
      const auto& rows = data.split().rows(part);
      std::vector<std::size_t> ranked = rank_by_gradient(*model, data, rows);
      ranked.resize(std::min(ranked.size(), cleaning_step_cells(rows.size())));
      batch.rows.insert(batch.rows.end(), ranked.begin(), ranked.end());
    }
    if (batch.rows.empty()) break;

    // One charge per error type present in the batch.
    std::map<ErrorType, FeatureId> types;
    for (std::size_t r : batch.rows) {
      for (FeatureId f = 0; f < data.num_features(); ++f) {
        const Feature& feat = data.feature(f);
        if (!feat.cells.is_dirty(r)) continue;
        std::optional<ErrorType> e = data.truth()[f].error[r];
        if (!e) e = infer_error_type(feat, r, data.truth()[f]);
        if (!e) e = ErrorType::kMissingValues;
        types.try_emplace(*e, f);
      }
    }
    for (const auto& [e, f] : types) batch.cost += next_step_cost(config.costs, e, steps_done[e]);
    if (!out.ledger.affordable(batch.cost)) break;
    for (const auto& [e, f] : types) {
      out.ledger.charge({iteration, {f, e}, next_step_cost(config.costs, e, steps_done[e]), true, false});
      ++steps_done[e];
    }
    for (FeatureId f = 0; f < data.num_features(); ++f) clean_cells(data, f, batch.rows);
    f1 = current_f1(config.spec, data);
    batch.f1_after = f1;
    out.trajectory.add(out.ledger.spent(), f1);
    out.batches.push_back(std::move(batch));
  }
  return out;
}

double gain_ratio(double gain, double cost) {
  if (cost > 0) return gain / cost;
  if (gain > 0) return std::numeric_limits<double>::infinity();
  if (gain < 0) return -std::numeric_limits<double>::infinity();
  return 0.0;
}

OracleResult oracle_session(Dataset data, const BaselineConfig& config) {
  StepRunner runner(data, config);
  OracleResult out;
  for (int iteration = 0;; ++iteration) {
    std::vector<CandidateKey> keys;
    for (const CandidateKey& k : runner.dirty_keys()) {
      if (runner.affordable(k)) keys.push_back(k);
    }
    if (keys.empty()) break;

    OracleIteration it;
    it.f1_before = runner.f1();
    it.evaluations.resize(keys.size());
    std::vector<std::vector<CellValue>> cells(keys.size());
    parallel_for(keys.size(), [&](std::size_t i) {
      const CandidateKey key = keys[i];
      cells[i] = runner.step_cells(key, derive_seed(config.seed, {static_cast<std::uint64_t>(iteration), key_tag(key)}));
      ColumnData overlay = data.feature(key.feature).cells;
      for (const CellValue& c : cells[i]) {
        overlay.values[c.row] = c.value;
        overlay.missing[c.row] = c.missing ? 1 : 0;
        overlay.provenance[c.row] = Provenance::kClean;
      }
      OracleEvaluation& e = it.evaluations[i];
      e.key = key;
      e.cost = runner.cost(key);
      e.f1_after = current_f1(config.spec, TableView(data, key.feature, overlay));
      e.gain = e.f1_after - it.f1_before;
      e.ratio = gain_ratio(e.gain, e.cost);
    });
    // Keys are in (feature, error) order, so the first maximum wins ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < keys.size(); ++i) {
      if (it.evaluations[i].ratio > it.evaluations[best].ratio) best = i;
    }
    it.committed = keys[best];
    runner.commit(keys[best], cells[best], iteration);
    out.iterations.push_back(std::move(it));
  }
  BaselineResult r = runner.finish({});
  out.trajectory = std::move(r.trajectory);
  out.ledger = std::move(r.ledger);
  return out;
}

}  // namespace comet

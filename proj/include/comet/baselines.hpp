#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/recommender.hpp"

namespace comet {

struct FeatureImportance {
  FeatureId feature = 0;
  double importance = 0.0;

  bool operator==(const FeatureImportance&) const = default;
};

// Descending by importance, ties by feature index.
struct ImportanceRanking {
  std::vector<FeatureImportance> entries;
  std::string method = "permutation_shapley";
};

struct ShapleyOptions {
  int permutations = 32;  // rounded up to an even count: each draw is paired with its reverse
  int background = 100;   // rows averaged over for absent features
  int explain = 32;       // rows whose attributions are averaged
};

// Output of a model on raw rows (one column per feature, NaN = missing).
using RawModel = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Interventional Shapley values: the value of a coalition S for row x is
// the mean model output over background rows b with x's values on S and
// b's elsewhere. Returns explain.rows() x features attributions.
Eigen::MatrixXd sampled_shapley(const RawModel& model, const Eigen::MatrixXd& explain,
                                const Eigen::MatrixXd& background, int permutations, std::uint64_t seed);

// Exact attributions by enumerating every permutation (small feature counts only).
Eigen::MatrixXd exact_shapley(const RawModel& model, const Eigen::MatrixXd& explain,
                              const Eigen::MatrixXd& background);

// Raw feature matrix of the given rows; categorical cells hold their code.
Eigen::MatrixXd raw_rows(const Dataset& data, std::span<const std::size_t> rows);

// Fits `spec` on the train split and ranks features by mean |attribution|.
ImportanceRanking shapley_importance(const ModelSpec& spec, const Dataset& data, const ShapleyOptions& options,
                                     std::uint64_t seed);

struct BaselineConfig {
  ModelSpec spec;
  CostAssignment costs;
  double budget = 50.0;
  std::uint64_t seed = 0;
  std::vector<ErrorType> error_types = {kAllErrorTypes.begin(), kAllErrorTypes.end()};
};

// One cleaning step taken by a baseline.
struct BaselineStep {
  CandidateKey key;
  double cost = 0.0;
  double f1_after = 0.0;
  std::size_t cells = 0;
};

struct BaselineResult {
  BudgetCurve trajectory;
  BudgetLedger ledger;
  std::vector<BaselineStep> steps;
};

// Feature-importance recommendations: rank once on the dirty input, clean
// the top dirty feature step by step until it is clean, then move on.
BaselineResult fir_session(Dataset data, const BaselineConfig& config, const ShapleyOptions& shapley = {});

// Random recommendations, one run.
BaselineResult rr_run(Dataset data, const BaselineConfig& config);

struct RandomResult {
  std::vector<BaselineResult> repeats;
  std::vector<std::vector<double>> propagated;  // per repeat, budget units 0..floor(budget)
  BudgetCurve mean;                             // pointwise mean of `propagated`
};

RandomResult rr_session(const Dataset& data, const BaselineConfig& config, int repeats = 5);

// COMET-light: one estimator pass, then the frozen list with COMET's
// accept, revert, buffer and fallback.
SessionResult cl_session(Dataset data, const SessionConfig& config);

struct ActiveCleanBatch {
  std::vector<std::size_t> rows;  // cleaned records
  double cost = 0.0;
  double f1_after = 0.0;
};

struct ActiveCleanResult {
  BudgetCurve trajectory;
  BudgetLedger ledger;
  std::vector<ActiveCleanBatch> batches;
  std::size_t pretrain_rows = 0;
};

// Rows whose every feature cell is clean.
std::vector<std::size_t> clean_records(const Dataset& data, std::span<const std::size_t> rows);

// Dirty records of `rows` ordered by descending per-record gradient norm of
// `model`; ties by row index.
std::vector<std::size_t> rank_by_gradient(const TrainedModel& model, const Dataset& data,
                                          std::span<const std::size_t> rows);

// ActiveClean adapted to step-sized record batches.
ActiveCleanResult ac_session(Dataset data, const BaselineConfig& config);

struct OracleEvaluation {
  CandidateKey key;
  double cost = 0.0;
  double f1_after = 0.0;
  double gain = 0.0;
  double ratio = 0.0;  // gain / cost; +-inf at zero cost
};

struct OracleIteration {
  double f1_before = 0.0;
  std::vector<OracleEvaluation> evaluations;
  CandidateKey committed;
};

struct OracleResult {
  BudgetCurve trajectory;
  BudgetLedger ledger;
  std::vector<OracleIteration> iterations;
};

double gain_ratio(double gain, double cost);

// Greedy local optimum over measured one-step gains.
OracleResult oracle_session(Dataset data, const BaselineConfig& config);

}  // namespace comet

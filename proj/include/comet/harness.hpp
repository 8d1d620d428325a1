#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "comet/baselines.hpp"
#include "comet/serialize.hpp"
#include "comet/synthetic.hpp"

namespace comet {

enum class Method { kComet, kFir, kRandom, kCometLight, kActiveClean, kOracle };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetSource {
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path csv;
  std::filesystem::path schema;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<Algorithm> algorithms = {Algorithm::kLogisticRegression};
  bool multi_error = false;
  ErrorType error = ErrorType::kMissingValues;  // single-error scenario
  CostAssignment costs;
  double budget = 50.0;
  double pollution_mean = 0.05;
  double pollution_cap = 0.5;
  int settings = 5;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<Method> methods = {Method::kComet, Method::kFir, Method::kRandom,
                                 Method::kCometLight, Method::kActiveClean, Method::kOracle};
  EstimatorOptions estimator;
  int search_samples = 10;  // 0 keeps the algorithm defaults
  int rr_repeats = 5;
  ShapleyOptions shapley;
};

// Throws ConfigError on an invalid configuration.
void validate(const ExperimentConfig& config);
std::string scenario_name(const ExperimentConfig& config);
std::vector<ErrorType> scenario_errors(const ExperimentConfig& config);

ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
Json config_to_json(const ExperimentConfig& config);

// The pristine dataset of a config: generated, or loaded, split and with
// its truth store captured.
Dataset load_dataset(const DatasetSource& source);

// Predicted vs measured F1 of one executed COMET step.
struct PredictionPair {
  CandidateKey key;
  double predicted = 0.0;
  double raw_predicted = 0.0;
  double actual = 0.0;

  bool operator==(const PredictionPair&) const = default;
};

struct MethodRun {
  Method method = Method::kComet;
  bool ok = false;
  std::string error;
  std::uint64_t start_fingerprint = 0;  // of the dataset the method received
  BudgetCurve curve;
  double spent = 0.0;
  std::size_t steps = 0;
  std::vector<PredictionPair> pairs;  // COMET only

  bool operator==(const MethodRun&) const = default;
};

// Wall-clock data is kept apart from the deterministic result.
struct MethodTiming {
  double total_seconds = 0.0;
  std::vector<double> iteration_seconds;
};

struct SettingRun {
  Algorithm algorithm = Algorithm::kLogisticRegression;
  std::uint64_t seed = 0;
  int setting_index = 0;
  PrePollutionSetting setting;
  ModelSpec spec;
  std::uint64_t snapshot_fingerprint = 0;
  double dirty_f1 = 0.0;
  double cleaned_f1 = 0.0;
  bool ok = true;
  std::string error;
  std::vector<MethodRun> runs;
  std::vector<MethodTiming> timings;  // parallel to `runs`

  const MethodRun* find(Method method) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SettingRun> cells;

  std::size_t failures() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);
// Same, over an already loaded dataset.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& pristine);

// Deterministic part only (no timings).
Json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const Json& j);
Json timings_to_json(const ExperimentResult& result);

struct AdvantageSummary {
  std::string group;  // algorithm or error scenario
  Method contender = Method::kRandom;
  std::vector<double> per_unit;  // mean advantage at budget units 0..B
  double mean = 0.0;             // mean over units 1..B
  double final_value = 0.0;      // at unit B
  std::size_t runs = 0;
};

struct MaeSummary {
  std::string algorithm;
  std::string scenario;
  double mae = 0.0;
  std::size_t pairs = 0;
};

struct Aggregate {
  int max_budget = 0;
  std::vector<AdvantageSummary> by_algorithm;
  std::vector<AdvantageSummary> by_error;
  std::vector<MaeSummary> mae;
  double overall_mae = 0.0;
  std::size_t overall_pairs = 0;
};

Aggregate aggregate(const ExperimentResult& result);
Json aggregate_to_json(const Aggregate& agg);

// result.json, timings.json and curves.csv in `dir`.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);
ExperimentResult read_result(const std::filesystem::path& dir);
void write_curves_csv(const ExperimentResult& result, std::ostream& out);

}  // namespace comet

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "comet/rng.hpp"
#include "comet/tabular.hpp"

namespace comet {

// Pollution or cleaning amount in whole steps of 1% of a split's rows.
class PollutionLevel {
 public:
  static constexpr int kPercentPerStep = 1;

  constexpr PollutionLevel() = default;
  constexpr explicit PollutionLevel(int steps) : steps_(steps) {}

  static PollutionLevel from_fraction(double fraction);

  constexpr int steps() const { return steps_; }
  constexpr double fraction() const { return steps_ * kPercentPerStep / 100.0; }

  // round-half-up(fraction * rows), computed exactly in integers.
  constexpr std::size_t cells_for(std::size_t rows) const {
    return (static_cast<std::size_t>(steps_ * kPercentPerStep) * rows + 50) / 100;
  }

  constexpr auto operator<=>(const PollutionLevel&) const = default;

 private:
  int steps_ = 0;
};

// Cells cleaned per split by one cleaning step: ceil(1% of the split).
constexpr std::size_t cleaning_step_cells(std::size_t rows) {
  return (rows * PollutionLevel::kPercentPerStep + 99) / 100;
}

class NoOpPollutionError : public Error {
 public:
  using Error::Error;
};

// A polluted copy of one column over an untouched base dataset.
struct PollutedState {
  FeatureId feature = 0;
  ErrorType error = ErrorType::kMissingValues;
  PollutionLevel level;
  int combination = 0;
  ColumnData column;
  std::vector<std::size_t> touched_train;
  std::vector<std::size_t> touched_test;

  TableView view(const Dataset& base) const { return TableView(base, feature, column); }
  const std::vector<std::size_t>& touched(SplitPart part) const {
    return part == SplitPart::kTrain ? touched_train : touched_test;
  }
};

PollutedState pollute(const Dataset& data, FeatureId feature, ErrorType error, PollutionLevel level,
                      std::uint64_t seed, int combination = 0);

// Error generators. They edit values only: provenance is the caller's job,
// and a missing cell stays missing under the value-changing generators.
void inject_missing(ColumnData& column, std::span<const std::size_t> rows);
double draw_noise_sigma(Rng& rng);
void inject_gaussian(ColumnData& column, std::span<const std::size_t> rows, double sigma, Rng& rng);
void inject_gaussian(ColumnData& column, std::span<const std::size_t> rows, Rng& rng);
void inject_catshift(ColumnData& column, std::span<const std::size_t> rows, int category_count, Rng& rng);
void inject_scaling(ColumnData& column, std::span<const std::size_t> rows, Rng& rng);

void inject(const Feature& feature, ColumnData& column, ErrorType error,
            std::span<const std::size_t> rows, Rng& rng);

struct FeaturePollution {
  std::string feature;
  PollutionLevel level;
  std::vector<ErrorType> step_errors;  // one entry per step
};

struct PrePollutionSetting {
  std::uint64_t seed = 0;
  bool multi_error = false;
  std::vector<FeaturePollution> features;
};

struct PrePollutionOptions {
  double mean_level = 0.05;
  double cap = 0.5;
  bool multi_error = false;
  ErrorType single_error = ErrorType::kMissingValues;
};

double draw_raw_level(Rng& rng, double mean_level);

PrePollutionSetting sample_pre_pollution(const Dataset& data, const PrePollutionOptions& options,
                                         std::uint64_t seed);

class DoublePollutionError : public Error {
 public:
  using Error::Error;
};

// Pollutes a pristine dataset and records ground truth.
void apply_pre_pollution(Dataset& data, const PrePollutionSetting& setting);

class MissingTruthError : public Error {
 public:
  using Error::Error;
};

// Restores cells from the truth store; returns how many actually changed.
std::size_t clean_cells(Dataset& data, FeatureId feature, std::span<const std::size_t> rows);

// Dirty rows of one split; `error` narrows to cells dirtied by that type.
std::vector<std::size_t> dirty_rows(const Dataset& data, FeatureId feature, SplitPart part,
                                    std::optional<ErrorType> error = std::nullopt);
std::size_t dirty_count(const Dataset& data, CandidateKey key);

// Best-effort error-type label for a dirty cell given its truth value.
std::optional<ErrorType> infer_error_type(const Feature& feature, std::size_t row,
                                          const TruthColumn& truth);

}  // namespace comet

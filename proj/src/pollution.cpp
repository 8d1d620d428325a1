#include "comet/pollution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace comet {

PollutionLevel PollutionLevel::from_fraction(double fraction) {
  if (!(fraction >= 0.0) || fraction > 1.0) throw InvalidArgument("pollution level outside [0, 1]");
  return PollutionLevel(static_cast<int>(std::floor(fraction * 100.0 / kPercentPerStep + 1e-9)));
}

void inject_missing(ColumnData& column, std::span<const std::size_t> rows) {
  for (std::size_t r : rows) column.missing[r] = 1;
}

double draw_noise_sigma(Rng& rng) { return rng.uniform(1.0, 5.0); }

void inject_gaussian(ColumnData& column, std::span<const std::size_t> rows, double sigma, Rng& rng) {
  for (std::size_t r : rows) column.values[r] += sigma * rng.normal();
}

void inject_gaussian(ColumnData& column, std::span<const std::size_t> rows, Rng& rng) {
  const double sigma = draw_noise_sigma(rng);
  inject_gaussian(column, rows, sigma, rng);
}

void inject_catshift(ColumnData& column, std::span<const std::size_t> rows, int category_count,
                     Rng& rng) {
  if (category_count < 2) {
    throw CompatibilityError("categorical shift needs at least two categories");
  }
  for (std::size_t r : rows) {
    const auto current = static_cast<std::size_t>(column.values[r]);
    std::size_t pick = rng.index(static_cast<std::size_t>(category_count - 1));
    if (pick >= current) ++pick;  // skip the current category
    column.values[r] = static_cast<double>(pick);
  }
}

void inject_scaling(ColumnData& column, std::span<const std::size_t> rows, Rng& rng) {
  static constexpr double kFactors[] = {10.0, 100.0, 1000.0};
  for (std::size_t r : rows) column.values[r] *= kFactors[rng.index(3)];
}

void inject(const Feature& feature, ColumnData& column, ErrorType error,
            std::span<const std::size_t> rows, Rng& rng) {
  if (!is_compatible(error, feature.kind)) {
    throw CompatibilityError(std::string(to_string(error)) + " cannot pollute " +
                             std::string(to_string(feature.kind)) + " feature '" + feature.name + "'");
  }
  switch (error) {
    case ErrorType::kMissingValues:
      inject_missing(column, rows);
      break;
    case ErrorType::kGaussianNoise:
      inject_gaussian(column, rows, rng);
      break;
    case ErrorType::kCategoricalShift:
      inject_catshift(column, rows, feature.category_count(), rng);
      break;
    case ErrorType::kScaling:
      inject_scaling(column, rows, rng);
      break;
  }
}

PollutedState pollute(const Dataset& data, FeatureId feature, ErrorType error, PollutionLevel level,
                      std::uint64_t seed, int combination) {
  const Feature& feat = data.feature(feature);
  if (!is_compatible(error, feat.kind)) {
    throw CompatibilityError(std::string(to_string(error)) + " cannot pollute " +
                             std::string(to_string(feat.kind)) + " feature '" + feat.name + "'");
  }
  if (error == ErrorType::kCategoricalShift && feat.category_count() < 2) {
    throw CompatibilityError("categorical shift needs at least two categories in '" + feat.name + "'");
  }
  const std::size_t k_train = level.cells_for(data.split().train.size());
  const std::size_t k_test = level.cells_for(data.split().test.size());
  if (level.steps() <= 0 || (k_train == 0 && k_test == 0)) {
    throw NoOpPollutionError("pollution level " + std::to_string(level.fraction()) +
                             " selects no cells of '" + feat.name + "'");
  }

  PollutedState state;
  state.feature = feature;
  state.error = error;
  state.level = level;
  state.combination = combination;
  state.column = feat.cells;

  Rng rng(seed);
  // One sigma per polluted state.
  const double sigma = error == ErrorType::kGaussianNoise ? draw_noise_sigma(rng) : 0.0;
  for (SplitPart part : {SplitPart::kTrain, SplitPart::kTest}) {
    const auto& rows = data.split().rows(part);
    std::vector<std::size_t> chosen = rng.sample(rows, level.cells_for(rows.size()));
    std::sort(chosen.begin(), chosen.end());
    if (error == ErrorType::kGaussianNoise) {
      inject_gaussian(state.column, chosen, sigma, rng);
    } else {
      inject(feat, state.column, error, chosen, rng);
    }
    for (std::size_t r : chosen) state.column.provenance[r] = Provenance::kDirtyTemp;
    (part == SplitPart::kTrain ? state.touched_train : state.touched_test) = std::move(chosen);
  }
  return state;
}

double draw_raw_level(Rng& rng, double mean_level) { return rng.exponential(mean_level); }

PrePollutionSetting sample_pre_pollution(const Dataset& data, const PrePollutionOptions& options,
                                         std::uint64_t seed) {
  if (!(options.mean_level > 0.0)) throw InvalidArgument("mean pollution level must be positive");
  if (!(options.cap >= 0.0 && options.cap <= 0.5)) throw InvalidArgument("pollution cap must lie in [0, 0.5]");

  PrePollutionSetting setting;
  setting.seed = seed;
  setting.multi_error = options.multi_error;
  Rng rng(seed);
  for (const Feature& f : data.features()) {
    FeaturePollution fp;
    fp.feature = f.name;
    const double raw = draw_raw_level(rng, options.mean_level);
    fp.level = PollutionLevel::from_fraction(std::min(options.cap, raw));

    std::vector<ErrorType> allowed;
    for (ErrorType e : kAllErrorTypes) {
      if (!is_compatible(e, f.kind)) continue;
      if (e == ErrorType::kCategoricalShift && f.category_count() < 2) continue;
      allowed.push_back(e);
    }
    if (!options.multi_error) {
      if (std::find(allowed.begin(), allowed.end(), options.single_error) == allowed.end()) {
        fp.level = PollutionLevel(0);
      }
      fp.step_errors.assign(static_cast<std::size_t>(fp.level.steps()), options.single_error);
    } else {
      for (int s = 0; s < fp.level.steps(); ++s) fp.step_errors.push_back(allowed[rng.index(allowed.size())]);
    }
    setting.features.push_back(std::move(fp));
  }
  return setting;
}

void apply_pre_pollution(Dataset& data, const PrePollutionSetting& setting) {
  if (!data.all_clean()) throw DoublePollutionError("dataset already contains dirty cells");
  if (setting.features.size() != data.num_features()) {
    throw ShapeMismatchError("pre-pollution setting covers " + std::to_string(setting.features.size()) +
                             " features, dataset has " + std::to_string(data.num_features()));
  }
  data.capture_truth();
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    const FeaturePollution& fp = setting.features[f];
    const Feature& feat = data.feature(f);
    if (fp.feature != feat.name) throw ShapeMismatchError("setting feature '" + fp.feature + "' out of order");
    if (fp.step_errors.size() != static_cast<std::size_t>(fp.level.steps())) {
      throw InvalidArgument("setting for '" + fp.feature + "' lists the wrong number of step errors");
    }
    for (ErrorType e : fp.step_errors) {
      if (!is_compatible(e, feat.kind)) {
        throw CompatibilityError(std::string(to_string(e)) + " incompatible with '" + feat.name + "'");
      }
    }
    if (fp.level.steps() == 0) continue;

    ColumnData& column = data.mutable_cells(f);
    TruthColumn& truth = data.mutable_truth()[f];
    for (SplitPart part : {SplitPart::kTrain, SplitPart::kTest}) {
      const auto& rows = data.split().rows(part);
      Rng rng(derive_seed(setting.seed, {f, part == SplitPart::kTrain ? 0u : 1u}));
      // Distinct cells for the whole level, handed out one step-sized chunk per step.
      const std::vector<std::size_t> chosen = rng.sample(rows, fp.level.cells_for(rows.size()));
      const std::size_t chunk = PollutionLevel(1).cells_for(rows.size());
      std::size_t begin = 0;
      for (int s = 0; s < fp.level.steps() && begin < chosen.size(); ++s) {
        const bool last = s + 1 == fp.level.steps();
        const std::size_t end = last ? chosen.size() : std::min(chosen.size(), begin + chunk);
        std::vector<std::size_t> cells(chosen.begin() + static_cast<long>(begin),
                                       chosen.begin() + static_cast<long>(end));
        const ErrorType e = fp.step_errors[static_cast<std::size_t>(s)];
        inject(feat, column, e, cells, rng);
        for (std::size_t r : cells) {
          column.provenance[r] = Provenance::kDirtyPrePollution;
          truth.error[r] = e;
        }
        begin = end;
      }
    }
  }
}

std::size_t clean_cells(Dataset& data, FeatureId feature, std::span<const std::size_t> rows) {
  if (!data.has_truth()) throw MissingTruthError("cleaning from ground truth needs a truth store");
  ColumnData& column = data.mutable_cells(feature);
  TruthColumn& truth = data.mutable_truth()[feature];
  std::size_t changed = 0;
  for (std::size_t r : rows) {
    if (r >= data.num_rows()) {
      throw InvalidArgument("cell index " + std::to_string(r) + " out of range");
    }
    const bool differs = column.missing[r] != truth.missing[r] ||
                         (!truth.missing[r] && column.values[r] != truth.values[r]);
    if (differs) ++changed;
    column.values[r] = truth.values[r];
    column.missing[r] = truth.missing[r];
    column.provenance[r] = Provenance::kClean;
    truth.error[r].reset();
  }
  return changed;
}

std::vector<std::size_t> dirty_rows(const Dataset& data, FeatureId feature, SplitPart part,
                                    std::optional<ErrorType> error) {
  const ColumnData& column = data.feature(feature).cells;
  std::vector<std::size_t> out;
  for (std::size_t r : data.split().rows(part)) {
    if (!column.is_dirty(r)) continue;
    if (error && data.has_truth()) {
      const auto& tag = data.truth()[feature].error[r];
      if (tag && *tag != *error) continue;
    }
    out.push_back(r);
  }
  return out;
}

std::size_t dirty_count(const Dataset& data, CandidateKey key) {
  return dirty_rows(data, key.feature, SplitPart::kTrain, key.error).size() +
         dirty_rows(data, key.feature, SplitPart::kTest, key.error).size();
}

std::optional<ErrorType> infer_error_type(const Feature& feature, std::size_t row,
                                          const TruthColumn& truth) {
  const ColumnData& c = feature.cells;
  if (c.missing[row] && !truth.missing[row]) return ErrorType::kMissingValues;
  if (c.missing[row] || truth.missing[row]) return std::nullopt;
  if (c.values[row] == truth.values[row]) return std::nullopt;
  if (feature.categorical()) return ErrorType::kCategoricalShift;
  if (truth.values[row] != 0.0) {
    const double ratio = c.values[row] / truth.values[row];
    for (double f : {10.0, 100.0, 1000.0}) {
      if (std::abs(ratio - f) <= 1e-9 * f) return ErrorType::kScaling;
    }
  }
  return ErrorType::kGaussianNoise;
}

}  // namespace comet

#pragma once

#include <vector>

#include "comet/tabular.hpp"

namespace comet::testing {

inline Feature numeric_feature(std::string name, std::vector<double> values) {
  Feature f;
  f.name = std::move(name);
  f.kind = FeatureKind::kNumerical;
  f.cells.missing.assign(values.size(), 0);
  f.cells.provenance.assign(values.size(), Provenance::kClean);
  f.cells.values = std::move(values);
  return f;
}

inline Feature categorical_feature(std::string name, std::vector<std::string> categories,
                                   std::vector<double> codes) {
  Feature f;
  f.name = std::move(name);
  f.kind = FeatureKind::kCategorical;
  f.categories = std::move(categories);
  f.cells.missing.assign(codes.size(), 0);
  f.cells.provenance.assign(codes.size(), Provenance::kClean);
  f.cells.values = std::move(codes);
  return f;
}

inline Dataset binary_dataset(std::vector<Feature> features, std::vector<int> labels) {
  return Dataset(std::move(features), "y", {"0", "1"}, std::move(labels));
}

}  // namespace comet::testing

#include "comet/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "comet/rng.hpp"

namespace comet {

Dataset::Dataset(std::vector<Feature> features, std::string label_name,
                 std::vector<std::string> classes, std::vector<int> labels)
    : features_(std::move(features)),
      label_name_(std::move(label_name)),
      classes_(std::move(classes)),
      labels_(std::move(labels)) {
  positive_class_ = classes_.size() >= 2 ? 1 : 0;
  for (const Feature& f : features_) {
    if (f.cells.values.size() != labels_.size() || f.cells.missing.size() != labels_.size() ||
        f.cells.provenance.size() != labels_.size()) {
      throw ShapeMismatchError("feature '" + f.name + "' has " +
                               std::to_string(f.cells.values.size()) + " cells, expected " +
                               std::to_string(labels_.size()));
    }
  }
  std::vector<std::size_t> all(labels_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  split_.train = std::move(all);
}

std::optional<FeatureId> Dataset::find_feature(std::string_view name) const {
  for (FeatureId f = 0; f < features_.size(); ++f) {
    if (features_[f].name == name) return f;
  }
  return std::nullopt;
}

void Dataset::set_positive_class(int c) {
  if (c < 0 || c >= num_classes()) throw InvalidArgument("positive class out of range");
  positive_class_ = c;
}

void Dataset::set_split(Split split) {
  std::vector<std::uint8_t> seen(num_rows(), 0);
  for (const auto* rows : {&split.train, &split.test}) {
    for (std::size_t r : *rows) {
      if (r >= num_rows()) throw InvalidArgument("split row index out of range");
      if (seen[r]++) throw InvalidArgument("split parts overlap or repeat row " + std::to_string(r));
    }
  }
  if (split.train.size() + split.test.size() != num_rows()) {
    throw InvalidArgument("split does not cover all rows");
  }
  split_ = std::move(split);
}

void Dataset::capture_truth() {
  std::vector<TruthColumn> truth;
  truth.reserve(features_.size());
  for (const Feature& f : features_) {
    truth.push_back({f.cells.values, f.cells.missing,
                     std::vector<std::optional<ErrorType>>(f.cells.size())});
  }
  truth_ = std::move(truth);
}

void Dataset::set_truth(std::vector<TruthColumn> truth) {
  if (truth.size() != features_.size()) throw ShapeMismatchError("truth store column count");
  for (const TruthColumn& t : truth) {
    if (t.values.size() != num_rows() || t.missing.size() != num_rows() ||
        t.error.size() != num_rows()) {
      throw ShapeMismatchError("truth store row count");
    }
  }
  truth_ = std::move(truth);
}

std::size_t Dataset::dirty_count(FeatureId f) const {
  const ColumnData& c = features_.at(f).cells;
  return static_cast<std::size_t>(std::count_if(c.provenance.begin(), c.provenance.end(),
                                                [](Provenance p) { return p != Provenance::kClean; }));
}

std::size_t Dataset::dirty_count() const {
  std::size_t total = 0;
  for (FeatureId f = 0; f < features_.size(); ++f) total += dirty_count(f);
  return total;
}

void Dataset::validate() const {
  const std::size_t n = num_rows();
  for (int y : labels_) {
    if (y < 0 || y >= num_classes()) throw Error("label code out of range");
  }
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto* rows : {&split_.train, &split_.test}) {
    for (std::size_t r : *rows) {
      if (r >= n || seen[r]++) throw Error("split is not a partition of the rows");
    }
  }
  if (split_.train.size() + split_.test.size() != n) throw Error("split does not cover all rows");

  for (FeatureId f = 0; f < features_.size(); ++f) {
    const Feature& feat = features_[f];
    const ColumnData& c = feat.cells;
    if (c.values.size() != n || c.missing.size() != n || c.provenance.size() != n) {
      throw Error("feature '" + feat.name + "' length differs from label vector");
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (c.missing[r]) continue;
      if (!std::isfinite(c.values[r])) throw Error("non-finite value in '" + feat.name + "'");
      if (feat.categorical()) {
        const double v = c.values[r];
        if (v != std::floor(v) || v < 0 || v >= feat.category_count()) {
          throw Error("category code out of range in '" + feat.name + "'");
        }
      }
    }
    if (truth_) {
      const TruthColumn& t = (*truth_)[f];
      for (std::size_t r = 0; r < n; ++r) {
        if (c.is_dirty(r)) continue;
        const bool same = c.missing[r] == t.missing[r] && (c.missing[r] || c.values[r] == t.values[r]);
        if (!same) {
          throw Error("clean cell differs from truth in '" + feat.name + "' row " + std::to_string(r));
        }
      }
    }
  }
}

Snapshot snapshot(const Dataset& data) {
  Snapshot snap;
  snap.rows = data.num_rows();
  for (const Feature& f : data.features()) {
    snap.feature_names.push_back(f.name);
    snap.columns.push_back(f.cells);
  }
  if (data.has_truth()) snap.truth = data.truth();
  return snap;
}

void restore(Dataset& data, const Snapshot& snap) {
  if (snap.rows != data.num_rows() || snap.columns.size() != data.num_features()) {
    throw ShapeMismatchError("snapshot shape " + std::to_string(snap.rows) + "x" +
                             std::to_string(snap.columns.size()) + " does not match dataset " +
                             std::to_string(data.num_rows()) + "x" +
                             std::to_string(data.num_features()));
  }
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    if (snap.feature_names[f] != data.feature(f).name) {
      throw ShapeMismatchError("snapshot column '" + snap.feature_names[f] + "' does not match '" +
                               data.feature(f).name + "'");
    }
  }
  for (FeatureId f = 0; f < data.num_features(); ++f) data.mutable_cells(f) = snap.columns[f];
  if (snap.truth) data.set_truth(*snap.truth);
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    const std::uint64_t n = v.size();
    bytes(&n, sizeof n);
    if (!v.empty()) bytes(v.data(), v.size() * sizeof(T));
  }
};

}  // namespace

std::uint64_t fingerprint(const Dataset& data) {
  Fnv1a h;
  for (const Feature& f : data.features()) {
    h.bytes(f.name.data(), f.name.size());
    h.vec(f.cells.values);
    h.vec(f.cells.missing);
    h.vec(f.cells.provenance);
  }
  h.vec(data.labels());
  h.vec(data.split().train);
  h.vec(data.split().test);
  return h.h;
}

Split stratified_split(std::span<const int> labels, int num_classes, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    by_class.at(static_cast<std::size_t>(labels[r])).push_back(r);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (by_class[c].size() < 2) {
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) +
                                " row(s); stratification needs at least 2");
    }
  }

  // Largest-remainder allocation so the test total is round(n * fraction).
  const std::size_t n = labels.size();
  const auto target = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 0.5));
  std::vector<std::size_t> take(num_classes);
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double exact = static_cast<double>(by_class[c].size()) * test_fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i, ++assigned) {
    ++take[remainders[i].second];
  }
  for (int c = 0; c < num_classes; ++c) {
    take[c] = std::clamp<std::size_t>(take[c], 1, by_class[c].size() - 1);
  }

  Split out;
  Rng rng(seed);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> rows = by_class[c];
    rng.shuffle(rows);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<long>(take[c]));
    out.train.insert(out.train.end(), rows.begin() + static_cast<long>(take[c]), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void split(Dataset& data, double test_fraction, std::uint64_t seed) {
  data.set_split(stratified_split(data.labels(), data.num_classes(), test_fraction, seed));
}

}  // namespace comet

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comet/types.hpp"

namespace comet {

// Mutable cell state of one column. Categorical values hold the category
// code as an exact small integer; the value under a missing flag is ignored.
struct ColumnData {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  std::vector<Provenance> provenance;

  std::size_t size() const { return values.size(); }
  bool is_dirty(std::size_t row) const { return provenance[row] != Provenance::kClean; }
  bool operator==(const ColumnData&) const = default;
};

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  std::vector<std::string> categories;  // categorical only, frozen after ingestion
  ColumnData cells;

  bool categorical() const { return kind == FeatureKind::kCategorical; }
  int category_count() const { return static_cast<int>(categories.size()); }
  bool operator==(const Feature&) const = default;
};

// Original values of every cell, present in simulation mode only.
struct TruthColumn {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  // Error type that last dirtied each cell, when known.
  std::vector<std::optional<ErrorType>> error;

  bool operator==(const TruthColumn&) const = default;
};

enum class SplitPart { kTrain, kTest };

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  const std::vector<std::size_t>& rows(SplitPart part) const {
    return part == SplitPart::kTrain ? train : test;
  }
  bool operator==(const Split&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Feature> features, std::string label_name, std::vector<std::string> classes,
          std::vector<int> labels);

  std::size_t num_rows() const { return labels_.size(); }
  std::size_t num_features() const { return features_.size(); }
  int num_classes() const { return static_cast<int>(classes_.size()); }

  const std::vector<Feature>& features() const { return features_; }
  const Feature& feature(FeatureId f) const { return features_.at(f); }
  std::optional<FeatureId> find_feature(std::string_view name) const;
  ColumnData& mutable_cells(FeatureId f) { return features_.at(f).cells; }

  const std::string& label_name() const { return label_name_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<int>& labels() const { return labels_; }
  int positive_class() const { return positive_class_; }
  void set_positive_class(int c);

  const Split& split() const { return split_; }
  void set_split(Split split);

  bool has_truth() const { return truth_.has_value(); }
  const std::vector<TruthColumn>& truth() const { return *truth_; }
  std::vector<TruthColumn>& mutable_truth() { return *truth_; }
  // Records the current cell values as ground truth.
  void capture_truth();
  void set_truth(std::vector<TruthColumn> truth);
  void drop_truth() { truth_.reset(); }

  std::size_t dirty_count(FeatureId f) const;
  std::size_t dirty_count() const;
  bool all_clean() const { return dirty_count() == 0; }

  // Throws Error describing the first violated invariant.
  void validate() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Feature> features_;
  std::string label_name_;
  std::vector<std::string> classes_;
  std::vector<int> labels_;
  int positive_class_ = 1;
  Split split_;
  std::optional<std::vector<TruthColumn>> truth_;
};

// Read-only view of a dataset with at most one column replaced by an
// overlay. Polluted states are evaluated through views so the base
// dataset is never copied.
class TableView {
 public:
  TableView(const Dataset& data) : data_(&data) {}  // NOLINT(google-explicit-constructor)
  TableView(const Dataset& data, FeatureId overlay_feature, const ColumnData& overlay)
      : data_(&data), overlay_feature_(overlay_feature), overlay_(&overlay) {}

  const Dataset& dataset() const { return *data_; }
  const ColumnData& cells(FeatureId f) const {
    return (overlay_ != nullptr && f == overlay_feature_) ? *overlay_ : data_->feature(f).cells;
  }

 private:
  const Dataset* data_;
  FeatureId overlay_feature_ = 0;
  const ColumnData* overlay_ = nullptr;
};

struct Snapshot {
  std::vector<std::string> feature_names;
  std::size_t rows = 0;
  std::vector<ColumnData> columns;
  std::optional<std::vector<TruthColumn>> truth;
};

Snapshot snapshot(const Dataset& data);
void restore(Dataset& data, const Snapshot& snap);

// 64-bit FNV-1a over the mutable state; equal datasets hash equally.
std::uint64_t fingerprint(const Dataset& data);

struct ColumnSchema {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  std::vector<std::string> categories;  // optional seed for the category set
};

struct Schema {
  std::string label;
  std::vector<ColumnSchema> columns;
  std::vector<std::string> missing_tokens = {""};
  std::vector<std::string> classes;  // optional declared label set
  std::optional<std::string> positive_class;
};

Schema parse_schema(std::string_view json_text);
Schema load_schema(const std::filesystem::path& path);

Dataset read_csv(std::istream& in, const Schema& schema);
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
void write_csv(const Dataset& data, std::ostream& out, const std::string& missing_token = "");

// Splits one CSV record (RFC 4180). Exposed for tests.
std::vector<std::string> parse_csv_record(std::istream& in, bool& ok, std::size_t& line);

// Stratified split; the same seed yields the same partition.
Split stratified_split(std::span<const int> labels, int num_classes, double test_fraction,
                       std::uint64_t seed);
void split(Dataset& data, double test_fraction, std::uint64_t seed);

class StratificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace comet

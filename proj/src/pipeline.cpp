#include <cmath>
#include <limits>

#include "comet/models.hpp"

namespace comet {

Pipeline Pipeline::fit(const TableView& view, std::span<const std::size_t> rows) {
  const Dataset& data = view.dataset();
  Pipeline p;
  std::size_t offset = 0;
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    const Feature& feat = data.feature(f);
    const ColumnData& cells = view.cells(f);
    Column col;
    col.name = feat.name;
    col.kind = feat.kind;
    col.offset = offset;
    if (!feat.categorical()) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t r : rows) {
        if (cells.missing[r]) continue;
        sum += cells.values[r];
        ++n;
      }
      const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
      double ss = 0.0;
      for (std::size_t r : rows) {
        if (cells.missing[r]) continue;
        ss += (cells.values[r] - mean) * (cells.values[r] - mean);
      }
      const double sd = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
      col.numeric = {mean, sd > 1e-12 ? sd : 1.0};
      offset += 1;
    } else {
      std::vector<std::uint8_t> seen(static_cast<std::size_t>(feat.category_count()), 0);
      for (std::size_t r : rows) {
        if (!cells.missing[r]) seen[static_cast<std::size_t>(cells.values[r])] = 1;
      }
      CategoricalColumn& cat = col.categorical;
      cat.slot_of_code.assign(seen.size(), -1);
      int width = 0;
      for (std::size_t c = 0; c < seen.size(); ++c) {
        if (seen[c]) cat.slot_of_code[c] = width++;
      }
      cat.missing_slot = width++;
      cat.width = width;
      offset += static_cast<std::size_t>(width);
    }
    p.columns_.push_back(std::move(col));
  }
  p.output_dim_ = offset;
  return p;
}

void Pipeline::encode_cell(const Column& col, double value, bool missing, double* out) const {
  if (col.kind == FeatureKind::kNumerical) {
    *out = missing ? 0.0 : (value - col.numeric.mean) / col.numeric.scale;
    return;
  }
  const CategoricalColumn& cat = col.categorical;
  for (int s = 0; s < cat.width; ++s) out[s] = 0.0;
  if (missing) {
    out[cat.missing_slot] = 1.0;
    return;
  }
  const auto code = static_cast<long>(value);
  if (code >= 0 && code < static_cast<long>(cat.slot_of_code.size())) {
    const int slot = cat.slot_of_code[static_cast<std::size_t>(code)];
    if (slot >= 0) out[slot] = 1.0;
  }
}

Eigen::MatrixXd Pipeline::transform(const TableView& view, std::span<const std::size_t> rows) const {
  check_schema(view.dataset());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(output_dim_));
  std::vector<double> buffer(output_dim_);
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const Column& col = columns_[f];
    const ColumnData& cells = view.cells(f);
    const int width = col.kind == FeatureKind::kNumerical ? 1 : col.categorical.width;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      encode_cell(col, cells.values[r], cells.missing[r] != 0, buffer.data());
      for (int s = 0; s < width; ++s) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col.offset) + s) = buffer[static_cast<std::size_t>(s)];
      }
    }
  }
  return out;
}

Eigen::MatrixXd Pipeline::transform_raw(const Eigen::MatrixXd& raw) const {
  if (static_cast<std::size_t>(raw.cols()) != columns_.size()) {
    throw SchemaMismatchError("raw rows have " + std::to_string(raw.cols()) + " columns, pipeline expects " +
                              std::to_string(columns_.size()));
  }
  Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(output_dim_));
  std::vector<double> buffer(output_dim_);
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const Column& col = columns_[f];
    const int width = col.kind == FeatureKind::kNumerical ? 1 : col.categorical.width;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const double v = raw(i, static_cast<Eigen::Index>(f));
      encode_cell(col, v, std::isnan(v), buffer.data());
      for (int s = 0; s < width; ++s) {
        out(i, static_cast<Eigen::Index>(col.offset) + s) = buffer[static_cast<std::size_t>(s)];
      }
    }
  }
  return out;
}

void Pipeline::check_schema(const Dataset& data) const {
  if (data.num_features() != columns_.size()) {
    throw SchemaMismatchError("dataset has " + std::to_string(data.num_features()) +
                              " features, model was trained on " + std::to_string(columns_.size()));
  }
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const Feature& feat = data.feature(f);
    if (feat.name != columns_[f].name || feat.kind != columns_[f].kind) {
      throw SchemaMismatchError("feature '" + feat.name + "' does not match training column '" +
                                columns_[f].name + "'");
    }
  }
}

}  // namespace comet

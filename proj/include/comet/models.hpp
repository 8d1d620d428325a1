#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/metrics.hpp"
#include "comet/rng.hpp"
#include "comet/tabular.hpp"

namespace comet {

enum class Algorithm {
  kKnn,
  kLogisticRegression,
  kLinearSvm,
  kGradientBoosting,
  kMlp,
  kLinearRegressionClassifier,
};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

// Whether per-record loss gradients are available (the ActiveClean role).
bool supports_gradients(Algorithm algorithm);

struct ModelSpec {
  Algorithm algorithm = Algorithm::kLogisticRegression;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  // Hyperparameter value, or the algorithm default when unset.
  double param(const std::string& name) const;
  bool operator==(const ModelSpec&) const = default;
};

// Throws InvalidArgument when a hyperparameter lies outside the search space.
void validate(const ModelSpec& spec);

// Draws one spec uniformly from the algorithm's search space.
ModelSpec sample_spec(Algorithm algorithm, Rng& rng);

class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};
class SchemaMismatchError : public Error {
 public:
  using Error::Error;
};
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Imputation, one-hot encoding and standardization, fitted on train rows.
// Numerical cells become (x - mean) / std with missing cells imputed to
// the mean. Categorical cells become a one-hot block over the categories
// seen in training plus a dedicated missing slot; unseen categories map to
// an all-zero block.
class Pipeline {
 public:
  static Pipeline fit(const TableView& view, std::span<const std::size_t> rows);

  std::size_t input_features() const { return columns_.size(); }
  std::size_t output_dim() const { return output_dim_; }

  Eigen::MatrixXd transform(const TableView& view, std::span<const std::size_t> rows) const;
  // Raw rows hold one column per feature; NaN marks a missing cell.
  Eigen::MatrixXd transform_raw(const Eigen::MatrixXd& raw) const;

  void check_schema(const Dataset& data) const;

  struct NumericColumn {
    double mean = 0.0;
    double scale = 1.0;
  };
  struct CategoricalColumn {
    std::vector<int> slot_of_code;  // -1 for categories not seen in training
    int missing_slot = 0;
    int width = 0;
  };
  struct Column {
    std::string name;
    FeatureKind kind = FeatureKind::kNumerical;
    std::size_t offset = 0;
    NumericColumn numeric;
    CategoricalColumn categorical;
  };
  const std::vector<Column>& columns() const { return columns_; }

 private:
  void encode_cell(const Column& col, double value, bool missing, double* out) const;

  std::vector<Column> columns_;
  std::size_t output_dim_ = 0;
};

// A classifier over encoded rows.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) = 0;
  // n x num_classes; the predicted label is the row-wise argmax.
  virtual Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const = 0;
  int num_classes() const { return num_classes_; }

 protected:
  int num_classes_ = 0;
};

enum class LinearLoss { kLogistic, kHinge, kSquared };

// Linear model with one-vs-rest blocks for multiclass labels. Each block b
// owns parameters (w_1..w_p, bias) in column b of `weights()`.
class LinearClassifier : public Classifier {
 public:
  LinearClassifier(LinearLoss loss, double regularization, std::uint64_t seed)
      : loss_(loss), regularization_(regularization), seed_(seed) {}

  void fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) override;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const override;

  LinearLoss loss() const { return loss_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  void set_weights(Eigen::MatrixXd weights, int num_classes);
  int blocks() const { return static_cast<int>(weights_.cols()); }
  // Raw linear outputs, n x blocks.
  Eigen::MatrixXd decision(const Eigen::MatrixXd& x) const;

  // Gradient of the unregularized per-record loss, blocks concatenated.
  Eigen::VectorXd record_gradient(const Eigen::VectorXd& x, int label) const;
  double record_loss(const Eigen::VectorXd& x, int label) const;

 private:
  Eigen::VectorXd fit_block(const Eigen::MatrixXd& x, const Eigen::VectorXd& target) const;

  LinearLoss loss_;
  double regularization_;
  std::uint64_t seed_;
  Eigen::MatrixXd weights_;  // (p + 1) x blocks
};

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec);

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, Pipeline pipeline, std::shared_ptr<const Classifier> classifier,
               std::uint64_t train_fingerprint)
      : spec_(std::move(spec)),
        pipeline_(std::move(pipeline)),
        classifier_(std::move(classifier)),
        train_fingerprint_(train_fingerprint) {}

  const ModelSpec& spec() const { return spec_; }
  const Pipeline& pipeline() const { return pipeline_; }
  const Classifier& classifier() const { return *classifier_; }
  std::uint64_t train_fingerprint() const { return train_fingerprint_; }

  std::vector<int> predict(const TableView& view, std::span<const std::size_t> rows) const;
  Eigen::MatrixXd scores(const TableView& view, std::span<const std::size_t> rows) const;
  Eigen::MatrixXd scores_raw(const Eigen::MatrixXd& raw) const;

 private:
  ModelSpec spec_;
  Pipeline pipeline_;
  std::shared_ptr<const Classifier> classifier_;
  std::uint64_t train_fingerprint_;
};

TrainedModel fit(const ModelSpec& spec, const TableView& view, std::span<const std::size_t> rows);
inline TrainedModel fit(const ModelSpec& spec, const TableView& view) {
  return fit(spec, view, view.dataset().split().train);
}
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

// Fit on the train split and score F1 on the test split.
double measure_f1(const ModelSpec& spec, const TableView& view);

struct SearchCandidate {
  ModelSpec spec;
  double holdout_f1 = -1.0;  // -1 when the candidate failed to fit
};

struct SearchResult {
  ModelSpec best;
  std::vector<SearchCandidate> candidates;
};

// Random hyperparameter search scored by F1 on a stratified 80/20 holdout
// of `rows`. Ties go to the earlier draw.
SearchResult random_search(Algorithm algorithm, const TableView& view, std::span<const std::size_t> rows,
                           int n_samples, std::uint64_t seed);
inline SearchResult random_search(Algorithm algorithm, const TableView& view, int n_samples,
                                  std::uint64_t seed) {
  return random_search(algorithm, view, view.dataset().split().train, n_samples, seed);
}

// Per-record loss gradient at the fitted parameters: log-loss, hinge
// subgradient or squared loss depending on the algorithm.
Eigen::VectorXd per_record_gradient(const TrainedModel& model, const TableView& view, std::size_t row);
Eigen::VectorXd per_record_gradient(const TrainedModel& model, const Eigen::VectorXd& encoded, int label);

}  // namespace comet

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "comet/models.hpp"

namespace comet::detail {

class KnnClassifier : public Classifier {
 public:
  explicit KnnClassifier(int k) : k_(k) {}
  void fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) override;
  // Vote fractions; ties in the vote go to the lower class index.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const override;

 private:
  int k_;
  Eigen::MatrixXd x_;
  std::vector<int> y_;
};

struct BoostingParams {
  int depth = 2;
  int rounds = 100;
  double learning_rate = 0.1;
  double lambda = 1.0;
  int max_bins = 64;
};

// Histogram gradient boosting with second-order leaf values. Binary labels
// use one logistic tree per round, multiclass one softmax tree per class.
class GradientBoostingClassifier : public Classifier {
 public:
  explicit GradientBoostingClassifier(BoostingParams params) : params_(params) {}
  void fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) override;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const override;

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

 private:
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const;

  BoostingParams params_;
  int outputs_ = 1;
  Eigen::VectorXd base_;
  std::vector<std::vector<Tree>> trees_;  // [round][output]
};

struct MlpParams {
  int hidden = 32;
  double learning_rate = 1e-3;
  double alpha = 1e-4;
  int epochs = 60;
  int batch = 32;
  std::uint64_t seed = 0;
};

// One hidden ReLU layer, softmax output, Adam.
class MlpClassifier : public Classifier {
 public:
  explicit MlpClassifier(MlpParams params) : params_(params) {}
  void fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) override;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const override;

 private:
  MlpParams params_;
  Eigen::MatrixXd w1_, w2_;
  Eigen::RowVectorXd b1_, b2_;
};

}  // namespace comet::detail

#include <algorithm>
#include <numeric>

#include "learners.hpp"

namespace comet::detail {

void KnnClassifier::fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) {
  num_classes_ = num_classes;
  x_ = x;
  y_.assign(y.begin(), y.end());
}

Eigen::MatrixXd KnnClassifier::scores(const Eigen::MatrixXd& x) const {
  const auto n = static_cast<std::size_t>(x_.rows());
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), num_classes_);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = {(x_.row(static_cast<Eigen::Index>(j)) - x.row(i)).squaredNorm(), j};
    }
    // Equal distances resolve to the earlier training row.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) out(i, y_[dist[j].second]) += 1.0 / static_cast<double>(k);
  }
  return out;
}

}  // namespace comet::detail

#include <cmath>
#include <numeric>

#include "learners.hpp"

namespace comet::detail {

namespace {

struct Adam {
  Eigen::MatrixXd m, v;
  explicit Adam(const Eigen::MatrixXd& shape)
      : m(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())), v(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr, int t) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
};

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
}

}  // namespace

void MlpClassifier::fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) {
  num_classes_ = num_classes;
  const Eigen::Index p = x.cols(), h = params_.hidden, k = num_classes;
  Rng rng(params_.seed);
  // Glorot-uniform initialization.
  const double l1 = std::sqrt(6.0 / static_cast<double>(p + h));
  const double l2 = std::sqrt(6.0 / static_cast<double>(h + k));
  w1_.resize(p, h);
  w2_.resize(h, k);
  for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = rng.uniform(-l1, l1);
  for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = rng.uniform(-l2, l2);
  b1_ = Eigen::RowVectorXd::Zero(h);
  b2_ = Eigen::RowVectorXd::Zero(k);

  Eigen::MatrixXd b1m = b1_, b2m = b2_;
  Adam aw1(w1_), aw2(w2_), ab1(b1m), ab2(b2m);
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  int t = 0;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(params_.batch)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(params_.batch));
      const auto m = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(m, p);
      Eigen::MatrixXd yb = Eigen::MatrixXd::Zero(m, k);
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t r = order[start + static_cast<std::size_t>(i)];
        xb.row(i) = x.row(static_cast<Eigen::Index>(r));
        yb(i, y[r]) = 1.0;
      }
      Eigen::MatrixXd a = (xb * w1_).rowwise() + b1_;
      const Eigen::MatrixXd mask = (a.array() > 0.0).cast<double>();
      a = a.cwiseMax(0.0);
      Eigen::MatrixXd out = (a * w2_).rowwise() + b2_;
      softmax_rows(out);

      const Eigen::MatrixXd d2 = (out - yb) / static_cast<double>(m);
      const Eigen::MatrixXd gw2 = a.transpose() * d2 + params_.alpha * w2_;
      const Eigen::MatrixXd gb2 = d2.colwise().sum();
      const Eigen::MatrixXd d1 = (d2 * w2_.transpose()).cwiseProduct(mask);
      const Eigen::MatrixXd gw1 = xb.transpose() * d1 + params_.alpha * w1_;
      const Eigen::MatrixXd gb1 = d1.colwise().sum();
      ++t;
      aw1.step(w1_, gw1, params_.learning_rate, t);
      aw2.step(w2_, gw2, params_.learning_rate, t);
      ab1.step(b1m, gb1, params_.learning_rate, t);
      ab2.step(b2m, gb2, params_.learning_rate, t);
      b1_ = b1m;
      b2_ = b2m;
    }
  }
}

Eigen::MatrixXd MlpClassifier::scores(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd a = ((x * w1_).rowwise() + b1_).cwiseMax(0.0);
  Eigen::MatrixXd out = (a * w2_).rowwise() + b2_;
  softmax_rows(out);
  return out;
}

}  // namespace comet::detail

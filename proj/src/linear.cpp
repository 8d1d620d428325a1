#include <algorithm>
#include <cmath>
#include <numeric>

#include "comet/models.hpp"

namespace comet {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::MatrixXd augment(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.leftCols(x.cols()) = x;
  a.col(x.cols()).setOnes();
  return a;
}

// Penalty mask: the bias is not regularized.
Eigen::VectorXd penalty_mask(Eigen::Index dim) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(dim);
  d(dim - 1) = 0.0;
  return d;
}

double logistic_objective(const Eigen::MatrixXd& xa, const Eigen::VectorXd& t, const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& mask, double lambda) {
  const Eigen::VectorXd z = xa * theta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - t(i) * z(i);
  return loss + 0.5 * lambda * theta.cwiseProduct(mask).squaredNorm();
}

// Newton's method with backtracking on the L2-penalized log-loss.
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& xa, const Eigen::VectorXd& t, double lambda) {
  const Eigen::Index dim = xa.cols();
  const Eigen::VectorXd mask = penalty_mask(dim);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  double objective = logistic_objective(xa, t, theta, mask, lambda);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd z = xa * theta;
    Eigen::VectorXd p(z.size()), w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      p(i) = sigmoid(z(i));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
    }
    const Eigen::VectorXd grad = xa.transpose() * (p - t) + lambda * theta.cwiseProduct(mask);
    Eigen::MatrixXd hess = xa.transpose() * w.asDiagonal() * xa;
    hess.diagonal() += lambda * mask + Eigen::VectorXd::Constant(dim, 1e-9);
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double rate = 1.0;
    Eigen::VectorXd candidate = theta - step;
    double next = logistic_objective(xa, t, candidate, mask, lambda);
    while (next > objective && rate > 1e-10) {
      rate *= 0.5;
      candidate = theta - rate * step;
      next = logistic_objective(xa, t, candidate, mask, lambda);
    }
    if (next > objective) break;
    const double change = (candidate - theta).lpNorm<Eigen::Infinity>();
    theta = candidate;
    const double improvement = objective - next;
    objective = next;
    if (change < 1e-10 || improvement <= 1e-14 * (1.0 + std::abs(objective))) break;
  }
  return theta;
}

// Dual coordinate descent for the L1-loss linear SVM
//   min 0.5 |theta|^2 + C sum max(0, 1 - s_i theta.x_i)
// with the bias carried as a constant feature.
Eigen::VectorXd fit_hinge(const Eigen::MatrixXd& xa, const Eigen::VectorXd& t, double c, std::uint64_t seed) {
  const Eigen::Index n = xa.rows();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(xa.cols());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = xa.row(i).squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  for (int epoch = 0; epoch < 5000; ++epoch) {
    rng.shuffle(order);
    double max_pg = -1e300, min_pg = 1e300;
    for (Eigen::Index i : order) {
      if (q(i) <= 0.0) continue;
      const double s = t(i) > 0.5 ? 1.0 : -1.0;
      const double g = s * xa.row(i).dot(theta) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha(i) >= c) {
        pg = std::max(g, 0.0);
      }
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (std::abs(pg) > 1e-14) {
        const double old = alpha(i);
        alpha(i) = std::clamp(old - g / q(i), 0.0, c);
        theta += (alpha(i) - old) * s * xa.row(i).transpose();
      }
    }
    if (max_pg - min_pg < 1e-7) break;
  }
  return theta;
}

Eigen::VectorXd fit_squared(const Eigen::MatrixXd& xa, const Eigen::VectorXd& t, double lambda) {
  const Eigen::Index dim = xa.cols();
  Eigen::MatrixXd gram = xa.transpose() * xa;
  gram.diagonal() += lambda * penalty_mask(dim) + Eigen::VectorXd::Constant(dim, 1e-9);
  return gram.ldlt().solve(xa.transpose() * t);
}

}  // namespace

Eigen::VectorXd LinearClassifier::fit_block(const Eigen::MatrixXd& xa, const Eigen::VectorXd& target) const {
  switch (loss_) {
    case LinearLoss::kLogistic:
      return fit_logistic(xa, target, regularization_);
    case LinearLoss::kHinge:
      return fit_hinge(xa, target, regularization_, seed_);
    case LinearLoss::kSquared:
      return fit_squared(xa, target, regularization_);
  }
  return {};
}

void LinearClassifier::fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) {
  num_classes_ = num_classes;
  const Eigen::MatrixXd xa = augment(x);
  const int blocks = num_classes <= 2 ? 1 : num_classes;
  weights_.resize(xa.cols(), blocks);
  for (int b = 0; b < blocks; ++b) {
    const int positive = blocks == 1 ? 1 : b;
    Eigen::VectorXd target(xa.rows());
    for (Eigen::Index i = 0; i < xa.rows(); ++i) target(i) = y[static_cast<std::size_t>(i)] == positive ? 1.0 : 0.0;
    weights_.col(b) = fit_block(xa, target);
  }
}

void LinearClassifier::set_weights(Eigen::MatrixXd weights, int num_classes) {
  weights_ = std::move(weights);
  num_classes_ = num_classes;
}

Eigen::MatrixXd LinearClassifier::decision(const Eigen::MatrixXd& x) const {
  return x * weights_.topRows(weights_.rows() - 1) +
         Eigen::VectorXd::Ones(x.rows()) * weights_.row(weights_.rows() - 1);
}

Eigen::MatrixXd LinearClassifier::scores(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = decision(x);
  auto link = [&](double v) { return loss_ == LinearLoss::kLogistic ? sigmoid(v) : v; };
  if (blocks() == 1) {
    Eigen::MatrixXd s(x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = link(z(i, 0));
      s(i, 1) = v;
      // Complement chosen so argmax matches each loss's decision threshold.
      s(i, 0) = loss_ == LinearLoss::kHinge ? -v : 1.0 - v;
    }
    return s;
  }
  return z.unaryExpr(link);
}

Eigen::VectorXd LinearClassifier::record_gradient(const Eigen::VectorXd& x, int label) const {
  const Eigen::Index dim = weights_.rows();
  Eigen::VectorXd xa(dim);
  xa.head(dim - 1) = x;
  xa(dim - 1) = 1.0;
  Eigen::VectorXd grad(dim * blocks());
  for (int b = 0; b < blocks(); ++b) {
    const double t = label == (blocks() == 1 ? 1 : b) ? 1.0 : 0.0;
    const double z = xa.dot(weights_.col(b));
    double coef = 0.0;
    switch (loss_) {
      case LinearLoss::kLogistic:
        coef = sigmoid(z) - t;
        break;
      case LinearLoss::kHinge: {
        const double s = t > 0.5 ? 1.0 : -1.0;
        coef = s * z < 1.0 ? -s : 0.0;
        break;
      }
      case LinearLoss::kSquared:
        coef = z - t;
        break;
    }
    grad.segment(b * dim, dim) = coef * xa;
  }
  return grad;
}

double LinearClassifier::record_loss(const Eigen::VectorXd& x, int label) const {
  const Eigen::Index dim = weights_.rows();
  double loss = 0.0;
  for (int b = 0; b < blocks(); ++b) {
    const double t = label == (blocks() == 1 ? 1 : b) ? 1.0 : 0.0;
    const double z = x.dot(weights_.col(b).head(dim - 1)) + weights_(dim - 1, b);
    switch (loss_) {
      case LinearLoss::kLogistic:
        loss += softplus(z) - t * z;
        break;
      case LinearLoss::kHinge:
        loss += std::max(0.0, 1.0 - (t > 0.5 ? 1.0 : -1.0) * z);
        break;
      case LinearLoss::kSquared:
        loss += 0.5 * (z - t) * (z - t);
        break;
    }
  }
  return loss;
}

}  // namespace comet

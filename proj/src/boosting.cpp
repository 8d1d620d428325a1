#include <algorithm>
#include <cmath>

#include "learners.hpp"

namespace comet::detail {

namespace {

struct Binned {
  std::vector<std::vector<double>> thresholds;  // per feature, ascending
  std::vector<std::vector<std::uint8_t>> bin;   // per feature, per row
};

Binned bin_features(const Eigen::MatrixXd& x, int max_bins) {
  Binned b;
  const auto p = static_cast<std::size_t>(x.cols());
  b.thresholds.resize(p);
  b.bin.resize(p);
  for (std::size_t f = 0; f < p; ++f) {
    std::vector<double> v(x.col(static_cast<Eigen::Index>(f)).data(),
                          x.col(static_cast<Eigen::Index>(f)).data() + x.rows());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double>& t = b.thresholds[f];
    if (static_cast<int>(v.size()) <= max_bins) {
      for (std::size_t i = 0; i + 1 < v.size(); ++i) t.push_back(0.5 * (v[i] + v[i + 1]));
    } else {
      for (int q = 1; q < max_bins; ++q) {
        const std::size_t i = v.size() * static_cast<std::size_t>(q) / static_cast<std::size_t>(max_bins);
        const double cut = 0.5 * (v[i - 1] + v[i]);
        if (t.empty() || cut > t.back()) t.push_back(cut);
      }
    }
    b.bin[f].resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double value = x(r, static_cast<Eigen::Index>(f));
      b.bin[f][static_cast<std::size_t>(r)] =
          static_cast<std::uint8_t>(std::lower_bound(t.begin(), t.end(), value) - t.begin());
    }
  }
  return b;
}

class TreeBuilder {
 public:
  TreeBuilder(const Binned& binned, const std::vector<double>& g, const std::vector<double>& h,
              const BoostingParams& params)
      : binned_(binned), g_(g), h_(h), params_(params) {}

  GradientBoostingClassifier::Tree build(std::vector<std::size_t> rows) {
    tree_.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  double leaf_value(double g, double h) const { return -g / (h + params_.lambda); }
  double term(double g, double h) const { return g * g / (h + params_.lambda); }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree_.size());
    tree_.emplace_back();
    double gs = 0.0, hs = 0.0;
    for (std::size_t r : rows) {
      gs += g_[r];
      hs += h_[r];
    }
    tree_[static_cast<std::size_t>(id)].value = leaf_value(gs, hs);
    if (depth >= params_.depth || rows.size() < 2) return id;

    double best_gain = 1e-12;
    int best_feature = -1;
    std::size_t best_bin = 0;
    const double parent = term(gs, hs);
    for (std::size_t f = 0; f < binned_.thresholds.size(); ++f) {
      const std::size_t bins = binned_.thresholds[f].size() + 1;
      if (bins < 2) continue;
      std::vector<double> hg(bins, 0.0), hh(bins, 0.0);
      std::vector<std::size_t> hc(bins, 0);
      for (std::size_t r : rows) {
        const std::uint8_t b = binned_.bin[f][r];
        hg[b] += g_[r];
        hh[b] += h_[r];
        ++hc[b];
      }
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < bins; ++b) {
        gl += hg[b];
        hl += hh[b];
        cl += hc[b];
        if (cl == 0 || cl == rows.size()) continue;
        const double gain = term(gl, hl) + term(gs - gl, hs - hl) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    const auto& bins = binned_.bin[static_cast<std::size_t>(best_feature)];
    for (std::size_t r : rows) (bins[r] <= best_bin ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = binned_.thresholds[static_cast<std::size_t>(best_feature)][best_bin];
    node.left = l;
    node.right = r;
    return id;
  }

  const Binned& binned_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const BoostingParams& params_;
  GradientBoostingClassifier::Tree tree_;
};

double predict_tree(const GradientBoostingClassifier::Tree& tree, const Eigen::MatrixXd& x, Eigen::Index row) {
  std::size_t n = 0;
  while (tree[n].feature >= 0) {
    n = static_cast<std::size_t>(x(row, tree[n].feature) <= tree[n].threshold ? tree[n].left : tree[n].right);
  }
  return tree[n].value;
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
}

}  // namespace

void GradientBoostingClassifier::fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes) {
  num_classes_ = num_classes;
  outputs_ = num_classes <= 2 ? 1 : num_classes;
  const auto n = static_cast<std::size_t>(x.rows());
  const Binned binned = bin_features(x, params_.max_bins);

  std::vector<double> prior(static_cast<std::size_t>(num_classes), 0.0);
  for (int label : y) prior[static_cast<std::size_t>(label)] += 1.0 / static_cast<double>(n);
  base_.resize(outputs_);
  if (outputs_ == 1) {
    const double p = std::clamp(prior[1], 1e-6, 1.0 - 1e-6);
    base_(0) = std::log(p / (1.0 - p));
  } else {
    for (int k = 0; k < outputs_; ++k) base_(k) = std::log(std::max(prior[static_cast<std::size_t>(k)], 1e-6));
  }

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(x.rows(), outputs_);
  f.rowwise() += base_.transpose();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<double> g(n), h(n);
  trees_.clear();
  for (int round = 0; round < params_.rounds; ++round) {
    Eigen::MatrixXd p = f;
    if (outputs_ == 1) {
      p = p.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    } else {
      softmax_rows(p);
    }
    std::vector<Tree> round_trees;
    for (int k = 0; k < outputs_; ++k) {
      const int target = outputs_ == 1 ? 1 : k;
      for (std::size_t i = 0; i < n; ++i) {
        const double pk = p(static_cast<Eigen::Index>(i), k);
        g[i] = pk - (y[i] == target ? 1.0 : 0.0);
        h[i] = std::max(pk * (1.0 - pk), 1e-12);
      }
      Tree tree = TreeBuilder(binned, g, h, params_).build(all);
      for (Node& node : tree) node.value *= params_.learning_rate;
      for (std::size_t i = 0; i < n; ++i) {
        f(static_cast<Eigen::Index>(i), k) += predict_tree(tree, x, static_cast<Eigen::Index>(i));
      }
      round_trees.push_back(std::move(tree));
    }
    trees_.push_back(std::move(round_trees));
  }
}

Eigen::MatrixXd GradientBoostingClassifier::raw_scores(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd f(x.rows(), outputs_);
  f.rowwise() = base_.transpose();
  for (const auto& round : trees_) {
    for (int k = 0; k < outputs_; ++k) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) f(i, k) += predict_tree(round[static_cast<std::size_t>(k)], x, i);
    }
  }
  return f;
}

Eigen::MatrixXd GradientBoostingClassifier::scores(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd f = raw_scores(x);
  if (outputs_ == 1) {
    Eigen::MatrixXd s(x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      s(i, 1) = 1.0 / (1.0 + std::exp(-f(i, 0)));
      s(i, 0) = 1.0 - s(i, 1);
    }
    return s;
  }
  softmax_rows(f);
  return f;
}

}  // namespace comet::detail

#include "comet/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "learners.hpp"

namespace comet {

namespace {

struct ParamSpace {
  const char* name;
  double lo;
  double hi;
  bool integer;    // uniform over integers in [lo, hi]
  bool log_scale;  // log-uniform over [lo, hi]
  double fallback;
};

const std::vector<ParamSpace>& space(Algorithm algorithm) {
  static const std::vector<ParamSpace> knn = {{"k", 1, 25, true, false, 5}};
  static const std::vector<ParamSpace> lor = {{"l2", 1e-4, 1e2, false, true, 1.0}};
  static const std::vector<ParamSpace> svm = {{"C", 1e-3, 1e2, false, true, 1.0}};
  static const std::vector<ParamSpace> gb = {{"depth", 1, 3, true, false, 2},
                                             {"rounds", 20, 200, true, false, 100},
                                             {"learning_rate", 1e-2, 1.0, false, true, 0.1}};
  static const std::vector<ParamSpace> mlp = {{"hidden", 8, 64, true, false, 32},
                                              {"learning_rate", 1e-3, 1e-2, false, true, 3e-3},
                                              {"alpha", 1e-5, 1e-2, false, true, 1e-4}};
  static const std::vector<ParamSpace> lir = {{"l2", 1e-4, 1e2, false, true, 1.0}};
  switch (algorithm) {
    case Algorithm::kKnn:
      return knn;
    case Algorithm::kLogisticRegression:
      return lor;
    case Algorithm::kLinearSvm:
      return svm;
    case Algorithm::kGradientBoosting:
      return gb;
    case Algorithm::kMlp:
      return mlp;
    case Algorithm::kLinearRegressionClassifier:
      return lir;
  }
  throw InvalidArgument("unknown algorithm");
}

constexpr std::pair<Algorithm, std::string_view> kAlgorithmNames[] = {
    {Algorithm::kKnn, "knn"},
    {Algorithm::kLogisticRegression, "logistic_regression"},
    {Algorithm::kLinearSvm, "linear_svm"},
    {Algorithm::kGradientBoosting, "gradient_boosting"},
    {Algorithm::kMlp, "mlp"},
    {Algorithm::kLinearRegressionClassifier, "linear_regression"},
};

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<int> labels_of(const Dataset& data, std::span<const std::size_t> rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(data.labels()[r]);
  return y;
}

const LinearClassifier& linear_of(const TrainedModel& model) {
  if (!supports_gradients(model.spec().algorithm)) {
    throw CapabilityError(std::string("per-record gradients are not available for ") +
                          std::string(to_string(model.spec().algorithm)));
  }
  return static_cast<const LinearClassifier&>(model.classifier());
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [a, name] : kAlgorithmNames) {
    if (a == algorithm) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames) {
    if (n == name) return a;
  }
  // Short forms used in configs and on the command line.
  if (name == "lor" || name == "logreg") return Algorithm::kLogisticRegression;
  if (name == "svm") return Algorithm::kLinearSvm;
  if (name == "gb") return Algorithm::kGradientBoosting;
  if (name == "lir") return Algorithm::kLinearRegressionClassifier;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

bool supports_gradients(Algorithm algorithm) {
  return algorithm == Algorithm::kLogisticRegression || algorithm == Algorithm::kLinearSvm ||
         algorithm == Algorithm::kLinearRegressionClassifier;
}

double ModelSpec::param(const std::string& name) const {
  if (auto it = hyperparameters.find(name); it != hyperparameters.end()) return it->second;
  for (const ParamSpace& p : space(algorithm)) {
    if (name == p.name) return p.fallback;
  }
  throw InvalidArgument("algorithm " + std::string(to_string(algorithm)) + " has no hyperparameter '" + name + "'");
}

void validate(const ModelSpec& spec) {
  const auto& params = space(spec.algorithm);
  for (const auto& [name, value] : spec.hyperparameters) {
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamSpace& p) { return name == p.name; });
    if (it == params.end()) {
      throw InvalidArgument("algorithm " + std::string(to_string(spec.algorithm)) + " has no hyperparameter '" +
                            name + "'");
    }
    // Relative slack so values that round-trip through text stay valid.
    const double slack = 1e-9 * std::max(1.0, std::abs(it->hi));
    if (!(value >= it->lo - slack && value <= it->hi + slack) || (it->integer && value != std::round(value))) {
      throw InvalidArgument("hyperparameter " + name + "=" + std::to_string(value) + " outside its search space");
    }
  }
}

ModelSpec sample_spec(Algorithm algorithm, Rng& rng) {
  ModelSpec spec;
  spec.algorithm = algorithm;
  for (const ParamSpace& p : space(algorithm)) {
    double v;
    if (p.integer) {
      v = static_cast<double>(rng.integer(static_cast<long long>(p.lo), static_cast<long long>(p.hi)));
    } else if (p.log_scale) {
      v = std::pow(10.0, rng.uniform(std::log10(p.lo), std::log10(p.hi)));
    } else {
      v = rng.uniform(p.lo, p.hi);
    }
    spec.hyperparameters[p.name] = v;
  }
  return spec;
}

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec) {
  validate(spec);
  switch (spec.algorithm) {
    case Algorithm::kKnn:
      return std::make_unique<detail::KnnClassifier>(static_cast<int>(spec.param("k")));
    case Algorithm::kLogisticRegression:
      return std::make_unique<LinearClassifier>(LinearLoss::kLogistic, spec.param("l2"), spec.seed);
    case Algorithm::kLinearSvm:
      return std::make_unique<LinearClassifier>(LinearLoss::kHinge, spec.param("C"), spec.seed);
    case Algorithm::kLinearRegressionClassifier:
      return std::make_unique<LinearClassifier>(LinearLoss::kSquared, spec.param("l2"), spec.seed);
    case Algorithm::kGradientBoosting: {
      detail::BoostingParams p;
      p.depth = static_cast<int>(spec.param("depth"));
      p.rounds = static_cast<int>(spec.param("rounds"));
      p.learning_rate = spec.param("learning_rate");
      return std::make_unique<detail::GradientBoostingClassifier>(p);
    }
    case Algorithm::kMlp: {
      detail::MlpParams p;
      p.hidden = static_cast<int>(spec.param("hidden"));
      p.learning_rate = spec.param("learning_rate");
      p.alpha = spec.param("alpha");
      p.seed = spec.seed;
      return std::make_unique<detail::MlpClassifier>(p);
    }
  }
  throw InvalidArgument("unknown algorithm");
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

TrainedModel fit(const ModelSpec& spec, const TableView& view, std::span<const std::size_t> rows) {
  const Dataset& data = view.dataset();
  if (rows.empty()) throw InvalidArgument("cannot fit on an empty training split");
  const std::vector<int> y = labels_of(data, rows);
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    throw DegenerateLabelsError("training rows contain a single class");
  }
  Pipeline pipeline = Pipeline::fit(view, rows);
  const Eigen::MatrixXd x = pipeline.transform(view, rows);
  std::shared_ptr<Classifier> classifier = make_classifier(spec);
  classifier->fit(x, y, std::max(data.num_classes(), 2));

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_bytes(h, x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
  h = hash_bytes(h, y.data(), y.size() * sizeof(int));
  return TrainedModel(spec, std::move(pipeline), std::move(classifier), h);
}

Eigen::MatrixXd TrainedModel::scores(const TableView& view, std::span<const std::size_t> rows) const {
  return classifier_->scores(pipeline_.transform(view, rows));
}

Eigen::MatrixXd TrainedModel::scores_raw(const Eigen::MatrixXd& raw) const {
  return classifier_->scores(pipeline_.transform_raw(raw));
}

std::vector<int> TrainedModel::predict(const TableView& view, std::span<const std::size_t> rows) const {
  return argmax_rows(scores(view, rows));
}

double measure_f1(const ModelSpec& spec, const TableView& view) {
  const Dataset& data = view.dataset();
  const TrainedModel model = fit(spec, view);
  const auto& test = data.split().test;
  if (test.empty()) throw InvalidArgument("cannot measure F1 without test rows");
  const std::vector<int> predicted = model.predict(view, test);
  return f1_score(labels_of(data, test), predicted, averaging_for(data.num_classes()), data.num_classes(),
                  data.positive_class());
}

SearchResult random_search(Algorithm algorithm, const TableView& view, std::span<const std::size_t> rows,
                           int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidArgument("random search needs at least one sample");
  const Dataset& data = view.dataset();
  const std::vector<int> y = labels_of(data, rows);
  Split inner;
  try {
    inner = stratified_split(y, data.num_classes(), 0.2, derive_seed(seed, {0}));
  } catch (const StratificationError&) {
    // Rare classes: plain shuffled holdout.
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng shuffle(derive_seed(seed, {0}));
    shuffle.shuffle(idx);
    const std::size_t cut = std::max<std::size_t>(1, (idx.size() + 2) / 5);
    inner.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    inner.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  }
  std::vector<std::size_t> fit_rows, holdout_rows;
  for (std::size_t i : inner.train) fit_rows.push_back(rows[i]);
  for (std::size_t i : inner.test) holdout_rows.push_back(rows[i]);
  const std::vector<int> holdout_y = labels_of(data, holdout_rows);

  Rng rng(derive_seed(seed, {1}));
  SearchResult result;
  double best = -2.0;
  for (int i = 0; i < n_samples; ++i) {
    SearchCandidate candidate;
    candidate.spec = sample_spec(algorithm, rng);
    candidate.spec.seed = derive_seed(seed, {2, static_cast<std::uint64_t>(i)});
    try {
      const TrainedModel model = fit(candidate.spec, view, fit_rows);
      candidate.holdout_f1 = f1_score(holdout_y, model.predict(view, holdout_rows),
                                      averaging_for(data.num_classes()), data.num_classes(), data.positive_class());
    } catch (const DegenerateLabelsError&) {
      candidate.holdout_f1 = -1.0;
    }
    if (candidate.holdout_f1 > best) {
      best = candidate.holdout_f1;
      result.best = candidate.spec;
    }
    result.candidates.push_back(std::move(candidate));
  }
  return result;
}

Eigen::VectorXd per_record_gradient(const TrainedModel& model, const Eigen::VectorXd& encoded, int label) {
  return linear_of(model).record_gradient(encoded, label);
}

Eigen::VectorXd per_record_gradient(const TrainedModel& model, const TableView& view, std::size_t row) {
  const LinearClassifier& linear = linear_of(model);
  const std::size_t rows[] = {row};
  const Eigen::MatrixXd x = model.pipeline().transform(view, rows);
  return linear.record_gradient(x.row(0).transpose(), view.dataset().labels()[row]);
}

}  // namespace comet

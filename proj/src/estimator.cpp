#include "comet/estimator.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "comet/parallel.hpp"

namespace comet {

double AccuracySamples::current_f1() const {
  for (const AccuracyPoint& p : points) {
    if (p.level == 0) return p.f1;
  }
  throw EstimationError("accuracy samples lack the current-state point");
}

AccuracySamples measure_pollution_effect(const Dataset& data, FeatureId feature, ErrorType error,
                                         const ModelSpec& spec, const EstimatorOptions& options,
                                         std::uint64_t seed, std::optional<double> current_f1) {
  if (options.combos < 1) throw InvalidArgument("at least one combination per level is required");
  AccuracySamples samples;
  samples.feature = feature;
  samples.error = error;

  struct Job {
    int level;
    int combination;
  };
  std::vector<Job> jobs;
  for (int level : options.levels) {
    for (int c = 0; c < options.combos; ++c) jobs.push_back({level, c});
  }

  // Build overlays first so compatibility errors surface before any fit.
  samples.states.resize(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto tag_level = static_cast<std::uint64_t>(jobs[i].level);
    const auto tag_combo = static_cast<std::uint64_t>(jobs[i].combination);
    samples.states[i] = pollute(data, feature, error, PollutionLevel(jobs[i].level),
                                derive_seed(seed, {tag_level, tag_combo}), jobs[i].combination);
  }

  std::vector<double> f1(jobs.size() + 1, 0.0);
  const bool need_current = !current_f1.has_value();
  parallel_for(jobs.size() + (need_current ? 1 : 0), [&](std::size_t i) {
    const bool is_current = i == jobs.size();
    try {
      f1[i] = is_current ? measure_f1(spec, data) : measure_f1(spec, samples.states[i].view(data));
    } catch (const Error& e) {
      const std::string where = is_current ? std::string("current state")
                                           : "level " + std::to_string(jobs[i].level) + " combination " +
                                                 std::to_string(jobs[i].combination);
      throw EstimationError("fit failed on " + data.feature(feature).name + "/" + std::string(to_string(error)) +
                            " " + where + ": " + e.what());
    }
  });

  samples.points.push_back({0, 0, need_current ? f1[jobs.size()] : *current_f1});
  for (std::size_t i = 0; i < jobs.size(); ++i) samples.points.push_back({jobs[i].level, jobs[i].combination, f1[i]});
  return samples;
}

Posterior fit_posterior(std::span<const double> x, std::span<const double> y, const EstimatorOptions& options) {
  if (x.size() != y.size()) throw InvalidArgument("regression inputs differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    target(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix2d prior = options.prior_precision * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d precision = prior + design.transpose() * design;
  Posterior post;
  post.covariance = precision.inverse();
  post.mean = precision.ldlt().solve(design.transpose() * target);
  post.a = options.a0 + 0.5 * static_cast<double>(n);
  // Equal to b0 + (y'y - m' Lambda_n m) / 2 for a zero prior mean, without the cancellation.
  const Eigen::VectorXd residual = target - design * post.mean;
  post.b = options.b0 + 0.5 * (residual.squaredNorm() + post.mean.dot(prior * post.mean));
  return post;
}

PredictiveInterval predictive(const Posterior& posterior, double x, double mass) {
  const Eigen::Vector2d at(1.0, x);
  PredictiveInterval out;
  out.mean = at.dot(posterior.mean);
  out.dof = 2.0 * posterior.a;
  out.scale = std::sqrt(posterior.b / posterior.a * (1.0 + at.dot(posterior.covariance * at)));
  const boost::math::students_t dist(out.dof);
  const double t = boost::math::quantile(dist, 0.5 + 0.5 * mass);
  out.lower = out.mean - t * out.scale;
  out.upper = out.mean + t * out.scale;
  return out;
}

Prediction fit_predict(const AccuracySamples& samples, const EstimatorOptions& options) {
  if (samples.points.size() < 3) throw RankDeficiencyError("regression needs at least three points");
  std::vector<double> x, y;
  for (const AccuracyPoint& p : samples.points) {
    x.push_back(static_cast<double>(p.level));
    y.push_back(p.f1);
  }
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    throw RankDeficiencyError("all accuracy points share one pollution level");
  }
  Prediction pred;
  pred.feature = samples.feature;
  pred.error = samples.error;
  pred.current_f1 = samples.current_f1();
  pred.posterior = fit_posterior(x, y, options);
  const PredictiveInterval interval = predictive(pred.posterior, -1.0, options.interval);
  pred.p_next = interval.mean;
  pred.raw_p_next = interval.mean;
  pred.u = interval.upper - interval.lower;
  return pred;
}

void DiscrepancyLog::record(CandidateKey key, double predicted, double actual) {
  if (!(predicted >= 0.0 && predicted <= 1.0 && actual >= 0.0 && actual <= 1.0)) {
    throw InvalidArgument("discrepancy values must lie in [0, 1]");
  }
  log_[key].push_back({predicted, actual});
}

const std::vector<Discrepancy>& DiscrepancyLog::entries(CandidateKey key) const {
  static const std::vector<Discrepancy> kEmpty;
  auto it = log_.find(key);
  return it == log_.end() ? kEmpty : it->second;
}

std::optional<double> DiscrepancyLog::mean_discrepancy(CandidateKey key) const {
  const auto& e = entries(key);
  if (e.empty()) return std::nullopt;
  double sum = 0.0;
  for (const Discrepancy& d : e) sum += d.actual - d.predicted;
  return sum / static_cast<double>(e.size());
}

std::size_t DiscrepancyLog::size() const {
  std::size_t n = 0;
  for (const auto& [key, e] : log_) n += e.size();
  return n;
}

Prediction adjust(Prediction prediction, const DiscrepancyLog& log) {
  const double shift = log.mean_discrepancy(prediction.key()).value_or(0.0);
  prediction.p_next = std::clamp(prediction.p_next + shift, 0.0, 1.0);
  return prediction;
}

}  // namespace comet

#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "comet/models.hpp"
#include "comet/pollution.hpp"

namespace comet {

struct AccuracyPoint {
  int level = 0;  // added pollution in steps
  int combination = 0;
  double f1 = 0.0;

  bool operator==(const AccuracyPoint&) const = default;
};

// Accuracy measured at the current state and at added pollution levels.
struct AccuracySamples {
  FeatureId feature = 0;
  ErrorType error = ErrorType::kMissingValues;
  std::vector<AccuracyPoint> points;
  std::vector<PollutedState> states;  // D'_f, one per nonzero point

  double current_f1() const;
};

struct EstimatorOptions {
  std::vector<int> levels = {1, 2};
  int combos = 3;
  // Normal-inverse-gamma prior: coefficients ~ N(0, sigma^2 / precision),
  // sigma^2 ~ InvGamma(a0, b0).
  double prior_precision = 1e-8;
  double a0 = 1e-6;
  double b0 = 1e-6;
  double interval = 0.95;

  bool operator==(const EstimatorOptions&) const = default;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// E1. `current_f1` skips the level-0 refit when the caller already has it.
AccuracySamples measure_pollution_effect(const Dataset& data, FeatureId feature, ErrorType error,
                                         const ModelSpec& spec, const EstimatorOptions& options,
                                         std::uint64_t seed, std::optional<double> current_f1 = std::nullopt);

// Conjugate posterior for y = b0 + b1 x.
struct Posterior {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // V_n; Cov(beta) = sigma^2 V_n
  double a = 0.0;
  double b = 0.0;
};

Posterior fit_posterior(std::span<const double> x, std::span<const double> y, const EstimatorOptions& options);

// Student-t posterior predictive at x.
struct PredictiveInterval {
  double mean = 0.0;
  double scale = 0.0;
  double dof = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

PredictiveInterval predictive(const Posterior& posterior, double x, double mass);

struct Prediction {
  FeatureId feature = 0;
  ErrorType error = ErrorType::kMissingValues;
  double p_next = 0.0;
  double u = 0.0;
  double raw_p_next = 0.0;  // before discrepancy adjustment
  double current_f1 = 0.0;
  Posterior posterior;

  CandidateKey key() const { return {feature, error}; }
};

// E2: regress F1 on added level (in steps) and predict one cleaning step
// ahead, at level -1.
Prediction fit_predict(const AccuracySamples& samples, const EstimatorOptions& options = {});

struct Discrepancy {
  double predicted = 0.0;
  double actual = 0.0;

  bool operator==(const Discrepancy&) const = default;
};

class DiscrepancyLog {
 public:
  void record(CandidateKey key, double predicted, double actual);
  const std::vector<Discrepancy>& entries(CandidateKey key) const;
  std::optional<double> mean_discrepancy(CandidateKey key) const;
  const std::map<CandidateKey, std::vector<Discrepancy>>& all() const { return log_; }
  std::size_t size() const;

  bool operator==(const DiscrepancyLog&) const = default;

 private:
  std::map<CandidateKey, std::vector<Discrepancy>> log_;
};

// Shifts p_next by the mean (actual - predicted) of the key's history.
Prediction adjust(Prediction prediction, const DiscrepancyLog& log);

}  // namespace comet

#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "comet/types.hpp"

namespace comet {

enum class Averaging { kBinaryPositive, kMacro };

// Binary datasets score the positive class, three or more classes use macro.
constexpr Averaging averaging_for(int num_classes) {
  return num_classes <= 2 ? Averaging::kBinaryPositive : Averaging::kMacro;
}

// `num_classes` is the declared label-set size: in macro averaging a class
// absent from both vectors still contributes an F1 of 0.
double f1_score(std::span<const int> truth, std::span<const int> predicted, Averaging averaging,
                int num_classes, int positive_class = 1);

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual);

struct CurvePoint {
  double budget = 0.0;
  double f1 = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

// F1 over spent budget with step-function semantics.
struct BudgetCurve {
  std::vector<CurvePoint> points;

  void add(double budget, double f1);
  bool empty() const { return points.empty(); }
  const CurvePoint& back() const { return points.back(); }
  bool operator==(const BudgetCurve&) const = default;
};

// Value of the last point with budget <= u for each integer u in [0, max_budget].
std::vector<double> propagate(const BudgetCurve& curve, int max_budget);

std::vector<double> advantage(const BudgetCurve& a, const BudgetCurve& b, int max_budget);

// Pointwise mean of equal-length series.
std::vector<double> pointwise_mean(std::span<const std::vector<double>> series);

BudgetCurve dense_curve(std::span<const double> series);

void write_curve_csv(const BudgetCurve& curve, std::ostream& out);

}  // namespace comet

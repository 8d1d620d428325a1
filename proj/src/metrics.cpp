#include "comet/metrics.hpp"

#include <cmath>
#include <ostream>

namespace comet {

namespace {

double class_f1(std::span<const int> truth, std::span<const int> predicted, int c) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == c;
    const bool p = predicted[i] == c;
    tp += t && p;
    fp += !t && p;
    fn += t && !p;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1_score(std::span<const int> truth, std::span<const int> predicted, Averaging averaging,
                int num_classes, int positive_class) {
  if (truth.empty()) throw InvalidArgument("F1 of empty vectors");
  if (truth.size() != predicted.size()) throw InvalidArgument("F1 vectors differ in length");
  if (averaging == Averaging::kBinaryPositive) return class_f1(truth, predicted, positive_class);
  if (num_classes <= 0) throw InvalidArgument("macro F1 needs a declared label set");
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) sum += class_f1(truth, predicted, c);
  return sum / num_classes;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.empty()) throw InvalidArgument("MAE of empty vectors");
  if (predicted.size() != actual.size()) throw InvalidArgument("MAE vectors differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
  return sum / static_cast<double>(predicted.size());
}

void BudgetCurve::add(double budget, double f1) {
  if (!points.empty() && budget < points.back().budget) {
    throw InvalidArgument("budget curve must be non-decreasing in budget");
  }
  points.push_back({budget, f1});
}

std::vector<double> propagate(const BudgetCurve& curve, int max_budget) {
  if (curve.empty()) throw InvalidArgument("cannot propagate an empty curve");
  if (curve.points.front().budget != 0.0) throw InvalidArgument("curve must start at budget 0");
  std::vector<double> out(static_cast<std::size_t>(max_budget + 1));
  std::size_t next = 0;
  double current = curve.points.front().f1;
  for (int u = 0; u <= max_budget; ++u) {
    while (next < curve.points.size() && curve.points[next].budget <= u + 1e-9) {
      current = curve.points[next].f1;
      ++next;
    }
    out[static_cast<std::size_t>(u)] = current;
  }
  return out;
}

std::vector<double> advantage(const BudgetCurve& a, const BudgetCurve& b, int max_budget) {
  std::vector<double> pa = propagate(a, max_budget);
  const std::vector<double> pb = propagate(b, max_budget);
  for (std::size_t i = 0; i < pa.size(); ++i) pa[i] -= pb[i];
  return pa;
}

std::vector<double> pointwise_mean(std::span<const std::vector<double>> series) {
  if (series.empty()) return {};
  std::vector<double> out(series.front().size(), 0.0);
  for (const auto& s : series) {
    if (s.size() != out.size()) throw InvalidArgument("series lengths differ");
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i];
  }
  for (double& v : out) v /= static_cast<double>(series.size());
  return out;
}

BudgetCurve dense_curve(std::span<const double> series) {
  BudgetCurve c;
  for (std::size_t u = 0; u < series.size(); ++u) c.add(static_cast<double>(u), series[u]);
  return c;
}

void write_curve_csv(const BudgetCurve& curve, std::ostream& out) {
  out << "budget,f1\n";
  out.precision(17);
  for (const CurvePoint& p : curve.points) out << p.budget << ',' << p.f1 << '\n';
}

}  // namespace comet

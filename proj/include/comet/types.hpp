#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace comet {

using FeatureId = std::size_t;

enum class FeatureKind { kNumerical, kCategorical };

enum class ErrorType { kMissingValues, kGaussianNoise, kCategoricalShift, kScaling };

inline constexpr std::array<ErrorType, 4> kAllErrorTypes = {
    ErrorType::kMissingValues, ErrorType::kGaussianNoise, ErrorType::kCategoricalShift,
    ErrorType::kScaling};

enum class Provenance : std::uint8_t { kClean = 0, kDirtyPrePollution = 1, kDirtyTemp = 2 };

// Base class for every error the engine reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};
class CompatibilityError : public Error {
 public:
  using Error::Error;
};
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

constexpr bool is_compatible(ErrorType error, FeatureKind kind) {
  switch (error) {
    case ErrorType::kMissingValues:
      return true;
    case ErrorType::kGaussianNoise:
    case ErrorType::kScaling:
      return kind == FeatureKind::kNumerical;
    case ErrorType::kCategoricalShift:
      return kind == FeatureKind::kCategorical;
  }
  return false;
}

constexpr std::string_view to_string(ErrorType error) {
  switch (error) {
    case ErrorType::kMissingValues:
      return "missing_values";
    case ErrorType::kGaussianNoise:
      return "gaussian_noise";
    case ErrorType::kCategoricalShift:
      return "categorical_shift";
    case ErrorType::kScaling:
      return "scaling";
  }
  return "unknown";
}

constexpr std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::kNumerical ? "numerical" : "categorical";
}

inline ErrorType parse_error_type(std::string_view name) {
  for (ErrorType e : kAllErrorTypes) {
    if (to_string(e) == name) return e;
  }
  throw InvalidArgument("unknown error type '" + std::string(name) + "'");
}

inline FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "numerical") return FeatureKind::kNumerical;
  if (name == "categorical") return FeatureKind::kCategorical;
  throw InvalidArgument("unknown feature kind '" + std::string(name) + "'");
}

// A (feature, error type) pair: the unit the recommender ranks and cleans.
struct CandidateKey {
  FeatureId feature = 0;
  ErrorType error = ErrorType::kMissingValues;

  auto operator<=>(const CandidateKey&) const = default;
};

}  // namespace comet

#pragma once

#include <cstdint>

#include "comet/tabular.hpp"

namespace comet {

// Gaussian blobs on hypercube vertices, one vertex per class. Columns are
// inf_j (informative), noise_j (standard normal) and cat_j (a noisy copy of
// inf_(j mod informative) binned into quantile categories).
struct SyntheticSpec {
  std::size_t rows = 1000;
  int informative = 2;
  int noise = 2;
  int categorical = 0;
  int categories = 4;
  int classes = 2;
  double class_sep = 1.0;
  // Separation of inf_j is class_sep * decay^j; 1 keeps the columns equally strong.
  double decay = 1.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Fully clean, split, with the truth store captured.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace comet

#include "comet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "comet/rng.hpp"

namespace comet {

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.rows < 50) throw InvalidArgument("synthetic data needs at least 50 rows");
  if (spec.informative < 1) throw InvalidArgument("synthetic data needs an informative feature");
  if (spec.informative + spec.noise + spec.categorical < 2) throw InvalidArgument("synthetic data needs 2 features");
  if (spec.classes < 2) throw InvalidArgument("synthetic data needs 2 classes");
  if (!(spec.decay > 0.0)) throw InvalidArgument("decay must be positive");
  if (spec.categorical > 0 && spec.categories < 2) throw InvalidArgument("categorical columns need 2 categories");

  Rng rng(derive_seed(spec.seed, {0x5e7}));
  const std::size_t n = spec.rows;
  const auto d = static_cast<std::size_t>(spec.informative);
  const auto k = static_cast<std::size_t>(spec.classes);

  // Distinct vertices while the cube has enough of them.
  const std::size_t corners = d >= 20 ? (std::size_t{1} << 20) : (std::size_t{1} << d);
  std::vector<std::size_t> vertex_ids;
  if (k == 2) {
    // Opposite corners: every informative column separates the classes.
    const std::size_t v = rng.index(corners);
    vertex_ids = {v, (corners - 1) ^ v};
  } else if (k <= corners) {
    std::vector<std::size_t> pool(corners);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    vertex_ids = rng.sample(std::move(pool), k);
  } else {
    for (std::size_t c = 0; c < k; ++c) vertex_ids.push_back(rng.index(corners));
  }

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
  rng.shuffle(labels);

  std::vector<Feature> features;
  auto numeric = [&](std::string name) {
    Feature f;
    f.name = std::move(name);
    f.kind = FeatureKind::kNumerical;
    f.cells.values.resize(n);
    f.cells.missing.assign(n, 0);
    f.cells.provenance.assign(n, Provenance::kClean);
    return f;
  };
  for (std::size_t j = 0; j < d; ++j) {
    Feature f = numeric("inf_" + std::to_string(j));
    const double sep = spec.class_sep * std::pow(spec.decay, static_cast<double>(j));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = vertex_ids[static_cast<std::size_t>(labels[i])];
      const double centre = ((v >> (j % 20)) & 1U) ? sep : -sep;
      f.cells.values[i] = centre + rng.normal();
    }
    features.push_back(std::move(f));
  }
  for (int j = 0; j < spec.noise; ++j) {
    Feature f = numeric("noise_" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) f.cells.values[i] = rng.normal();
    features.push_back(std::move(f));
  }
  for (int j = 0; j < spec.categorical; ++j) {
    const Feature& source = features[static_cast<std::size_t>(j) % d];
    std::vector<double> latent(n);
    for (std::size_t i = 0; i < n; ++i) latent[i] = source.cells.values[i] + 0.5 * rng.normal();
    std::vector<double> sorted = latent;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (int b = 1; b < spec.categories; ++b) {
      cuts.push_back(sorted[n * static_cast<std::size_t>(b) / static_cast<std::size_t>(spec.categories)]);
    }
    Feature f;
    f.name = "cat_" + std::to_string(j);
    f.kind = FeatureKind::kCategorical;
    for (int b = 0; b < spec.categories; ++b) f.categories.push_back("b" + std::to_string(b));
    f.cells.values.resize(n);
    f.cells.missing.assign(n, 0);
    f.cells.provenance.assign(n, Provenance::kClean);
    for (std::size_t i = 0; i < n; ++i) {
      f.cells.values[i] = static_cast<double>(std::upper_bound(cuts.begin(), cuts.end(), latent[i]) - cuts.begin());
    }
    features.push_back(std::move(f));
  }

  std::vector<std::string> classes;
  for (std::size_t c = 0; c < k; ++c) classes.push_back("c" + std::to_string(c));
  Dataset data(std::move(features), "label", std::move(classes), std::move(labels));
  split(data, spec.test_fraction, derive_seed(spec.seed, {0x5917}));
  data.capture_truth();
  return data;
}

}  // namespace comet

#include "cogforest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace cogforest {
namespace {

struct Row {
  std::vector<double> x;
  int label;
  int attribute;
  bool noise;
};

std::vector<double> blob(std::mt19937_64& rng, int label, int attribute, std::size_t dim, double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  std::normal_distribution<double> nuisance(0.0, 1.0);
  const double s = label == 0 ? -1.0 : 1.0;
  std::vector<double> x(dim);
  const double cx = attribute == 0 ? 2.0 * s : 0.75 * s;
  const double cy = attribute == 0 ? 0.0 : -3.0 * s;
  x[0] = cx + normal(rng);
  x[1] = cy + normal(rng);
  for (std::size_t k = 2; k < dim; ++k) x[k] = nuisance(rng);
  return x;
}

FeatureMatrix to_matrix(const std::vector<Row>& rows, const std::string& prefix, std::size_t dim) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  Matrix f(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(prefix + std::to_string(i));
    labels.push_back(rows[i].label);
    for (std::size_t k = 0; k < dim; ++k) f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i].x[k];
  }
  return FeatureMatrix(std::move(ids), std::move(f), std::move(labels));
}

}  // namespace

SyntheticDataset make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.class_sizes.size() != 2) throw InputError("synthetic generator supports exactly two classes");
  if (cfg.input_dim < 2) throw InputError("synthetic input_dim must be >= 2");
  if (!(cfg.majority_fraction > 0.0 && cfg.majority_fraction <= 1.0)) {
    throw InputError("majority_fraction must lie in (0, 1]");
  }
  if (!(cfg.noise_fraction >= 0.0 && cfg.noise_fraction < 1.0)) throw InputError("noise_fraction must lie in [0, 1)");
  if (!(cfg.noise_radius_min >= 0.0 && cfg.noise_radius_min <= cfg.noise_radius_max)) {
    throw InputError("noise radii must satisfy 0 <= min <= max");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Row> train;
  for (int c = 0; c < 2; ++c) {
    const std::size_t n = cfg.class_sizes[static_cast<std::size_t>(c)];
    const auto major = static_cast<std::size_t>(std::llround(cfg.majority_fraction * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
      const int attr = i < major ? 0 : 1;
      train.push_back({blob(rng, c, attr, cfg.input_dim, cfg.spread), c, attr, false});
    }
  }

  // Replace a random subset of rows by far-away points that keep a label.
  const std::size_t total = train.size();
  const auto noise_count = static_cast<std::size_t>(std::llround(cfg.noise_fraction * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(cfg.noise_radius_min, cfg.noise_radius_max);
  std::normal_distribution<double> nuisance(0.0, 1.0);
  for (std::size_t k = 0; k < noise_count; ++k) {
    Row& r = train[order[k]];
    const double a = angle(rng);
    const double rad = radius(rng);
    r.x[0] = rad * std::cos(a);
    r.x[1] = rad * std::sin(a);
    for (std::size_t d = 2; d < cfg.input_dim; ++d) r.x[d] = nuisance(rng);
    r.attribute = -1;
    r.noise = true;
  }

  std::vector<Row> heldout;
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < cfg.heldout_per_cell; ++i) {
        heldout.push_back({blob(rng, c, a, cfg.input_dim, cfg.spread), c, a, false});
      }
    }
  }
  if (heldout.empty()) throw InputError("heldout_per_cell must be >= 1");

  SyntheticDataset out{to_matrix(train, "s", cfg.input_dim), to_matrix(heldout, "h", cfg.input_dim), {}, {}};
  for (const auto& r : train) {
    out.attribute.push_back(r.attribute);
    out.is_noise.push_back(r.noise);
  }
  return out;
}

std::string truth_to_csv(const SyntheticDataset& data) {
  std::string out = "id,attribute,noise\n";
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    out += data.train.id(i) + "," + std::to_string(data.attribute[i]) + "," + (data.is_noise[i] ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace cogforest

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cogforest/types.hpp"

namespace cogforest {

/// Seeded two-class, two-attribute Gaussian data with long-tailed classes
/// and long-tailed attributes inside each class.
///
/// Class c uses sign s = -1 (c = 0) or +1 (c = 1). The majority attribute is
/// centred at (2s, 0), the minority attribute at (0.75s, -3s); any further
/// input dimensions are pure N(0, 1) nuisance. Planted noise replaces randomly
/// chosen rows, keeping their label, by points at a uniform angle and a radius
/// in [noise_radius_min, noise_radius_max] around the origin.
struct SyntheticConfig {
  std::vector<std::size_t> class_sizes = {400, 100};
  double majority_fraction = 0.9;
  std::size_t input_dim = 4;
  double spread = 1.0;
  double noise_fraction = 0.0;
  double noise_radius_min = 10.0;
  double noise_radius_max = 30.0;
  std::size_t heldout_per_cell = 250;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  FeatureMatrix train;
  /// Class- and attribute-balanced, noise-free.
  FeatureMatrix heldout;
  /// Ground truth for evaluation only, indexed by train row. Noise rows have
  /// attribute -1.
  std::vector<int> attribute;
  std::vector<bool> is_noise;
};

SyntheticDataset make_synthetic(const SyntheticConfig& cfg);

/// CSV `id,attribute,noise` for the training rows.
std::string truth_to_csv(const SyntheticDataset& data);

}  // namespace cogforest

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cogforest/forest.hpp"
#include "cogforest/types.hpp"

namespace cogforest {

/// Root-to-leaf node sequences of a forest, one per leaf.
struct PathSet {
  std::vector<std::vector<NodeId>> paths;
  /// Number of paths through each node, indexed by node id.
  std::vector<std::size_t> repetition;
};

/// Depth-first enumeration, roots in order and children in stored order.
PathSet generate_paths(const CLForest& f);

/// p_j = n_j^q / sum_i n_i^q. q = 0 is uniform, q = 1 proportional.
std::vector<double> resample_probs(std::span<const std::size_t> counts, double q);

enum class WeightScope { kClassLocal, kGlobal };

/// Per-sample sampling probabilities. `weights[k]` belongs to `samples[k]`.
struct SampleWeights {
  std::vector<std::size_t> samples;
  std::vector<double> weights;
  WeightScope scope = WeightScope::kClassLocal;

  double sum() const;
};

/// Intermediate quantities of the attribute-wise weighting, exposed for
/// inspection. All vectors indexed by node id unless stated otherwise.
struct AttributeWeightTrace {
  PathSet paths;                          // after dropping fully excluded nodes
  std::vector<std::size_t> path_counts;   // samples along each path
  std::vector<double> path_weights;       // resample_probs(path_counts, q)
  std::vector<double> accumulated;        // sum of path_weight / path length
  std::vector<double> node_weights;       // accumulated / repetition
  std::vector<std::size_t> live_members;  // members not excluded
  SampleWeights raw;                      // node weight split across members
};

/// `excluded` is indexed by feature-matrix row (empty = nothing excluded).
/// Excluded samples are removed before path weighting; a node left with no
/// members drops out of every path.
AttributeWeightTrace trace_attribute_weights(const CLForest& f, double q_attr,
                                             const std::vector<bool>& excluded = {});

/// Class-local weights normalized to sum 1. With `normalize = false` the
/// pre-normalization values are returned.
SampleWeights attribute_weights(const CLForest& f, double q_attr, const std::vector<bool>& excluded = {},
                                bool normalize = true);

/// A resampled view of the training set for one (q_cls, q_attr) pair.
struct Environment {
  int env_id = 0;
  EnvParams params;
  /// Indexed by feature-matrix row; excluded rows hold exactly 0.
  std::vector<double> weights;
  /// Sorted excluded rows.
  std::vector<std::size_t> excluded;
};

/// Class masses from resample_probs over non-excluded class sizes with q_cls,
/// times the class-local attribute weights. Throws InputError when a class
/// has every sample excluded or when forests do not cover the matrix.
Environment build_environment(const FeatureMatrix& x, std::span<const CLForest> forests, const EnvParams& env,
                              const std::vector<bool>& excluded = {}, int env_id = 0);

/// I.i.d. categorical draws with replacement; owns its RNG state.
class BatchSampler {
 public:
  BatchSampler(std::span<const double> weights, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t batch_size);

 private:
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> dist_;
};

/// Rows drawn from env.weights; deterministic per seed.
std::vector<std::size_t> draw_batch(const Environment& env, std::size_t batch_size, std::uint64_t seed);

// Exports. CSV is `id,weight` with 17 significant digits.
std::string weights_to_csv(const SampleWeights& w, std::span<const std::string> ids_by_row);
std::string environment_to_csv(const Environment& env, std::span<const std::string> ids_by_row);
std::string environment_to_json(const Environment& env, std::span<const std::string> ids_by_row);
std::string weights_to_json(const SampleWeights& w, std::span<const std::string> ids_by_row);

}  // namespace cogforest

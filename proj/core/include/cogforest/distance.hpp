#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogforest/types.hpp"

namespace cogforest {

enum class Metric { kEuclidean, kCosine, kManhattan };

std::string_view metric_name(Metric m);
/// Accepts "euclidean", "cosine" / "cosine-distance", "manhattan".
Metric parse_metric(std::string_view name);

/// Dense symmetric N x N distance matrix with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, std::vector<double> values, Metric metric);

  std::size_t size() const { return n_; }
  Metric metric() const { return metric_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {d_.data() + i * n_, n_}; }

 private:
  std::size_t n_;
  std::vector<double> d_;
  Metric metric_;
};

/// Distance between two feature rows under the given metric.
double distance(Metric metric, std::span<const double> a, std::span<const double> b);

DistanceMatrix pairwise_distances(const FeatureMatrix& x, Metric metric = Metric::kEuclidean);
/// Distances among a subset of rows of a feature block, in the order given.
DistanceMatrix pairwise_distances(const Matrix& features, std::span<const std::size_t> rows,
                                  Metric metric = Metric::kEuclidean);

/// Mean over samples of the mean distance to their three nearest neighbours
/// (fewer when N < 4). Throws InputError for N = 1.
double base_distance(const DistanceMatrix& d);

/// Converts base-distance multiples into absolute radii.
ClfParams resolve_params(const ClfParams& p, const DistanceMatrix& d);
ClfParams resolve_params(const ClfParams& p, double base);

/// Worker threads for internal parallel loops; honours COGFOREST_THREADS.
std::size_t worker_count();

}  // namespace cogforest

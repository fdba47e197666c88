#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogforest/density.hpp"
#include "cogforest/forest.hpp"
#include "cogforest/types.hpp"

namespace cogforest {

enum class NoiseReason { kClusterSize, kDepthLayer };

std::string_view noise_reason_name(NoiseReason r);

/// Samples flagged as probable label noise.
struct NoiseReport {
  /// Flagged feature-matrix rows, ascending.
  std::vector<std::size_t> flagged;
  std::map<std::size_t, NoiseReason> reason;
  /// Every sample's density percentile within its class: the fraction of
  /// class samples ranked strictly below it (ascending rho, ties by row).
  std::map<std::size_t, double> density_percentile;

  bool contains(std::size_t row) const { return reason.count(row) != 0; }
  void merge(const NoiseReport& other);
};

/// ceil(p_d * class_size), with products within rounding error of an
/// integer snapped to it.
std::size_t density_cap(double p_d, std::size_t class_size);

/// Structural candidates before the density filter: tree smaller than n_min
/// (cluster_size), or node depth >= n_d inside the bottom n_l layers of its
/// tree (depth_layer). Cluster size wins when both apply.
std::map<std::size_t, NoiseReason> noise_candidates(const CLForest& f, const NoiseParams& p);

/// Candidates that also rank among the ceil(p_d * N) lowest-density samples
/// of the class. `rho` is indexed like `f.samples()`.
NoiseReport select_noise(const CLForest& f, const DensityVector& rho, const NoiseParams& p);

/// Row mask (size `rows`) with flagged samples set.
std::vector<bool> noise_mask(const NoiseReport& r, std::size_t rows);

/// CSV `id,reason,density_percentile`, one line per flagged sample.
std::string noise_to_csv(const NoiseReport& r, std::span<const std::string> ids_by_row);

}  // namespace cogforest

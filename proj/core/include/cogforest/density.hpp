#pragma once

#include <cstddef>
#include <vector>

#include "cogforest/distance.hpp"

namespace cogforest {

/// Per-sample Gaussian-kernel density and the descending-density visit order.
struct DensityVector {
  std::vector<double> rho;
  /// Permutation of 0..N-1 by decreasing rho; equal densities keep ascending index.
  std::vector<std::size_t> ordering;

  std::size_t size() const { return rho.size(); }
  /// Position of each sample in `ordering`.
  std::vector<std::size_t> ranks() const;
};

/// rho_i = sum over j != i with d_ij <= d_rd of exp(-(d_ij / d_rd)^2).
DensityVector compute_density(const DistanceMatrix& d, double d_rd);

}  // namespace cogforest

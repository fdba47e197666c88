#include "cogforest/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogforest/feature_io.hpp"

namespace cogforest {

std::string_view noise_reason_name(NoiseReason r) {
  return r == NoiseReason::kClusterSize ? "cluster_size" : "depth_layer";
}

void NoiseReport::merge(const NoiseReport& other) {
  for (const auto& [row, why] : other.reason) reason[row] = why;
  for (const auto& [row, pct] : other.density_percentile) density_percentile[row] = pct;
  flagged.clear();
  for (const auto& [row, why] : reason) flagged.push_back(row);
}

std::size_t density_cap(double p_d, std::size_t class_size) {
  const double exact = p_d * static_cast<double>(class_size);
  // 0.1 * 30 evaluates to 3.0000000000000004; snap such products before ceil.
  const double nearest = std::round(exact);
  const double cap = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
  return static_cast<std::size_t>(cap);
}

std::map<std::size_t, NoiseReason> noise_candidates(const CLForest& f, const NoiseParams& p) {
  p.validate();
  std::map<std::size_t, NoiseReason> out;
  for (const auto& node : f.nodes()) {
    const std::size_t tree = f.tree_of(node.id);
    const std::size_t bottom = f.tree_max_depth(tree);
    if (f.tree_size(tree) < p.n_min) {
      for (std::size_t m : node.members) out[m] = NoiseReason::kClusterSize;
      continue;
    }
    // Bottom n_l layers: depth in [max_depth - n_l + 1, max_depth].
    const bool in_bottom_layers = p.n_l > 0 && node.depth + p.n_l > bottom;
    if (node.depth >= p.n_d && in_bottom_layers) {
      for (std::size_t m : node.members) out[m] = NoiseReason::kDepthLayer;
    }
  }
  return out;
}

NoiseReport select_noise(const CLForest& f, const DensityVector& rho, const NoiseParams& p) {
  p.validate();
  const std::size_t n = f.size();
  if (rho.size() != n) throw InputError("density vector does not match the forest's samples");

  // samples() is ascending by row, so local index order is row order.
  std::vector<std::size_t> ascending(n);
  std::iota(ascending.begin(), ascending.end(), std::size_t{0});
  std::stable_sort(ascending.begin(), ascending.end(),
                   [&](std::size_t a, std::size_t b) { return rho.rho[a] < rho.rho[b]; });

  NoiseReport report;
  std::vector<std::size_t> rank(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    rank[ascending[pos]] = pos;
    report.density_percentile[f.samples()[ascending[pos]]] = static_cast<double>(pos) / static_cast<double>(n);
  }

  const std::size_t cap = density_cap(p.p_d, n);
  for (const auto& [row, why] : noise_candidates(f, p)) {
    if (rank[f.local_index(row)] < cap) {
      report.reason[row] = why;
      report.flagged.push_back(row);
    }
  }
  return report;
}

std::vector<bool> noise_mask(const NoiseReport& r, std::size_t rows) {
  std::vector<bool> mask(rows, false);
  for (std::size_t row : r.flagged) {
    if (row >= rows) throw InputError("flagged row outside range");
    mask[row] = true;
  }
  return mask;
}

std::string noise_to_csv(const NoiseReport& r, std::span<const std::string> ids_by_row) {
  std::string out = "id,reason,density_percentile\n";
  for (std::size_t row : r.flagged) {
    out += ids_by_row[row];
    out += ',';
    out += noise_reason_name(r.reason.at(row));
    out += ',';
    out += format_real(r.density_percentile.at(row));
    out += '\n';
  }
  return out;
}

}  // namespace cogforest

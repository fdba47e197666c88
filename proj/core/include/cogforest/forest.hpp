#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cogforest/density.hpp"
#include "cogforest/distance.hpp"
#include "cogforest/types.hpp"

namespace cogforest {

using NodeId = std::size_t;

/// Which radius bounds the leader search of a freshly created coarse node.
enum class LeaderRadius {
  kDensityRadius,  // d_rd (default)
  kNodeRadius,     // d_rn
};

std::string_view leader_radius_name(LeaderRadius r);
LeaderRadius parse_leader_radius(std::string_view name);

struct BuildOptions {
  Metric metric = Metric::kEuclidean;
  LeaderRadius leader_radius = LeaderRadius::kDensityRadius;
};

/// Radii and options a forest was built with, in absolute units.
struct ForestParams {
  double d_rd = 0.0;
  double d_rn = 0.0;
  Metric metric = Metric::kEuclidean;
  LeaderRadius leader_radius = LeaderRadius::kDensityRadius;
};

/// A group of near-duplicate samples represented by its densest member.
/// Sample references (`prototype`, `members`) are row indices into the
/// feature matrix the forest was built from.
struct CoarseNode {
  NodeId id = 0;
  std::size_t prototype = 0;
  std::vector<std::size_t> members;  // prototype first, then ascending row
  std::optional<NodeId> leader;
  std::vector<NodeId> children;
  std::size_t depth = 0;

  bool operator==(const CoarseNode&) const = default;
};

/// Coarse-grained leading forest of one class.
///
/// In built forests node ids follow creation order, so a leader always has a
/// smaller id than its follower. The constructor checks structural
/// invariants of any input, built or parsed: ids are
/// dense, member sets partition `samples`, leader/children links agree,
/// links are acyclic, depths are consistent and roots are exactly the
/// leaderless nodes.
class CLForest {
 public:
  CLForest(int class_label, ForestParams params, std::vector<std::size_t> samples,
           std::vector<std::string> sample_ids, std::vector<CoarseNode> nodes);

  int class_label() const { return class_label_; }
  const ForestParams& params() const { return params_; }
  /// Row indices of the class, ascending.
  const std::vector<std::size_t>& samples() const { return samples_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<CoarseNode>& nodes() const { return nodes_; }
  const CoarseNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& roots() const { return roots_; }

  std::size_t size() const { return samples_.size(); }
  std::size_t tree_count() const { return roots_.size(); }

  bool contains(std::size_t sample) const { return node_of_.count(sample) != 0; }
  /// Node holding a sample; throws InputError for samples outside the class.
  NodeId node_of(std::size_t sample) const;
  /// Position of a sample within `samples()`.
  std::size_t local_index(std::size_t sample) const;
  const std::string& sample_id(std::size_t sample) const { return sample_ids_[local_index(sample)]; }

  NodeId root_of(NodeId node) const { return root_of_[node]; }
  /// Index into `roots()` of the tree containing a node.
  std::size_t tree_of(NodeId node) const { return tree_of_[node]; }
  /// Total member count of the tree rooted at roots()[tree].
  std::size_t tree_size(std::size_t tree) const { return tree_sizes_[tree]; }
  std::size_t tree_max_depth(std::size_t tree) const { return tree_depths_[tree]; }

  bool operator==(const CLForest& other) const;

 private:
  int class_label_;
  ForestParams params_;
  std::vector<std::size_t> samples_;
  std::vector<std::string> sample_ids_;
  std::vector<CoarseNode> nodes_;
  std::vector<NodeId> roots_;
  std::unordered_map<std::size_t, NodeId> node_of_;
  std::unordered_map<std::size_t, std::size_t> local_;
  std::vector<NodeId> root_of_;
  std::vector<std::size_t> tree_of_;
  std::vector<std::size_t> tree_sizes_;
  std::vector<std::size_t> tree_depths_;
};

/// Builds the forest of one class from its precomputed distances and
/// densities. `rows[k]` is the feature-matrix row of local sample k; `d` and
/// `rho` are indexed locally. Radii must already be absolute.
CLForest build_clf(const DistanceMatrix& d, const DensityVector& rho, std::span<const std::size_t> rows,
                   std::span<const std::string> ids, int class_label, double d_rd, double d_rn,
                   LeaderRadius leader_radius = LeaderRadius::kDensityRadius);

/// Builds the forest of the given rows (all of one class). Relative radii
/// are resolved against the base distance of those rows.
CLForest build_clf(const FeatureMatrix& x, std::span<const std::size_t> rows, int class_label,
                   const ClfParams& params, const BuildOptions& options = {});

/// One forest per class, ascending by label. Relative radii are resolved
/// once against the base distance of the whole matrix, so every class
/// shares the same absolute radii.
std::vector<CLForest> build_forests(const FeatureMatrix& x, const ClfParams& params,
                                    const BuildOptions& options = {});

/// Densities of a forest's samples, recomputed from features with the
/// forest's own metric and d_rd. Indexed like `forest.samples()`.
DensityVector class_density(const Matrix& features, const CLForest& forest);

struct ForestStats {
  std::size_t trees = 0;
  std::size_t nodes = 0;
  std::size_t samples = 0;
  std::size_t max_depth = 0;
  std::size_t leaves = 0;  // equals the number of root-to-leaf paths
  /// member count -> number of coarse nodes of that size
  std::map<std::size_t, std::size_t> node_size_histogram;
  /// samples per tree -> number of trees of that size
  std::map<std::size_t, std::size_t> tree_size_histogram;
};

ForestStats forest_stats(const CLForest& f);

// JSON document: {class, params, samples:[{index,id}], nodes:[{id, prototype,
// members, leader, children, depth}], roots}. Parsing re-runs the structural
// validation of CLForest.
std::string forest_to_json(const CLForest& f, int indent = 2);
CLForest forest_from_json(std::string_view text);
std::string stats_to_json(const ForestStats& s, int indent = -1);

}  // namespace cogforest

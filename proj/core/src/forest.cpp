#include "cogforest/forest.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cogforest {

std::string_view leader_radius_name(LeaderRadius r) {
  return r == LeaderRadius::kDensityRadius ? "d_rd" : "d_rn";
}

LeaderRadius parse_leader_radius(std::string_view name) {
  if (name == "d_rd" || name == "density") return LeaderRadius::kDensityRadius;
  if (name == "d_rn" || name == "node") return LeaderRadius::kNodeRadius;
  throw InputError("unknown leader radius '" + std::string(name) + "'");
}

CLForest::CLForest(int class_label, ForestParams params, std::vector<std::size_t> samples,
                   std::vector<std::string> sample_ids, std::vector<CoarseNode> nodes)
    : class_label_(class_label), params_(params), nodes_(std::move(nodes)) {
  if (samples.empty()) throw InputError("forest of class " + std::to_string(class_label) + " has no samples");
  if (sample_ids.size() != samples.size()) throw InputError("forest sample ids do not match samples");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
  samples_.reserve(samples.size());
  sample_ids_.reserve(samples.size());
  for (std::size_t k : order) {
    if (!samples_.empty() && samples_.back() == samples[k]) {
      throw InputError("forest lists sample " + std::to_string(samples[k]) + " twice");
    }
    samples_.push_back(samples[k]);
    sample_ids_.push_back(std::move(sample_ids[k]));
  }
  for (std::size_t k = 0; k < samples_.size(); ++k) local_.emplace(samples_[k], k);

  const std::size_t count = nodes_.size();
  if (count == 0) throw InputError("forest of class " + std::to_string(class_label) + " has no nodes");

  std::vector<std::vector<NodeId>> followers(count);
  for (std::size_t k = 0; k < count; ++k) {
    const CoarseNode& n = nodes_[k];
    if (n.id != k) throw InputError("node ids must be 0..K-1 in order (node " + std::to_string(k) + ")");
    if (n.members.empty()) throw InputError("node " + std::to_string(k) + " has no members");
    if (std::find(n.members.begin(), n.members.end(), n.prototype) == n.members.end()) {
      throw InputError("node " + std::to_string(k) + " does not contain its prototype");
    }
    for (std::size_t m : n.members) {
      if (!local_.count(m)) throw InputError("node " + std::to_string(k) + " references unknown sample " + std::to_string(m));
      if (!node_of_.emplace(m, k).second) {
        throw InputError("sample " + std::to_string(m) + " belongs to more than one node");
      }
    }
    if (n.leader) {
      if (*n.leader >= count || *n.leader == k) throw InputError("node " + std::to_string(k) + " has an invalid leader");
      followers[*n.leader].push_back(k);
    } else {
      roots_.push_back(k);
    }
  }
  if (node_of_.size() != samples_.size()) throw InputError("some samples belong to no node");

  for (std::size_t k = 0; k < count; ++k) {
    auto given = nodes_[k].children;
    std::sort(given.begin(), given.end());
    if (given != followers[k]) {
      throw InputError("children of node " + std::to_string(k) + " disagree with leader links");
    }
  }

  // Resolve roots and depths by walking leader links; a walk longer than the
  // node count means a cycle.
  root_of_.assign(count, 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t steps = 0;
    NodeId cur = k;
    while (nodes_[cur].leader) {
      cur = *nodes_[cur].leader;
      if (++steps > count) throw InputError("leader links contain a cycle");
    }
    root_of_[k] = cur;
    if (nodes_[k].depth != steps) {
      throw InputError("node " + std::to_string(k) + " records depth " + std::to_string(nodes_[k].depth) +
                       " but lies " + std::to_string(steps) + " edges below its root");
    }
  }

  std::vector<std::size_t> tree_index(count, 0);
  for (std::size_t t = 0; t < roots_.size(); ++t) tree_index[roots_[t]] = t;
  tree_of_.resize(count);
  tree_sizes_.assign(roots_.size(), 0);
  tree_depths_.assign(roots_.size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t t = tree_index[root_of_[k]];
    tree_of_[k] = t;
    tree_sizes_[t] += nodes_[k].members.size();
    tree_depths_[t] = std::max(tree_depths_[t], nodes_[k].depth);
  }
}

NodeId CLForest::node_of(std::size_t sample) const {
  auto it = node_of_.find(sample);
  if (it == node_of_.end()) {
    throw InputError("sample " + std::to_string(sample) + " is not in the forest of class " +
                     std::to_string(class_label_));
  }
  return it->second;
}

std::size_t CLForest::local_index(std::size_t sample) const {
  auto it = local_.find(sample);
  if (it == local_.end()) {
    throw InputError("sample " + std::to_string(sample) + " is not in the forest of class " +
                     std::to_string(class_label_));
  }
  return it->second;
}

bool CLForest::operator==(const CLForest& other) const {
  return class_label_ == other.class_label_ && params_.d_rd == other.params_.d_rd &&
         params_.d_rn == other.params_.d_rn && params_.metric == other.params_.metric &&
         params_.leader_radius == other.params_.leader_radius && samples_ == other.samples_ &&
         sample_ids_ == other.sample_ids_ && nodes_ == other.nodes_;
}

CLForest build_clf(const DistanceMatrix& d, const DensityVector& rho, std::span<const std::size_t> rows,
                   std::span<const std::string> ids, int class_label, double d_rd, double d_rn,
                   LeaderRadius leader_radius) {
  const std::size_t n = rows.size();
  if (n == 0) throw InputError("class " + std::to_string(class_label) + " has no samples");
  if (d.size() != n || rho.size() != n || ids.size() != n) {
    throw InputError("distance, density and row counts disagree");
  }
  if (!(d_rd > 0.0) || !(d_rn > 0.0)) throw InputError("forest radii must be > 0");

  const double leader_bound = leader_radius == LeaderRadius::kDensityRadius ? d_rd : d_rn;
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> prototype_local;
  std::vector<CoarseNode> nodes;

  for (std::size_t s : rho.ordering) {
    if (visited[s]) continue;
    const NodeId id = nodes.size();
    CoarseNode node;
    node.id = id;
    node.prototype = rows[s];
    node.members.push_back(rows[s]);
    visited[s] = true;
    const auto dist = d.row(s);
    for (std::size_t j = 0; j < n; ++j) {
      if (!visited[j] && dist[j] <= d_rn) {
        visited[j] = true;
        node.members.push_back(rows[j]);
      }
    }
    std::sort(node.members.begin() + 1, node.members.end());

    // Every node created so far has a prototype earlier in the density order.
    std::optional<NodeId> leader;
    double best = std::numeric_limits<double>::infinity();
    for (NodeId p = 0; p < id; ++p) {
      const double dp = dist[prototype_local[p]];
      if (dp <= leader_bound && dp < best) {
        best = dp;
        leader = p;
      }
    }
    if (leader) {
      node.leader = leader;
      node.depth = nodes[*leader].depth + 1;
      nodes[*leader].children.push_back(id);
    }
    prototype_local.push_back(s);
    nodes.push_back(std::move(node));
  }

  ForestParams params{d_rd, d_rn, d.metric(), leader_radius};
  return CLForest(class_label, params, {rows.begin(), rows.end()}, {ids.begin(), ids.end()}, std::move(nodes));
}

CLForest build_clf(const FeatureMatrix& x, std::span<const std::size_t> rows, int class_label,
                   const ClfParams& params, const BuildOptions& options) {
  if (rows.empty()) throw InputError("class " + std::to_string(class_label) + " has no samples");
  for (std::size_t r : rows) {
    if (r >= x.size()) throw InputError("row " + std::to_string(r) + " is out of range");
    if (x.label(r) != class_label) {
      throw InputError("sample '" + x.id(r) + "' does not carry class " + std::to_string(class_label));
    }
  }
  const DistanceMatrix d = pairwise_distances(x.features(), rows, options.metric);
  ClfParams resolved = params;
  if (!params.resolved()) {
    if (rows.size() < 2) throw InputError("relative radii need at least two samples in class " + std::to_string(class_label));
    resolved = resolve_params(params, d);
  }
  resolved.validate();
  const DensityVector rho = compute_density(d, resolved.d_rd.value);
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (std::size_t r : rows) ids.push_back(x.id(r));
  return build_clf(d, rho, rows, ids, class_label, resolved.d_rd.value, resolved.d_rn.value, options.leader_radius);
}

std::vector<CLForest> build_forests(const FeatureMatrix& x, const ClfParams& params, const BuildOptions& options) {
  params.validate();
  ClfParams resolved = params;
  if (!params.resolved()) {
    const double base = base_distance(pairwise_distances(x, options.metric));
    if (!(base > 0.0)) throw InputError("base distance is zero; all samples coincide");
    resolved = resolve_params(params, base);
  }
  std::vector<CLForest> forests;
  for (int label : x.classes()) {
    const auto rows = x.class_rows(label);
    forests.push_back(build_clf(x, rows, label, resolved, options));
  }
  return forests;
}

DensityVector class_density(const Matrix& features, const CLForest& forest) {
  const DistanceMatrix d = pairwise_distances(features, forest.samples(), forest.params().metric);
  return compute_density(d, forest.params().d_rd);
}

ForestStats forest_stats(const CLForest& f) {
  ForestStats s;
  s.trees = f.tree_count();
  s.nodes = f.nodes().size();
  s.samples = f.size();
  for (const auto& n : f.nodes()) {
    s.max_depth = std::max(s.max_depth, n.depth);
    if (n.children.empty()) ++s.leaves;
    ++s.node_size_histogram[n.members.size()];
  }
  for (std::size_t t = 0; t < f.tree_count(); ++t) ++s.tree_size_histogram[f.tree_size(t)];
  return s;
}

}  // namespace cogforest

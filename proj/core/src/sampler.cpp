#include "cogforest/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cogforest/feature_io.hpp"

namespace cogforest {

PathSet generate_paths(const CLForest& f) {
  PathSet out;
  out.repetition.assign(f.nodes().size(), 0);
  // (node, index of next child to visit)
  std::vector<std::pair<NodeId, std::size_t>> stack;
  std::vector<NodeId> path;
  for (NodeId root : f.roots()) {
    stack.emplace_back(root, 0);
    path.push_back(root);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& children = f.node(node).children;
      if (children.empty()) {
        out.paths.push_back(path);
        for (NodeId n : path) ++out.repetition[n];
      }
      if (next < children.size()) {
        const NodeId child = children[next++];
        stack.emplace_back(child, 0);
        path.push_back(child);
      } else {
        stack.pop_back();
        path.pop_back();
      }
    }
  }
  return out;
}

std::vector<double> resample_probs(std::span<const std::size_t> counts, double q) {
  if (counts.empty()) throw InputError("resample_probs needs at least one count");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("balance factor q must lie in [0, 1]");
  std::vector<double> p(counts.size());
  double total = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) throw InputError("resample_probs counts must be >= 1");
    p[j] = std::pow(static_cast<double>(counts[j]), q);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

double SampleWeights::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

bool is_excluded(const std::vector<bool>& excluded, std::size_t row) {
  return row < excluded.size() && excluded[row];
}

}  // namespace

AttributeWeightTrace trace_attribute_weights(const CLForest& f, double q_attr, const std::vector<bool>& excluded) {
  const std::size_t node_count = f.nodes().size();
  AttributeWeightTrace t;
  t.live_members.assign(node_count, 0);
  for (const auto& n : f.nodes()) {
    for (std::size_t m : n.members) {
      if (!is_excluded(excluded, m)) ++t.live_members[n.id];
    }
  }

  const PathSet full = generate_paths(f);
  t.paths.repetition.assign(node_count, 0);
  for (const auto& p : full.paths) {
    std::vector<NodeId> live;
    for (NodeId n : p) {
      if (t.live_members[n] > 0) live.push_back(n);
    }
    if (live.empty()) continue;
    std::size_t count = 0;
    for (NodeId n : live) {
      ++t.paths.repetition[n];
      count += t.live_members[n];
    }
    t.path_counts.push_back(count);
    t.paths.paths.push_back(std::move(live));
  }

  t.accumulated.assign(node_count, 0.0);
  t.node_weights.assign(node_count, 0.0);
  t.raw.samples = f.samples();
  t.raw.weights.assign(f.size(), 0.0);
  t.raw.scope = WeightScope::kClassLocal;
  if (t.paths.paths.empty()) return t;

  t.path_weights = resample_probs(t.path_counts, q_attr);
  for (std::size_t p = 0; p < t.paths.paths.size(); ++p) {
    const auto& path = t.paths.paths[p];
    const double share = t.path_weights[p] / static_cast<double>(path.size());
    for (NodeId n : path) t.accumulated[n] += share;
  }
  for (NodeId n = 0; n < node_count; ++n) {
    if (t.paths.repetition[n] > 0) t.node_weights[n] = t.accumulated[n] / static_cast<double>(t.paths.repetition[n]);
  }
  for (const auto& n : f.nodes()) {
    if (t.live_members[n.id] == 0) continue;
    const double per_member = t.node_weights[n.id] / static_cast<double>(t.live_members[n.id]);
    for (std::size_t m : n.members) {
      if (!is_excluded(excluded, m)) t.raw.weights[f.local_index(m)] = per_member;
    }
  }
  return t;
}

SampleWeights attribute_weights(const CLForest& f, double q_attr, const std::vector<bool>& excluded, bool normalize) {
  SampleWeights w = trace_attribute_weights(f, q_attr, excluded).raw;
  if (!normalize) return w;
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw InputError("class " + std::to_string(f.class_label()) + " has every sample excluded");
  }
  for (double& v : w.weights) v /= total;
  return w;
}

Environment build_environment(const FeatureMatrix& x, std::span<const CLForest> forests, const EnvParams& env,
                              const std::vector<bool>& excluded, int env_id) {
  env.validate();
  if (forests.empty()) throw InputError("no forests given");
  if (!excluded.empty() && excluded.size() != x.size()) throw InputError("exclusion mask size does not match samples");

  std::vector<bool> covered(x.size(), false);
  std::vector<std::size_t> live_counts;
  for (const auto& f : forests) {
    std::size_t live = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const std::size_t row = f.samples()[k];
      if (row >= x.size() || x.id(row) != f.sample_ids()[k]) {
        throw InputError("forest of class " + std::to_string(f.class_label()) + " references sample '" +
                         f.sample_ids()[k] + "' that does not match the feature matrix");
      }
      if (covered[row]) throw InputError("sample '" + x.id(row) + "' appears in more than one forest");
      covered[row] = true;
      if (!is_excluded(excluded, row)) ++live;
    }
    if (live == 0) throw InputError("class " + std::to_string(f.class_label()) + " has every sample excluded");
    live_counts.push_back(live);
  }
  for (std::size_t row = 0; row < x.size(); ++row) {
    if (!covered[row]) throw InputError("sample '" + x.id(row) + "' is not covered by any forest");
  }

  const auto class_mass = resample_probs(live_counts, env.q_cls);
  Environment out;
  out.env_id = env_id;
  out.params = env;
  out.weights.assign(x.size(), 0.0);
  for (std::size_t c = 0; c < forests.size(); ++c) {
    const SampleWeights local = attribute_weights(forests[c], env.q_attr, excluded);
    for (std::size_t k = 0; k < local.samples.size(); ++k) {
      out.weights[local.samples[k]] = class_mass[c] * local.weights[k];
    }
  }
  for (std::size_t row = 0; row < x.size(); ++row) {
    if (is_excluded(excluded, row)) out.excluded.push_back(row);
  }
  return out;
}

BatchSampler::BatchSampler(std::span<const double> weights, std::uint64_t seed)
    : rng_(seed), dist_(weights.begin(), weights.end()) {
  if (weights.empty() || !(std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0)) {
    throw InputError("cannot sample from an all-zero weight vector");
  }
}

std::vector<std::size_t> BatchSampler::next(std::size_t batch_size) {
  std::vector<std::size_t> out(batch_size);
  for (auto& r : out) r = dist_(rng_);
  return out;
}

std::vector<std::size_t> draw_batch(const Environment& env, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw InputError("batch size must be >= 1");
  BatchSampler sampler(env.weights, seed);
  return sampler.next(batch_size);
}

std::string weights_to_csv(const SampleWeights& w, std::span<const std::string> ids_by_row) {
  std::string out = "id,weight\n";
  for (std::size_t k = 0; k < w.samples.size(); ++k) {
    out += ids_by_row[w.samples[k]];
    out += ',';
    out += format_real(w.weights[k]);
    out += '\n';
  }
  return out;
}

std::string environment_to_csv(const Environment& env, std::span<const std::string> ids_by_row) {
  std::string out = "id,weight\n";
  for (std::size_t row = 0; row < env.weights.size(); ++row) {
    out += ids_by_row[row];
    out += ',';
    out += format_real(env.weights[row]);
    out += '\n';
  }
  return out;
}

std::string weights_to_json(const SampleWeights& w, std::span<const std::string> ids_by_row) {
  nlohmann::ordered_json doc;
  doc["scope"] = w.scope == WeightScope::kClassLocal ? "class-local" : "global";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < w.samples.size(); ++k) {
    rows.push_back({{"id", ids_by_row[w.samples[k]]}, {"weight", w.weights[k]}});
  }
  doc["weights"] = std::move(rows);
  return doc.dump(2);
}

std::string environment_to_json(const Environment& env, std::span<const std::string> ids_by_row) {
  nlohmann::ordered_json doc;
  doc["env_id"] = env.env_id;
  doc["q_cls"] = env.params.q_cls;
  doc["q_attr"] = env.params.q_attr;
  nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
  for (std::size_t row : env.excluded) excluded.push_back(ids_by_row[row]);
  doc["excluded"] = std::move(excluded);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t row = 0; row < env.weights.size(); ++row) {
    rows.push_back({{"id", ids_by_row[row]}, {"weight", env.weights[row]}});
  }
  doc["weights"] = std::move(rows);
  return doc.dump(2);
}

}  // namespace cogforest

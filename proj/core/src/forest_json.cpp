#include <json.hpp>

#include "cogforest/forest.hpp"

namespace cogforest {

using nlohmann::json;
using nlohmann::ordered_json;

std::string forest_to_json(const CLForest& f, int indent) {
  ordered_json doc;
  doc["class"] = f.class_label();
  doc["params"] = {{"d_rd", f.params().d_rd},
                   {"d_rn", f.params().d_rn},
                   {"metric", std::string(metric_name(f.params().metric))},
                   {"leader_radius", std::string(leader_radius_name(f.params().leader_radius))}};
  ordered_json samples = ordered_json::array();
  for (std::size_t k = 0; k < f.size(); ++k) {
    samples.push_back({{"index", f.samples()[k]}, {"id", f.sample_ids()[k]}});
  }
  doc["samples"] = std::move(samples);
  ordered_json nodes = ordered_json::array();
  for (const auto& n : f.nodes()) {
    ordered_json node;
    node["id"] = n.id;
    node["prototype"] = n.prototype;
    node["members"] = n.members;
    node["leader"] = n.leader ? ordered_json(*n.leader) : ordered_json(nullptr);
    node["children"] = n.children;
    node["depth"] = n.depth;
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  doc["roots"] = f.roots();
  return doc.dump(indent);
}

CLForest forest_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("forest JSON: ") + e.what());
  }
  try {
    ForestParams params;
    const auto& p = doc.at("params");
    params.d_rd = p.at("d_rd").get<double>();
    params.d_rn = p.at("d_rn").get<double>();
    params.metric = parse_metric(p.value("metric", std::string("euclidean")));
    params.leader_radius = parse_leader_radius(p.value("leader_radius", std::string("d_rd")));

    std::vector<std::size_t> samples;
    std::vector<std::string> ids;
    for (const auto& s : doc.at("samples")) {
      samples.push_back(s.at("index").get<std::size_t>());
      ids.push_back(s.at("id").get<std::string>());
    }
    std::vector<CoarseNode> nodes;
    for (const auto& n : doc.at("nodes")) {
      CoarseNode node;
      node.id = n.at("id").get<NodeId>();
      node.prototype = n.at("prototype").get<std::size_t>();
      node.members = n.at("members").get<std::vector<std::size_t>>();
      if (!n.at("leader").is_null()) node.leader = n.at("leader").get<NodeId>();
      node.children = n.at("children").get<std::vector<NodeId>>();
      node.depth = n.at("depth").get<std::size_t>();
      nodes.push_back(std::move(node));
    }
    CLForest forest(doc.at("class").get<int>(), params, std::move(samples), std::move(ids), std::move(nodes));
    if (doc.contains("roots") && doc.at("roots").get<std::vector<NodeId>>() != forest.roots()) {
      throw InputError("forest JSON: roots do not match leaderless nodes");
    }
    return forest;
  } catch (const json::exception& e) {
    throw InputError(std::string("forest JSON: ") + e.what());
  }
}

std::string stats_to_json(const ForestStats& s, int indent) {
  ordered_json doc;
  doc["trees"] = s.trees;
  doc["nodes"] = s.nodes;
  doc["samples"] = s.samples;
  doc["max_depth"] = s.max_depth;
  doc["paths"] = s.leaves;
  ordered_json nodes = ordered_json::object();
  for (const auto& [size, count] : s.node_size_histogram) nodes[std::to_string(size)] = count;
  ordered_json trees = ordered_json::object();
  for (const auto& [size, count] : s.tree_size_histogram) trees[std::to_string(size)] = count;
  doc["node_sizes"] = std::move(nodes);
  doc["tree_sizes"] = std::move(trees);
  return doc.dump(indent);
}

}  // namespace cogforest

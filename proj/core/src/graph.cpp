#include "drystack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "drystack/design_io.hpp"
#include "drystack/errors.hpp"
#include "drystack/geometry.hpp"

namespace drystack {

using nlohmann::json;

double EdgeForce::magnitude() const {
  return std::sqrt(f_normal * f_normal + f_tangential.squaredNorm());
}

int AssemblyGraph::find_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].first == i && edges[e].second == j) return static_cast<int>(e);
  return -1;
}

std::vector<std::vector<int>> AssemblyGraph::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::size_t AssemblyGraph::placed_count() const {
  std::size_t n = 0;
  for (char c : placed_mask) n += c != 0;
  return n;
}

Eigen::MatrixXd AssemblyGraph::node_features() const {
  Eigen::MatrixXd X(nodes.size(), 16);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const BrickSpec& b = nodes[i];
    X(i, 0) = b.position.x();
    X(i, 1) = b.position.y();
    X(i, 2) = b.position.z();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) X(i, 3 + 3 * r + c) = b.rotation(r, c);
    X(i, 12) = b.dimensions.x();
    X(i, 13) = b.dimensions.y();
    X(i, 14) = b.dimensions.z();
    X(i, 15) = b.mass;
  }
  return X;
}

AssemblyGraph build_graph(const Design& design, double contact_threshold) {
  if (contact_threshold <= 0.0) throw ValidationError("contact_threshold must be positive");
  AssemblyGraph g;
  g.nodes = design.bricks;
  g.placed_mask.assign(g.nodes.size(), 1);

  const std::size_t n = g.nodes.size();
  std::vector<Obb> boxes(n);
  std::vector<Vec3> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    boxes[i] = obb_of(g.nodes[i]);
    obb_aabb(boxes[i], contact_threshold, &lo[i], &hi[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool aabb_hit = (lo[i].array() <= hi[j].array()).all() &&
                            (lo[j].array() <= hi[i].array()).all();
      if (!aabb_hit) continue;
      if (obb_surface_distance(boxes[i], boxes[j]) < contact_threshold)
        g.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  g.edge_forces.assign(g.edges.size(), EdgeForce{});
  return g;
}

AssemblyGraph subgraph(const AssemblyGraph& graph, const std::vector<int>& node_indices) {
  AssemblyGraph out;
  std::vector<int> remap(graph.size(), -1);
  for (std::size_t k = 0; k < node_indices.size(); ++k) {
    const int idx = node_indices[k];
    if (idx < 0 || static_cast<std::size_t>(idx) >= graph.size())
      throw ValidationError("subgraph: node index out of range");
    if (remap[idx] != -1) throw ValidationError("subgraph: duplicate node index");
    remap[idx] = static_cast<int>(k);
    out.nodes.push_back(graph.nodes[idx]);
    out.placed_mask.push_back(graph.placed_mask.empty() ? 1 : graph.placed_mask[idx]);
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& [i, j] = graph.edges[e];
    if (remap[i] >= 0 && remap[j] >= 0) {
      int a = remap[i], b = remap[j];
      if (a > b) std::swap(a, b);
      out.edges.emplace_back(a, b);
      out.edge_forces.push_back(graph.edge_forces.empty() ? EdgeForce{} : graph.edge_forces[e]);
    }
  }
  out.annotated = graph.annotated;
  return out;
}

std::vector<int> grounded_nodes(const AssemblyGraph& graph, double threshold) {
  std::vector<int> out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!graph.placed_mask.empty() && !graph.placed_mask[i]) continue;
    const auto verts = obb_vertices(obb_of(graph.nodes[i]));
    double min_z = verts[0].z();
    for (const auto& v : verts) min_z = std::min(min_z, v.z());
    if (min_z <= threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

json graph_to_json(const AssemblyGraph& graph) {
  json j;
  j["nodes"] = json::array();
  for (const auto& b : graph.nodes) {
    json bj;
    bj["id"] = b.id;
    bj["position"] = {b.position.x(), b.position.y(), b.position.z()};
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rot.push_back(b.rotation(r, c));
    bj["rotation"] = rot;
    bj["dimensions"] = {b.dimensions.x(), b.dimensions.y(), b.dimensions.z()};
    bj["mass"] = b.mass;
    j["nodes"].push_back(std::move(bj));
  }
  j["edges"] = json::array();
  for (const auto& [a, b] : graph.edges) j["edges"].push_back({a, b});
  j["forces"] = json::array();
  for (const auto& f : graph.edge_forces)
    j["forces"].push_back({f.f_normal, f.f_tangential.x(), f.f_tangential.y(), f.f_tangential.z()});
  j["placed"] = json::array();
  for (char c : graph.placed_mask) j["placed"].push_back(c != 0);
  j["annotated"] = graph.annotated;
  return j;
}

AssemblyGraph graph_from_json(const json& j) {
  AssemblyGraph g;
  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw FormatError("graph: missing 'nodes' array");
  for (const auto& bj : j["nodes"]) {
    BrickSpec b;
    b.id = bj.at("id").get<int>();
    const auto& p = bj.at("position");
    b.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    const auto& r = bj.at("rotation");
    for (int rr = 0; rr < 3; ++rr)
      for (int cc = 0; cc < 3; ++cc) b.rotation(rr, cc) = r[3 * rr + cc].get<double>();
    const auto& d = bj.at("dimensions");
    b.dimensions = Vec3(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
    b.mass = bj.at("mass").get<double>();
    g.nodes.push_back(b);
  }
  if (j.contains("edges"))
    for (const auto& e : j["edges"]) {
      int a = e[0].get<int>(), b = e[1].get<int>();
      if (a > b) std::swap(a, b);
      if (a < 0 || static_cast<std::size_t>(b) >= g.nodes.size())
        throw ValidationError("graph: edge references invalid node index");
      g.edges.emplace_back(a, b);
    }
  if (j.contains("forces")) {
    for (const auto& f : j["forces"]) {
      EdgeForce ef;
      ef.f_normal = f[0].get<double>();
      ef.f_tangential = Vec3(f[1].get<double>(), f[2].get<double>(), f[3].get<double>());
      g.edge_forces.push_back(ef);
    }
  }
  g.edge_forces.resize(g.edges.size());
  if (j.contains("placed"))
    for (const auto& p : j["placed"]) g.placed_mask.push_back(p.get<bool>() ? 1 : 0);
  if (g.placed_mask.size() != g.nodes.size()) g.placed_mask.assign(g.nodes.size(), 1);
  g.annotated = j.value("annotated", false);
  return g;
}

void save_graph(const AssemblyGraph& graph, const std::string& path) {
  write_text_file(path, graph_to_json(graph).dump(2) + "\n");
}

AssemblyGraph load_graph(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError("graph file '" + path + "': " + e.what());
  }
  return graph_from_json(j);
}

}  // namespace drystack

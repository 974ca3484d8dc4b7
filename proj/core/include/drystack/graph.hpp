#pragma once

#include <nlohmann/json_fwd.hpp>
#include <utility>
#include <vector>

#include "drystack/brick.hpp"

namespace drystack {

// Per-edge contact summary, zero until a relaxation annotates the graph.
struct EdgeForce {
  double f_normal = 0.0;        // magnitude of the normal component, N
  Vec3 f_tangential = Vec3::Zero();
  double area = 0.0;            // contact patch area, m^2

  double magnitude() const;     // ||[f_normal, f_tangential]||_2
};

// Contact graph over the bricks of one design. Edges are undirected and
// stored once with i < j. `placed_mask` marks the bricks considered present;
// geometry helpers ignore unplaced bricks.
struct AssemblyGraph {
  std::vector<BrickSpec> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<EdgeForce> edge_forces;
  std::vector<char> placed_mask;
  bool annotated = false;

  std::size_t size() const { return nodes.size(); }
  int find_edge(int i, int j) const;  // index into edges, -1 if absent
  std::vector<std::vector<int>> adjacency() const;
  std::size_t placed_count() const;

  // N x 16 feature matrix: position(3) | rotation row-major(9) | dims(3) | mass(1).
  Eigen::MatrixXd node_features() const;
};

inline constexpr double kContactThreshold = 1e-3;  // m

// Edges connect bricks whose minimal surface distance is below the threshold.
AssemblyGraph build_graph(const Design& design, double contact_threshold = kContactThreshold);

// Subgraph over `node_indices` (indices into graph.nodes). Edges between kept
// nodes survive with their forces; nodes are reindexed in the given order.
AssemblyGraph subgraph(const AssemblyGraph& graph, const std::vector<int>& node_indices);

// Returns indices of bricks whose lowest point is within `threshold` of z=0.
std::vector<int> grounded_nodes(const AssemblyGraph& graph, double threshold = kContactThreshold);

nlohmann::json graph_to_json(const AssemblyGraph& graph);
AssemblyGraph graph_from_json(const nlohmann::json& j);

void save_graph(const AssemblyGraph& graph, const std::string& path);
AssemblyGraph load_graph(const std::string& path);

}  // namespace drystack

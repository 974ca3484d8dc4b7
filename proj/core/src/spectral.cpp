#include "drystack/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <numeric>

#include "drystack/errors.hpp"

namespace drystack {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Collects the indices participating in the eigensolve: placed nodes, plus a
// trailing virtual ground node when requested.
std::vector<int> active_nodes(const AssemblyGraph& graph) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < graph.size(); ++i)
    if (graph.placed_mask.empty() || graph.placed_mask[i]) idx.push_back(static_cast<int>(i));
  return idx;
}

}  // namespace

double fiedler_value(const AssemblyGraph& graph, bool ground_attached) {
  const std::vector<int> idx = active_nodes(graph);
  if (idx.empty()) throw ValidationError("fiedler_value: graph has no placed nodes");
  std::vector<int> remap(graph.size(), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) remap[idx[k]] = static_cast<int>(k);

  const int n = static_cast<int>(idx.size()) + (ground_attached ? 1 : 0);
  if (n == 1) return 0.0;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  const auto add_edge = [&L](int a, int b) {
    L(a, a) += 1.0;
    L(b, b) += 1.0;
    L(a, b) -= 1.0;
    L(b, a) -= 1.0;
  };
  for (const auto& [i, j] : graph.edges) {
    if (remap[i] < 0 || remap[j] < 0) continue;
    add_edge(remap[i], remap[j]);
  }
  if (ground_attached) {
    const int ground = n - 1;
    for (int g : grounded_nodes(graph)) add_edge(remap[g], ground);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);  // ascending order; index 0 is always ~0
}

bool is_connected(const AssemblyGraph& graph, bool ground_attached) {
  const std::vector<int> idx = active_nodes(graph);
  if (idx.empty()) return true;
  std::vector<int> remap(graph.size(), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) remap[idx[k]] = static_cast<int>(k);

  const int n = static_cast<int>(idx.size()) + (ground_attached ? 1 : 0);
  UnionFind uf(n);
  for (const auto& [i, j] : graph.edges)
    if (remap[i] >= 0 && remap[j] >= 0) uf.unite(remap[i], remap[j]);
  if (ground_attached)
    for (int g : grounded_nodes(graph)) uf.unite(remap[g], n - 1);
  const int root = uf.find(0);
  for (int k = 1; k < n; ++k)
    if (uf.find(k) != root) return false;
  return true;
}

}  // namespace drystack

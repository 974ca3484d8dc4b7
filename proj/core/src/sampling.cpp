#include "drystack/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "drystack/errors.hpp"
#include "drystack/rng.hpp"

namespace drystack {

namespace {

AssemblyGraph one_hop(const AssemblyGraph& graph, const std::vector<int>& seeds,
                      const std::vector<std::vector<int>>& adj) {
  std::set<int> keep(seeds.begin(), seeds.end());
  for (int s : seeds)
    for (int nb : adj[s]) keep.insert(nb);
  return subgraph(graph, std::vector<int>(keep.begin(), keep.end()));
}

std::vector<int> ranked_nodes(const AssemblyGraph& graph,
                              const std::vector<double>& primary,
                              const std::vector<double>& secondary, Rng& rng) {
  std::vector<int> order(graph.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);  // seeded tie-break
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (primary[a] != primary[b]) return primary[a] > primary[b];
    return secondary[a] > secondary[b];
  });
  return order;
}

}  // namespace

std::vector<double> node_curvature(const AssemblyGraph& graph) {
  const auto adj = graph.adjacency();
  std::vector<double> curv(graph.size(), 0.0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (adj[i].empty()) continue;
    const Vec3 zi = graph.nodes[i].rotation.col(2);
    double acc = 0.0;
    for (int j : adj[i]) {
      const Vec3 zj = graph.nodes[j].rotation.col(2);
      const double c = std::clamp(zi.dot(zj), -1.0, 1.0);
      acc += std::acos(std::abs(c));
    }
    curv[i] = acc / adj[i].size();
  }
  return curv;
}

SupportSet sample_support_set(const AssemblyGraph& graph, int k, SampleStrategy strategy,
                              std::uint64_t seed, const std::string& source_class) {
  if (k < 1) throw ValidationError("sample_support_set: K must be >= 1");
  if (static_cast<std::size_t>(k) > graph.size())
    throw DomainError("sample_support_set: K exceeds the node count");
  Rng rng(seed);
  const auto adj = graph.adjacency();

  SupportSet out;
  out.source_class = source_class;

  if (strategy == SampleStrategy::kAttribute) {
    if (!graph.annotated)
      throw DomainError("sample_support_set: attribute strategy requires annotated edge forces");
    if (graph.edges.size() < static_cast<std::size_t>(k))
      throw DomainError("sample_support_set: K exceeds the edge count for attribute strategy");
    std::vector<int> order(graph.edges.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return graph.edge_forces[a].magnitude() > graph.edge_forces[b].magnitude();
    });
    for (int e = 0; e < k; ++e) {
      const auto& [i, j] = graph.edges[order[e]];
      out.subgraphs.push_back(one_hop(graph, {i, j}, adj));
    }
    return out;
  }

  std::vector<double> primary, secondary(graph.size(), 0.0);
  if (strategy == SampleStrategy::kGeometric) {
    primary = node_curvature(graph);
    for (std::size_t i = 0; i < graph.size(); ++i) secondary[i] = double(adj[i].size());
  } else {
    // Triangle participation: junctions and minimum cycles in a contact graph.
    primary.assign(graph.size(), 0.0);
    for (std::size_t i = 0; i < graph.size(); ++i) {
      int tri = 0;
      for (std::size_t a = 0; a < adj[i].size(); ++a)
        for (std::size_t b = a + 1; b < adj[i].size(); ++b)
          if (graph.find_edge(adj[i][a], adj[i][b]) >= 0) ++tri;
      primary[i] = tri;
      secondary[i] = double(adj[i].size());
    }
  }
  const auto order = ranked_nodes(graph, primary, secondary, rng);
  for (int n = 0; n < k; ++n) out.subgraphs.push_back(one_hop(graph, {order[n]}, adj));
  return out;
}

std::vector<ContrastiveTriple> contrastive_pairs(const std::vector<std::string>& labels,
                                                 const Eigen::MatrixXd& embeddings,
                                                 ContrastiveMode mode, double delta,
                                                 std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (embeddings.rows() != n)
    throw ValidationError("contrastive_pairs: embeddings not row-aligned with labels");
  std::set<std::string> classes(labels.begin(), labels.end());
  if (classes.size() < 2)
    throw DomainError("contrastive_pairs: dataset has a single class, no negatives available");

  Rng rng(seed);
  const auto pick_positive = [&](int anchor) {
    std::vector<int> same;
    for (int i = 0; i < n; ++i)
      if (i != anchor && labels[i] == labels[anchor]) same.push_back(i);
    if (same.empty()) return -1;
    return same[rng.randint(static_cast<int>(same.size()))];
  };

  std::vector<std::pair<int, int>> negatives;
  const double threshold = mode == ContrastiveMode::kHard ? 0.5 * delta : delta;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || labels[i] == labels[j]) continue;
      if (mode == ContrastiveMode::kRandom) {
        negatives.emplace_back(i, j);
      } else {
        const double d = (embeddings.row(i) - embeddings.row(j)).norm();
        if (d < threshold) negatives.emplace_back(i, j);
      }
    }
  }
  if (mode == ContrastiveMode::kRandom && negatives.size() > static_cast<std::size_t>(n)) {
    rng.shuffle(negatives);
    negatives.resize(n);
    std::sort(negatives.begin(), negatives.end());
  }

  std::vector<ContrastiveTriple> out;
  for (const auto& [a, neg] : negatives) {
    const int pos = pick_positive(a);
    if (pos < 0) continue;
    out.push_back({a, pos, neg});
  }
  return out;
}

AssemblyGraph augment(const AssemblyGraph& graph, double feature_noise_std, double edge_drop_prob,
                      std::uint64_t seed) {
  if (edge_drop_prob < 0.0 || edge_drop_prob >= 1.0)
    throw ValidationError("augment: edge_drop_prob must lie in [0,1)");
  if (feature_noise_std < 0.0) throw ValidationError("augment: feature_noise_std must be >= 0");
  Rng rng(seed);
  AssemblyGraph out;
  out.nodes = graph.nodes;
  out.placed_mask = graph.placed_mask;
  out.annotated = graph.annotated;

  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (edge_drop_prob > 0.0 && rng.uniform() < edge_drop_prob) continue;
    out.edges.push_back(graph.edges[e]);
    out.edge_forces.push_back(e < graph.edge_forces.size() ? graph.edge_forces[e] : EdgeForce{});
  }
  if (feature_noise_std > 0.0) {
    for (auto& b : out.nodes)
      for (int c = 0; c < 3; ++c) b.position[c] += rng.normal(0.0, feature_noise_std);
    for (auto& f : out.edge_forces) {
      f.f_normal = std::max(0.0, f.f_normal + rng.normal(0.0, feature_noise_std));
      for (int c = 0; c < 3; ++c) f.f_tangential[c] += rng.normal(0.0, feature_noise_std);
    }
  }
  return out;
}

}  // namespace drystack

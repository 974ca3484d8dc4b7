#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drystack/graph.hpp"

namespace drystack {

// K connected fragments of one design's graph, the unit a task descriptor is
// computed from.
struct SupportSet {
  std::vector<AssemblyGraph> subgraphs;
  std::string source_class;
};

enum class SampleStrategy { kGeometric, kTopological, kAttribute };

// Fragment selection:
//   geometric    ranks nodes by local curvature (mean angular deviation of
//                neighbor orientations) and returns their 1-hop neighborhoods
//   topological  ranks nodes by (triangle count, degree), favoring junctions
//                and tight cycles
//   attribute    ranks edges by annotated force magnitude and returns the
//                endpoints' joint 1-hop neighborhood (requires annotation)
// Ties are broken by a seeded shuffle, then deterministic.
SupportSet sample_support_set(const AssemblyGraph& graph, int k, SampleStrategy strategy,
                              std::uint64_t seed, const std::string& source_class = "");

struct ContrastiveTriple {
  int anchor = -1;
  int positive = -1;
  int negative = -1;
};

enum class ContrastiveMode { kRandom, kSemiHard, kHard };

// Builds (anchor, positive, negative) index triples over a labeled dataset.
// `labels[i]` is the class of dataset graph i; `embeddings` is row-aligned.
// semi_hard keeps cross-class pairs with embedding distance < delta; hard
// uses delta/2. random ignores distances and samples pairs uniformly.
// Positives are seeded uniform picks from the anchor's class; anchors with
// no same-class partner are skipped.
std::vector<ContrastiveTriple> contrastive_pairs(const std::vector<std::string>& labels,
                                                 const Eigen::MatrixXd& embeddings,
                                                 ContrastiveMode mode, double delta,
                                                 std::uint64_t seed = 0);

// Independent edge dropout plus Gaussian noise on positions and annotated
// forces. The input graph is left untouched; zero noise and zero drop
// probability return a bit-exact copy.
AssemblyGraph augment(const AssemblyGraph& graph, double feature_noise_std, double edge_drop_prob,
                      std::uint64_t seed);

// Mean angular deviation between a node's orientation and its neighbors'.
std::vector<double> node_curvature(const AssemblyGraph& graph);

}  // namespace drystack

#pragma once

#include "drystack/graph.hpp"

namespace drystack {

// Second-smallest eigenvalue of the combinatorial Laplacian of the contact
// graph (placed nodes only). With `ground_attached`, a virtual ground node is
// linked to every placed brick touching z=0 before the eigensolve, so the
// value is positive iff the structure is one component anchored to ground.
// Single-node graphs return 0 (a lone unanchored brick is not gated stable);
// with the ground link they yield the 2-node Laplacian's spectral gap.
double fiedler_value(const AssemblyGraph& graph, bool ground_attached);

// Union-find connectivity over the same node set (and optional ground node).
// Independent of the eigensolve; used as a cross-check oracle.
bool is_connected(const AssemblyGraph& graph, bool ground_attached);

}  // namespace drystack

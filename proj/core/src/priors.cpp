#include "drystack/priors.hpp"

#include <algorithm>

#include "drystack/errors.hpp"

namespace drystack {

namespace {

// Candidate stability, memoized on the placed mask when a cache is given.
bool candidate_stable(const AssemblyGraph& candidate,
                      const FilterConfig& config, DemCache* cache) {
  const auto eval = [&] {
    AssemblyGraph scratch = candidate;
    return is_stable(scratch, config.contact, config.dem);
  };
  if (!cache) return eval();
  return cache->stable_or_eval(placed_mask_bits(candidate), eval);
}

}  // namespace

void FilterConfig::validate() const {
  if (!(contact_threshold > 0))
    throw ValidationError("filter config: contact threshold must be positive");
  if (!(grasp_offset >= 0))
    throw ValidationError("filter config: grasp offset must be nonnegative");
  limits.validate();
}

Pose placement_pose(const BrickSpec& brick, double grasp_offset) {
  Pose p;
  p.position =
      brick.position + Vec3(0, 0, 0.5 * brick.dimensions.z() + grasp_offset);
  // Top grasp: the tool approaches from above, so its z-axis points down
  // while its x-axis tracks the brick's long axis.
  Mat3 flip;
  flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  p.rotation = brick.rotation * flip;
  return p;
}

std::vector<std::uint64_t> placed_mask_bits(const AssemblyGraph& g) {
  std::vector<std::uint64_t> bits((g.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.placed_mask[i]) bits[i / 64] |= std::uint64_t{1} << (i % 64);
  return bits;
}

std::vector<std::pair<int, int>> filter_edges(const AssemblyGraph& state,
                                              const AssemblyGraph& candidate,
                                              const ManipulatorModel& model,
                                              const FilterConfig& config,
                                              DemCache* cache) {
  config.validate();
  if (candidate.size() != state.size())
    throw ValidationError("filter_edges: state and candidate brick sets differ");
  if (candidate.placed_count() != state.placed_count() + 1)
    throw ValidationError(
        "filter_edges: candidate must extend the state by exactly one brick");

  // The brick the candidate adds.
  int added = -1;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (state.placed_mask[i] && !candidate.placed_mask[i])
      throw ValidationError("filter_edges: candidate removes a placed brick");
    if (candidate.placed_mask[i] && !state.placed_mask[i])
      added = static_cast<int>(i);
  }

  if (!candidate_stable(candidate, config, cache)) return {};

  // Per-brick reachability of the placement pose, evaluated lazily.
  std::vector<signed char> reach(candidate.size(), -1);
  const auto reachable = [&](int id) {
    if (reach[id] < 0)
      reach[id] = kinematic_feasible(
                      model,
                      placement_pose(candidate.nodes[id], config.grasp_offset),
                      config.limits)
                      ? 1
                      : 0;
    return reach[id] == 1;
  };
  // An unreachable new brick means the transition itself cannot be executed.
  if (!reachable(added)) return {};

  std::vector<std::pair<int, int>> edges;
  for (const Contact& c : detect_contacts(candidate, config.contact_threshold)) {
    if (c.a >= 0 && !reachable(c.a)) continue;
    if (c.b >= 0 && !reachable(c.b)) continue;
    edges.emplace_back(c.a, c.b);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<int> feasible_actions(const AssemblyGraph& state,
                                  const ManipulatorModel& model,
                                  const FilterConfig& config, DemCache* cache,
                                  const PriorToggles& toggles) {
  config.validate();
  std::vector<int> out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.placed_mask[i]) continue;
    if (toggles.kinematics &&
        !kinematic_feasible(
            model, placement_pose(state.nodes[i], config.grasp_offset),
            config.limits))
      continue;
    if (toggles.stability) {
      AssemblyGraph candidate = state;
      candidate.placed_mask[i] = 1;
      if (!candidate_stable(candidate, config, cache)) continue;
    }
    out.push_back(static_cast<int>(i));
  }
  return out;  // ascending by construction
}

}  // namespace drystack

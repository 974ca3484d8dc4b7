#pragma once

#include <cstdint>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "drystack/dem.hpp"
#include "drystack/graph.hpp"
#include "drystack/kinematics.hpp"

namespace drystack {

// Hard validity filters: a placement is admitted only when the resulting
// assembly relaxes to equilibrium and the placement pose is reachable.
struct FilterConfig {
  double contact_threshold = kContactThreshold;  // edge distance cutoff, m
  ContactModelParams contact;
  RelaxConfig dem;
  KinematicLimits limits;
  double grasp_offset = 0.10;  // end-effector height above a brick top, m

  void validate() const;
};

// Ablation switches: disabling a predicate can only enlarge the action set.
struct PriorToggles {
  bool stability = true;
  bool kinematics = true;
};

// End-effector pose that places `brick`: above the brick top by the grasp
// offset, tool z-axis pointing down (top grasp) with tool x along the
// brick's long axis.
Pose placement_pose(const BrickSpec& brick, double grasp_offset);

// Relaxation verdicts keyed by the exact placed-mask bitset, shared across
// candidate evaluations and search states. One cache serves one target
// design. Thread-safe for concurrent lookup/insert.
class DemCache {
 public:
  // Returns the cached verdict or runs `eval` and stores its result.
  template <typename Eval>
  bool stable_or_eval(const std::vector<std::uint64_t>& mask, Eval&& eval) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = map_.find(mask);
      if (it != map_.end()) {
        ++hits_;
        return it->second;
      }
    }
    const bool verdict = eval();
    std::lock_guard<std::mutex> lock(mu_);
    ++misses_;
    map_.emplace(mask, verdict);
    return verdict;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  std::size_t size() const { return map_.size(); }

 private:
  struct MaskHash {
    std::size_t operator()(const std::vector<std::uint64_t>& m) const {
      std::uint64_t h = 1469598103934665603ull;
      for (std::uint64_t w : m) {
        h ^= w;
        h *= 1099511628211ull;
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::vector<std::uint64_t>, bool, MaskHash> map_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
  mutable std::mutex mu_;
};

// Packs a graph's placed mask into the cache key bitset.
std::vector<std::uint64_t> placed_mask_bits(const AssemblyGraph& g);

// Contact edges of `candidate` (which extends `state` by one placed brick),
// gated by the hard filters: if the candidate assembly is unstable or the
// new brick's placement pose is unreachable, the set is empty; an edge is
// also dropped when either brick endpoint's own placement pose is
// unreachable. Ground edges appear as (-1, id), sorted ascending.
std::vector<std::pair<int, int>> filter_edges(const AssemblyGraph& state,
                                              const AssemblyGraph& candidate,
                                              const ManipulatorModel& model,
                                              const FilterConfig& config,
                                              DemCache* cache = nullptr);

// Ids of unplaced bricks whose placement at the design pose passes the
// stability and reachability filters, ascending by id. `state` is the
// target design's graph with placed_mask marking the current sub-assembly;
// the unplaced nodes are the remaining candidates.
std::vector<int> feasible_actions(const AssemblyGraph& state,
                                  const ManipulatorModel& model,
                                  const FilterConfig& config,
                                  DemCache* cache = nullptr,
                                  const PriorToggles& toggles = {});

}  // namespace drystack

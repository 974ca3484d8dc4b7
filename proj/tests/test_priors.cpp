#include <algorithm>
#include <atomic>
#include <set>
#include <thread>
#include <vector>

#include "doctest.h"
#include "drystack/dem.hpp"
#include "drystack/errors.hpp"
#include "drystack/generators.hpp"
#include "drystack/graph.hpp"
#include "drystack/kinematics.hpp"
#include "drystack/priors.hpp"
#include "drystack/rng.hpp"
#include "test_helpers.hpp"

using namespace drystack;
using namespace drystack::testing;

namespace {

// ---- oracles ------------------------------------------------------------

// Stability side of the action filter, derived independently: place each
// unplaced brick at its design pose and run the relaxation directly.
std::vector<int> stability_oracle(const AssemblyGraph& state,
                                  const FilterConfig& config) {
  std::vector<int> out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.placed_mask[i]) continue;
    AssemblyGraph candidate = state;
    candidate.placed_mask[i] = 1;
    if (is_stable(candidate, config.contact, config.dem))
      out.push_back(static_cast<int>(i));
  }
  return out;
}

// Workspace-radius oracle: distance from the mounting point bounds what any
// configuration can reach (sum of link lengths).
bool within_radius(const ManipulatorModel& m, const BrickSpec& b,
                   const FilterConfig& config) {
  const Pose p = placement_pose(b, config.grasp_offset);
  return (p.position - m.base.position).norm() <= m.reach();
}

AssemblyGraph with_none_placed(const Design& d) {
  AssemblyGraph g = build_graph(d);
  std::fill(g.placed_mask.begin(), g.placed_mask.end(), 0);
  return g;
}

std::vector<int> sorted_copy(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("priors: placement pose hovers above the brick, tool down") {
  BrickSpec b = box(0, Vec3(0.3, -0.1, 0.15), Vec3(0.2, 0.1, 0.06));
  const Pose p = placement_pose(b, 0.10);
  CHECK((p.position - Vec3(0.3, -0.1, 0.28)).norm() < 1e-12);
  // Tool z points down, tool x tracks the brick's long axis.
  CHECK((p.rotation.col(2) - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((p.rotation.col(0) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(p.rotation.determinant() == doctest::Approx(1.0));

  // A yawed brick carries its yaw into the grasp frame.
  b.rotation = yaw(0.5);
  const Pose q = placement_pose(b, 0.10);
  CHECK((q.rotation.col(0) - b.rotation.col(0)).norm() < 1e-12);
  CHECK((q.rotation.col(2) - Vec3(0, 0, -1)).norm() < 1e-12);
}

TEST_CASE("priors: filter_edges keeps the edges of an admissible placement") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;

  SUBCASE("a single grounded reachable brick keeps its ground edge") {
    const Design d =
        design_of({box(0, Vec3(0.2, 0.0, 0.03), Vec3(0.2, 0.1, 0.06))});
    const AssemblyGraph state = with_none_placed(d);
    const AssemblyGraph candidate = build_graph(d);
    const auto edges = filter_edges(state, candidate, model, config);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == std::pair<int, int>(kGroundIndex, 0));
  }

  SUBCASE("completing a two-brick stack reports ground and bedding edges") {
    const Design d =
        design_of({box(0, Vec3(0.2, 0.0, 0.03), Vec3(0.2, 0.1, 0.06)),
                   box(1, Vec3(0.2, 0.0, 0.09), Vec3(0.2, 0.1, 0.06))});
    AssemblyGraph state = build_graph(d);
    state.placed_mask[1] = 0;
    const AssemblyGraph candidate = build_graph(d);
    const auto edges = filter_edges(state, candidate, model, config);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == std::pair<int, int>(kGroundIndex, 0));
    CHECK(edges[1] == std::pair<int, int>(0, 1));
  }

  SUBCASE("a floating placement empties the edge set") {
    const Design d =
        design_of({box(0, Vec3(0.2, 0.0, 0.03), Vec3(0.2, 0.1, 0.06)),
                   box(1, Vec3(0.2, 0.0, 0.50), Vec3(0.2, 0.1, 0.06))});
    AssemblyGraph state = build_graph(d);
    state.placed_mask[1] = 0;
    const AssemblyGraph candidate = build_graph(d);
    CHECK(filter_edges(state, candidate, model, config).empty());
  }

  SUBCASE("malformed candidates are rejected") {
    const Design d =
        design_of({box(0, Vec3(0.2, 0.0, 0.03), Vec3(0.2, 0.1, 0.06)),
                   box(1, Vec3(0.2, 0.0, 0.09), Vec3(0.2, 0.1, 0.06))});
    const AssemblyGraph state = with_none_placed(d);
    const AssemblyGraph two_more = build_graph(d);
    CHECK_THROWS_AS(filter_edges(state, two_more, model, config),
                    ValidationError);
    AssemblyGraph swapped = build_graph(d);
    swapped.placed_mask[0] = 0;
    AssemblyGraph other = build_graph(d);
    other.placed_mask[1] = 0;
    CHECK_THROWS_AS(filter_edges(swapped, other, model, config),
                    ValidationError);
  }
}

TEST_CASE("priors: placements outside the arm workspace are filtered") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;
  const Vec3 dims(0.2, 0.1, 0.06);

  // Two abutting bricks far down the x axis: geometrically adjacent (the
  // head gap is below the contact threshold) but beyond any configuration's
  // reach; and a control pair near the cell center.
  const Design far_pair = design_of(
      {box(0, Vec3(2.2, 0.0, 0.03), dims), box(1, Vec3(2.4005, 0.0, 0.03), dims)});
  const Design near_pair = design_of(
      {box(0, Vec3(0.2, 0.0, 0.03), dims), box(1, Vec3(0.4005, 0.0, 0.03), dims)});

  // Workspace-radius oracle fixes the expected verdicts first.
  REQUIRE_FALSE(within_radius(model, far_pair.bricks[0], config));
  REQUIRE_FALSE(within_radius(model, far_pair.bricks[1], config));
  REQUIRE(within_radius(model, near_pair.bricks[0], config));
  REQUIRE(within_radius(model, near_pair.bricks[1], config));

  AssemblyGraph far_state = build_graph(far_pair);
  far_state.placed_mask[1] = 0;
  const AssemblyGraph far_candidate = build_graph(far_pair);
  CHECK(filter_edges(far_state, far_candidate, model, config).empty());

  AssemblyGraph near_state = build_graph(near_pair);
  near_state.placed_mask[1] = 0;
  const AssemblyGraph near_candidate = build_graph(near_pair);
  const auto edges = filter_edges(near_state, near_candidate, model, config);
  REQUIRE(edges.size() == 2);  // both ground edges; the head gap carries none
  CHECK(edges[0] == std::pair<int, int>(kGroundIndex, 0));
  CHECK(edges[1] == std::pair<int, int>(kGroundIndex, 1));
}

TEST_CASE("priors: feasible actions on the wall match the relaxation oracle") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;
  const Design wall = generate_design("basic", {}, 0);

  // Every placement pose in this design is reachable, so the stability
  // predicate alone decides the action sets below.
  for (const auto& b : wall.bricks)
    REQUIRE(kinematic_feasible(model, placement_pose(b, config.grasp_offset),
                               config.limits));

  SUBCASE("empty state admits exactly the ground course") {
    const AssemblyGraph state = with_none_placed(wall);
    DemCache cache;
    const auto actions = feasible_actions(state, model, config, &cache);
    CHECK(actions == stability_oracle(state, config));
    CHECK(actions == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(sorted_copy(actions) == actions);

    // Memoized: a second call answers entirely from the cache.
    const auto misses_before = cache.misses();
    const auto again = feasible_actions(state, model, config, &cache);
    CHECK(again == actions);
    CHECK(cache.misses() == misses_before);
    CHECK(cache.hits() >= actions.size());
  }

  SUBCASE("one brick missing from a stable wall is the only action") {
    AssemblyGraph state = build_graph(wall);
    state.placed_mask[7] = 0;
    const auto actions = feasible_actions(state, model, config);
    CHECK(actions == std::vector<int>{7});
    CHECK(actions == stability_oracle(state, config));
  }

  SUBCASE("a complete target yields no actions") {
    AssemblyGraph state = build_graph(wall);
    CHECK(feasible_actions(state, model, config).empty());
  }

  SUBCASE("actions are always unplaced bricks") {
    AssemblyGraph state = build_graph(wall);
    for (int id : {2, 9, 13, 18}) state.placed_mask[id] = 0;
    for (int id : feasible_actions(state, model, config))
      CHECK_FALSE(state.placed_mask[id]);
  }
}

TEST_CASE("priors: the arch keystone stays excluded until its seat exists") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;
  const Design arch = generate_design("arch", {{"lanes", 1.0}}, 0);
  for (const auto& b : arch.bricks)
    REQUIRE(kinematic_feasible(model, placement_pose(b, config.grasp_offset),
                               config.limits));

  // The keystone is the single brick at the apex.
  int keystone = -1;
  double top = 0.0;
  for (const auto& b : arch.bricks) top = std::max(top, b.position.z());
  for (const auto& b : arch.bricks)
    if (std::abs(b.position.z() - top) < 1e-9) keystone = b.id;
  REQUIRE(keystone >= 0);

  // Springer course height: the deepest-overhanging corbel course.
  double springer_z = 0.0;
  {
    double best = 0.0;
    for (const auto& b : arch.bricks) {
      const double overhang = -std::abs(b.position.x());
      if (b.id != keystone && overhang > best + 1e-12) {
        best = overhang;
        springer_z = b.position.z();
      }
    }
  }

  SUBCASE("with only the lower courses placed, nothing above is admissible") {
    AssemblyGraph state = build_graph(arch);
    for (std::size_t i = 0; i < state.size(); ++i)
      if (state.nodes[i].position.z() >= springer_z - 1e-9)
        state.placed_mask[i] = 0;
    const auto actions = feasible_actions(state, model, config);
    CHECK(actions == stability_oracle(state, config));
    // The keystone floats without its springer ledges; the springers
    // themselves overhang past the tipping point until their caps
    // counterweight them. Sequential stable placement deadlocks here --
    // which is why real corbel arches are built over falsework.
    CHECK(std::find(actions.begin(), actions.end(), keystone) ==
          actions.end());
    CHECK(actions.empty());
  }

  SUBCASE("once both springers and caps stand, the keystone is admissible") {
    AssemblyGraph state = build_graph(arch);
    state.placed_mask[keystone] = 0;
    const auto actions = feasible_actions(state, model, config);
    CHECK(actions == std::vector<int>{keystone});
    CHECK(actions == stability_oracle(state, config));
  }
}

TEST_CASE("priors: every admitted action yields a stable state") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;

  // Fifty seeded stacks: towers with per-level lateral jitter, kept inside
  // the workcell's comfortable envelope.
  int placements = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    const int n = 3 + static_cast<int>(rng.uniform(0.0, 2.999));
    std::vector<BrickSpec> bricks;
    const double cx = rng.uniform(-0.25, 0.25);
    for (int k = 0; k < n; ++k)
      bricks.push_back(box(k,
                           Vec3(cx + rng.uniform(-0.02, 0.02),
                                rng.uniform(-0.02, 0.02), (k + 0.5) * 0.06),
                           Vec3(0.2, 0.1, 0.06)));
    const Design d = design_of(bricks);

    AssemblyGraph state = with_none_placed(d);
    DemCache cache;
    while (state.placed_count() < state.size()) {
      const auto actions = feasible_actions(state, model, config, &cache);
      REQUIRE_FALSE(actions.empty());
      // Apply a seeded random admitted action and re-verify stability
      // post-hoc, independently of the filter's own verdict.
      const int pick = actions[static_cast<std::size_t>(
          rng.uniform(0.0, static_cast<double>(actions.size()) - 1e-9))];
      state.placed_mask[pick] = 1;
      AssemblyGraph check_state = state;
      CHECK(is_stable(check_state, config.contact, config.dem));
      ++placements;
    }
  }
  CHECK(placements >= 150);
}

TEST_CASE("priors: disabling a predicate can only enlarge the action set") {
  const ManipulatorModel model = ManipulatorModel::workcell();
  const FilterConfig config;
  const Vec3 dims(0.2, 0.1, 0.06);

  // One admissible brick, one floating brick, one brick beyond reach.
  const Design d = design_of({box(0, Vec3(0.2, 0.0, 0.03), dims),
                              box(1, Vec3(-0.2, 0.0, 0.40), dims),
                              box(2, Vec3(2.2, 0.0, 0.03), dims)});
  REQUIRE_FALSE(within_radius(model, d.bricks[2], config));
  const AssemblyGraph state = with_none_placed(d);

  const auto both = feasible_actions(state, model, config);
  PriorToggles no_stability;
  no_stability.stability = false;
  const auto no_stab = feasible_actions(state, model, config, nullptr, no_stability);
  PriorToggles no_kinematics;
  no_kinematics.kinematics = false;
  const auto no_kin = feasible_actions(state, model, config, nullptr, no_kinematics);
  PriorToggles neither;
  neither.stability = false;
  neither.kinematics = false;
  const auto all = feasible_actions(state, model, config, nullptr, neither);

  CHECK(both == std::vector<int>{0});
  CHECK(no_stab == std::vector<int>{0, 1});
  CHECK(no_kin == std::vector<int>{0, 2});
  CHECK(all == std::vector<int>{0, 1, 2});

  const auto superset_of = [](const std::vector<int>& big,
                              const std::vector<int>& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
  };
  CHECK(superset_of(no_stab, both));
  CHECK(superset_of(no_kin, both));
  CHECK(superset_of(all, no_stab));
  CHECK(superset_of(all, no_kin));
}

TEST_CASE("priors: relaxation cache is keyed on the exact placed set") {
  const Design d = cube_tower(70, 0.0, 0.05);
  AssemblyGraph g = build_graph(d);
  std::fill(g.placed_mask.begin(), g.placed_mask.end(), 0);
  g.placed_mask[3] = 1;
  g.placed_mask[64] = 1;  // crosses the first 64-bit word boundary

  const auto bits = placed_mask_bits(g);
  REQUIRE(bits.size() == 2);
  CHECK(bits[0] == (std::uint64_t{1} << 3));
  CHECK(bits[1] == (std::uint64_t{1} << 0));

  DemCache cache;
  std::atomic<int> evals{0};
  const auto eval_true = [&] {
    ++evals;
    return true;
  };
  CHECK(cache.stable_or_eval(bits, eval_true));
  CHECK(cache.stable_or_eval(bits, eval_true));
  CHECK(evals.load() == 1);
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
  CHECK(cache.size() == 1);

  // Concurrent lookups over a small mask universe stay consistent.
  std::vector<std::vector<std::uint64_t>> masks;
  for (std::uint64_t m = 1; m <= 16; ++m) masks.push_back({m});
  std::atomic<bool> mismatch{false};
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t)
    workers.emplace_back([&] {
      for (int rep = 0; rep < 200; ++rep)
        for (const auto& mask : masks) {
          const bool want = (mask[0] % 2) == 0;
          const bool got =
              cache.stable_or_eval(mask, [&] { return (mask[0] % 2) == 0; });
          if (got != want) mismatch.store(true);
        }
    });
  for (auto& w : workers) w.join();
  CHECK_FALSE(mismatch.load());
  CHECK(cache.size() == 17);
  CHECK(cache.hits() + cache.misses() == 1 + 1 + 4u * 200u * 16u);
}

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "doctest.h"
#include "drystack/dem.hpp"
#include "drystack/errors.hpp"
#include "drystack/generators.hpp"
#include "drystack/graph.hpp"
#include "test_helpers.hpp"

using namespace drystack;
namespace dt = drystack::testing;

namespace {

Contact uniform_ground_patch(int node, double depth) {
  Contact c;
  c.a = kGroundIndex;
  c.b = node;
  c.patch.normal = Vec3::UnitZ();
  c.patch.points = {Vec3(-0.5, -0.5, 0), Vec3(0.5, -0.5, 0), Vec3(0.5, 0.5, 0),
                    Vec3(-0.5, 0.5, 0)};
  c.patch.depths = {depth, depth, depth, depth};
  c.patch.area = 1.0;
  return c;
}

const Contact* find_pair(const std::vector<Contact>& contacts, int a, int b) {
  for (const auto& c : contacts)
    if (c.a == a && c.b == b) return &c;
  return nullptr;
}

double total_ground_reaction(const EquilibriumReport& report) {
  double f = 0.0;
  for (const auto& cf : report.forces)
    if (cf.a == kGroundIndex) f += cf.f_normal * cf.normal.z() + cf.f_tangential.z();
  return f;
}

double total_weight(const AssemblyGraph& g) {
  double w = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.placed_mask[i]) w += g.nodes[i].mass * kGravity;
  return w;
}

}  // namespace

TEST_CASE("dem: normal force law on a uniform patch") {
  Design d = dt::design_of({dt::cube(0, Vec3(0, 0, 0.5 - 1e-4))});
  const AssemblyGraph g = build_graph(d);
  const std::vector<BodyVelocity> still(1, BodyVelocity::Zero());

  ContactModelParams params;
  params.k_n = 1e6;

  SUBCASE("depth 1e-4 with k_n=1e6 carries exactly 100 N") {
    const auto forces =
        compute_forces(g, {uniform_ground_patch(0, 1e-4)}, still, params);
    REQUIRE(forces.size() == 1);
    CHECK(forces[0].f_normal == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(forces[0].f_tangential.norm() == 0.0);
    CHECK(forces[0].normal == Vec3::UnitZ());
    CHECK(forces[0].point == Vec3(0, 0, 0));
  }

  SUBCASE("zero overlap carries zero force") {
    const auto forces =
        compute_forces(g, {uniform_ground_patch(0, 0.0)}, still, params);
    REQUIRE(forces.size() == 1);
    CHECK(forces[0].f_normal == 0.0);
    CHECK(forces[0].f_tangential.norm() == 0.0);
  }

  SUBCASE("tangential spring beyond the cone is clamped to mu * fn") {
    params.mu = 0.6;
    const std::vector<Vec3> stretch = {Vec3(1.0, 0, 0)};  // huge spring
    const auto forces = compute_forces(
        g, {uniform_ground_patch(0, 1e-4)}, still, params, &stretch);
    REQUIRE(forces.size() == 1);
    CHECK(forces[0].f_normal == doctest::Approx(100.0));
    CHECK(forces[0].f_tangential.norm() ==
          doctest::Approx(0.6 * 100.0).epsilon(1e-12));
    // Friction opposes the stretch direction.
    CHECK(forces[0].f_tangential.x() < 0.0);
  }

  SUBCASE("approaching contact gains damping force, separating loses it") {
    params.gamma_n = 1000.0;
    std::vector<BodyVelocity> moving(1, BodyVelocity::Zero());
    moving[0](2) = -0.01;  // sinking at 1 cm/s
    auto forces =
        compute_forces(g, {uniform_ground_patch(0, 1e-4)}, moving, params);
    CHECK(forces[0].f_normal == doctest::Approx(100.0 + 1000.0 * 0.01));
    moving[0](2) = 0.01;
    forces = compute_forces(g, {uniform_ground_patch(0, 1e-4)}, moving, params);
    CHECK(forces[0].f_normal == doctest::Approx(100.0 - 1000.0 * 0.01));
  }
}

TEST_CASE("dem: detect_contacts classifies and clamps") {
  SUBCASE("cube resting on the ground") {
    Design d = dt::design_of({dt::cube(0, Vec3(0, 0, 0.5))});
    const auto contacts = detect_contacts(build_graph(d), 1e-3);
    REQUIRE(contacts.size() == 1);
    CHECK(contacts[0].a == kGroundIndex);
    CHECK(contacts[0].b == 0);
    CHECK(contacts[0].patch.normal == Vec3::UnitZ());
    REQUIRE(contacts[0].patch.points.size() == 4);
    for (double depth : contacts[0].patch.depths) CHECK(depth == 0.0);
  }

  SUBCASE("separated cubes yield no pair contact") {
    Design d = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0, 0, 1.51))});
    const auto contacts = detect_contacts(build_graph(d), 1e-3);
    CHECK(find_pair(contacts, 0, 1) == nullptr);
  }

  SUBCASE("half-offset stack matches the rectangle oracle") {
    Design d = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0.5, 0, 1.5))});
    const auto contacts = detect_contacts(build_graph(d), 1e-3);
    const Contact* pair = find_pair(contacts, 0, 1);
    REQUIRE(pair != nullptr);
    CHECK(pair->patch.area == doctest::Approx(0.5));
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : pair->patch.points) centroid += p;
    centroid /= static_cast<double>(pair->patch.points.size());
    CHECK(centroid.x() == doctest::Approx(0.25));
    CHECK(centroid.z() == doctest::Approx(1.0));
    for (double depth : pair->patch.depths) CHECK(depth >= 0.0);
  }

  SUBCASE("gross interpenetration names the pair") {
    Design d = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0, 0, 1.3))});
    const AssemblyGraph g = build_graph(d);
    CHECK_THROWS_WITH_AS(detect_contacts(g, 1e-3),
                         doctest::Contains("brick id 0"), GeometryError);
    CHECK_THROWS_WITH_AS(detect_contacts(g, 1e-3),
                         doctest::Contains("brick id 1"), GeometryError);

    Design sunk = dt::design_of({dt::cube(0, Vec3(0, 0, 0.35))});
    CHECK_THROWS_WITH_AS(detect_contacts(build_graph(sunk), 1e-3),
                         doctest::Contains("ground"), GeometryError);
  }
}

TEST_CASE("dem: single grounded cube settles quickly and stably") {
  Design d = dt::design_of({dt::cube(0, Vec3(0, 0, 0.5))});
  AssemblyGraph g = build_graph(d);
  const auto report = relax_to_equilibrium(g);
  CHECK(report.stable);
  CHECK(report.iterations <= 500);
  CHECK(report.max_force_residual() <= 0.01 * 1.0 * kGravity);
  CHECK(report.reason.empty());
  CHECK(total_ground_reaction(report) ==
        doctest::Approx(9.81).epsilon(1e-3));
  CHECK(g.annotated);
}

TEST_CASE("dem: floating cube is unstable with residual m*g") {
  Design d = dt::design_of({dt::cube(0, Vec3(0, 0, 2.0))});
  AssemblyGraph g = build_graph(d);
  const auto report = relax_to_equilibrium(g);
  CHECK_FALSE(report.stable);
  CHECK(report.reason == "drift");
  CHECK(report.force_residual[0] == doctest::Approx(9.81).epsilon(1e-9));
  CHECK(report.forces.empty());
}

TEST_CASE("dem: offset stacks topple past the support edge") {
  SUBCASE("offset 0.6 of the edge length is unstable") {
    Design d = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0.6, 0, 1.5))});
    AssemblyGraph g = build_graph(d);
    CHECK_FALSE(is_stable(g));
    // The independent statics oracle agrees: COM outside the support.
    CHECK_FALSE(torque_balance_oracle(g));
  }
  SUBCASE("offset 0.3 stays stable") {
    Design d = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0.3, 0, 1.5))});
    AssemblyGraph g = build_graph(d);
    CHECK(is_stable(g));
    CHECK(torque_balance_oracle(g));
  }
}

TEST_CASE("dem: stretcher wall relaxes to a stable annotated state") {
  const Design wall = generate_design(
      "stretcher", {{"courses", 2}, {"bricks_per_course", 4}}, 0);
  AssemblyGraph g = build_graph(wall);
  const auto report = relax_to_equilibrium(g);
  CHECK(report.stable);
  CHECK(torque_balance_oracle(g));

  // No adhesion and Coulomb cone on every returned force.
  for (const auto& f : report.forces) {
    CHECK(f.f_normal >= 0.0);
    CHECK(f.f_tangential.norm() <= 0.6 * f.f_normal + 1e-9);
    CHECK(f.normal.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }

  // Total vertical ground reaction carries the full weight.
  const double n = static_cast<double>(wall.size());
  CHECK(std::abs(total_ground_reaction(report) - total_weight(g)) <=
        0.01 * g.nodes[0].mass * kGravity * n);

  // Edge annotation: at least the intra-course neighbors carry load.
  CHECK(g.annotated);
  double annotated_total = 0.0;
  for (const auto& ef : g.edge_forces) annotated_total += ef.magnitude();
  CHECK(annotated_total > 0.0);
}

TEST_CASE("dem: reports are deterministic") {
  const Design wall = generate_design(
      "stretcher", {{"courses", 2}, {"bricks_per_course", 3}}, 0);
  AssemblyGraph g1 = build_graph(wall);
  AssemblyGraph g2 = build_graph(wall);
  const auto r1 = relax_to_equilibrium(g1);
  const auto r2 = relax_to_equilibrium(g2);
  CHECK(r1.stable == r2.stable);
  CHECK(r1.iterations == r2.iterations);
  REQUIRE(r1.forces.size() == r2.forces.size());
  for (std::size_t i = 0; i < r1.forces.size(); ++i) {
    CHECK(r1.forces[i].f_normal == r2.forces[i].f_normal);  // bitwise
    CHECK(r1.forces[i].f_tangential == r2.forces[i].f_tangential);
    CHECK(r1.forces[i].point == r2.forces[i].point);
  }
  for (std::size_t i = 0; i < r1.force_residual.size(); ++i) {
    CHECK(r1.force_residual[i] == r2.force_residual[i]);
    CHECK(r1.moment_residual[i] == r2.moment_residual[i]);
  }
}

TEST_CASE("dem: empty placed set is vacuously stable") {
  const Design tower = dt::cube_tower(2);
  AssemblyGraph g = build_graph(tower);
  g.placed_mask.assign(g.size(), 0);
  const auto report = relax_to_equilibrium(g);
  CHECK(report.stable);
  CHECK(report.iterations == 0);
  CHECK(report.forces.empty());
}

TEST_CASE("dem: torque balance oracle handles towers and rejects arches") {
  SUBCASE("aligned 4-brick tower") {
    const Design tower = dt::cube_tower(4);
    const AssemblyGraph g = build_graph(tower);
    CHECK(torque_balance_oracle(g));
  }
  SUBCASE("half-overhang limit") {
    Design past = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0.501, 0, 1.5))});
    CHECK_FALSE(torque_balance_oracle(build_graph(past)));
    Design within = dt::design_of(
        {dt::cube(0, Vec3(0, 0, 0.5)), dt::cube(1, Vec3(0.499, 0, 1.5))});
    CHECK(torque_balance_oracle(build_graph(within)));
  }
  SUBCASE("lateral contacts are not layered") {
    const Design arch = generate_design("arch", {}, 0);
    const AssemblyGraph g = build_graph(arch);
    CHECK_THROWS_AS(torque_balance_oracle(g), DomainError);
  }
}

TEST_CASE("dem: oracle and relaxation agree away from the margin") {
  // Paired evaluation on random layered towers; instances whose support
  // margin is within 5% of a brick length are excluded (both methods are
  // legitimately uncertain at the tipping point).
  int agree = 0, counted = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Design tower = generate_design(
        "tower", {{"bricks", 5}, {"max_offset", 0.35}, {"max_yaw", 0.0}}, seed);
    AssemblyGraph g = build_graph(tower);

    // Support margin: distance of each suspended COM to its interface hull
    // boundary (negative outside), from the statics decomposition.
    const auto contacts = detect_contacts(g, 1e-3);
    struct Itf {
      double z;
      std::vector<Eigen::Vector2d> pts;
    };
    std::vector<Itf> itfs;
    for (const auto& c : contacts) {
      double z = 0.0;
      if (c.a != kGroundIndex) {
        for (const Vec3& pt : c.patch.points) z += pt.z();
        z /= static_cast<double>(c.patch.points.size());
      }
      bool found = false;
      for (auto& itf : itfs)
        if (std::abs(itf.z - z) < 1e-6) {
          for (const Vec3& pt : c.patch.points)
            itf.pts.emplace_back(pt.x(), pt.y());
          found = true;
          break;
        }
      if (!found) {
        Itf itf{z, {}};
        for (const Vec3& pt : c.patch.points)
          itf.pts.emplace_back(pt.x(), pt.y());
        itfs.push_back(std::move(itf));
      }
    }
    double margin = 1e9;
    for (const auto& itf : itfs) {
      double mass = 0.0;
      Eigen::Vector2d com = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.nodes[i].position.z() <= itf.z + 1e-9) continue;
        mass += g.nodes[i].mass;
        com += g.nodes[i].mass *
               Eigen::Vector2d(g.nodes[i].position.x(), g.nodes[i].position.y());
      }
      if (mass <= 0.0) continue;
      com /= mass;
      const auto hull = convex_hull_2d(itf.pts);
      if (hull.size() < 3) {
        margin = -1e9;
        continue;
      }
      // Signed distance to the hull boundary: positive inside.
      double dist = 1e9;
      bool inside = true;
      for (std::size_t e = 0; e < hull.size(); ++e) {
        const Eigen::Vector2d a = hull[e];
        const Eigen::Vector2d b = hull[(e + 1) % hull.size()];
        const Eigen::Vector2d t = (b - a).normalized();
        const Eigen::Vector2d n(-t.y(), t.x());  // inward for CCW hulls
        const double s = n.dot(com - a);
        if (s < 0) inside = false;
        dist = std::min(dist, std::abs(s));
      }
      margin = std::min(margin, inside ? dist : -dist);
    }

    const double brick_length = tower.bricks[0].dimensions.x();
    if (std::abs(margin) < 0.05 * brick_length) continue;

    const bool oracle = torque_balance_oracle(g);
    const bool dynamic = is_stable(g);
    ++counted;
    if (oracle == dynamic) ++agree;
  }
  REQUIRE(counted > 100);
  CHECK(static_cast<double>(agree) / counted >= 0.95);
}

namespace {

// Independent statics check for assemblies whose load path is not a single
// stack.  At each bedding level, the bricks above the cut are split into
// connected components (lateral wedge contacts count for connectivity but
// not as support), and each component's combined COM must project inside the
// convex hull of the contact points that carry it across the cut.  With the
// keystones in place the two half-arches form one component whose support
// hull spans both springers; without them each half-arch is its own
// component resting on one patch it overhangs.
bool per_substructure_support(const AssemblyGraph& g) {
  const auto contacts = detect_contacts(g, 1e-3);

  std::vector<double> levels;
  for (const auto& c : contacts) {
    if (std::abs(c.patch.normal.z()) < 0.99) continue;  // lateral: no bearing
    double z = 0.0;
    for (const Vec3& pt : c.patch.points) z += pt.z();
    z /= static_cast<double>(c.patch.points.size());
    bool known = false;
    for (double l : levels)
      if (std::abs(l - z) < 1e-6) known = true;
    if (!known) levels.push_back(z);
  }

  for (double z_cut : levels) {
    // Suspended bricks and their components (union-find over all contacts).
    std::vector<int> parent(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) parent[i] = static_cast<int>(i);
    const std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    const auto above = [&](int i) {
      return g.placed_mask[i] && g.nodes[i].position.z() > z_cut + 1e-9;
    };
    for (const auto& c : contacts) {
      if (c.a == kGroundIndex) continue;
      if (above(c.a) && above(c.b)) parent[find(c.a)] = find(c.b);
    }

    // Contact points carrying each component across the cut.
    std::map<int, std::vector<Eigen::Vector2d>> support;
    for (const auto& c : contacts) {
      if (std::abs(c.patch.normal.z()) < 0.99) continue;
      const int upper = c.a == kGroundIndex || above(c.b) ? c.b : c.a;
      const int lower = upper == c.b ? c.a : c.b;
      if (!above(upper)) continue;
      if (lower != kGroundIndex && above(lower)) continue;  // internal
      double z = 0.0;
      for (const Vec3& pt : c.patch.points) z += pt.z();
      z /= static_cast<double>(c.patch.points.size());
      if (std::abs(z - z_cut) > 1e-6) continue;
      for (const Vec3& pt : c.patch.points)
        support[find(upper)].emplace_back(pt.x(), pt.y());
    }

    for (const auto& [root, pts] : support) {
      double mass = 0.0;
      Eigen::Vector2d com = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!above(static_cast<int>(i)) || find(static_cast<int>(i)) != root)
          continue;
        mass += g.nodes[i].mass;
        com += g.nodes[i].mass *
               Eigen::Vector2d(g.nodes[i].position.x(), g.nodes[i].position.y());
      }
      if (mass <= 0.0) continue;
      com /= mass;
      const auto hull = convex_hull_2d(pts);
      if (hull.size() < 3) return false;
      for (std::size_t e = 0; e < hull.size(); ++e) {
        const Eigen::Vector2d a = hull[e];
        const Eigen::Vector2d b = hull[(e + 1) % hull.size()];
        const Eigen::Vector2d t = (b - a).normalized();
        if (Eigen::Vector2d(-t.y(), t.x()).dot(com - a) < 0) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("dem: corbelled arch needs its keystones") {
  const Design arch = generate_design("arch", {}, 0);
  AssemblyGraph complete = build_graph(arch);

  // Remove the keystones (the lane bridges at the apex): the cantilevered
  // half-arches now overhang their supports.
  double top = 0.0;
  for (const auto& b : arch.bricks) top = std::max(top, b.position.z());
  AssemblyGraph missing = build_graph(arch);
  for (std::size_t i = 0; i < missing.size(); ++i)
    if (std::abs(missing.nodes[i].position.z() - top) < 1e-9)
      missing.placed_mask[i] = 0;

  // The statics decomposition fixes the expected verdicts first; the
  // relaxation must reproduce both.
  REQUIRE(per_substructure_support(complete));
  REQUIRE_FALSE(per_substructure_support(missing));

  CHECK(is_stable(complete));
  CHECK_FALSE(is_stable(missing));
}

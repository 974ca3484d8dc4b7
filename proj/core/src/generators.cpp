#include "drystack/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "drystack/errors.hpp"
#include "drystack/geometry.hpp"
#include "drystack/rng.hpp"

namespace drystack {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Common {
  double length, width, height, density;
  double mass() const { return density * length * width * height; }
};

double param(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int iparam(const ParamMap& p, const std::string& key, int fallback) {
  return static_cast<int>(std::llround(param(p, key, fallback)));
}

Common common_of(const ParamMap& p) {
  Common c{param(p, "brick_length", 0.2), param(p, "brick_width", 0.1),
           param(p, "brick_height", 0.06), param(p, "density", 1800.0)};
  if (c.length <= 0 || c.width <= 0 || c.height <= 0 || c.density <= 0)
    throw ValidationError("generator: brick dimensions and density must be positive");
  return c;
}

Mat3 yaw_rotation(double yaw) {
  Mat3 r;
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  r << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  return r;
}

BrickSpec brick_at(int id, const Vec3& pos, double yaw, const Common& c) {
  BrickSpec b;
  b.id = id;
  b.position = pos;
  b.rotation = yaw_rotation(yaw);
  b.dimensions = Vec3(c.length, c.width, c.height);
  b.mass = c.mass();
  return b;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("generator: " + message);
}

void echo_common(Design& d, const Common& c) {
  d.params["brick_length"] = c.length;
  d.params["brick_width"] = c.width;
  d.params["brick_height"] = c.height;
  d.params["density"] = c.density;
}

// ---- running-bond wall (basic, stretcher, and the opening substrate) ----

// Dry-stack head joints: neighbouring bricks in a course are separated by a
// small gap, so load transfers through the bedding faces only.
double head_gap_of(const ParamMap& p, const Common& c) {
  const double gap = param(p, "head_gap", 0.002);
  require(gap >= 0 && gap < c.length, "head_gap must lie in [0, brick_length)");
  return gap;
}

Design wall(const ParamMap& p, int courses, int per_course, const std::string& label) {
  const Common c = common_of(p);
  const double gap = head_gap_of(p, c);
  require(courses >= 1 && per_course >= 1, "courses and bricks_per_course must be >= 1");
  Design d;
  d.class_label = label;
  // Quarter bond: alternate courses shift by pitch/4.  A half bond with equal
  // course lengths would leave each end brick's COM exactly on its support
  // edge (a marginally stable knife edge); the quarter bond keeps the counts
  // and the interlock while giving end bricks a decisive support margin.
  const double pitch = c.length + gap;
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    const double z = (k + 0.5) * c.height;
    const double offset = (k % 2 == 0 ? -0.125 : 0.125) * pitch;
    for (int b = 0; b < per_course; ++b) {
      const double x = (b - 0.5 * (per_course - 1)) * pitch + offset;
      d.bricks.push_back(brick_at(id++, Vec3(x, 0, z), 0.0, c));
    }
  }
  echo_common(d, c);
  d.params["courses"] = courses;
  d.params["bricks_per_course"] = per_course;
  d.params["head_gap"] = gap;
  return d;
}

// ---- flemish bond: stretcher/header alternation ----

Design flemish(const ParamMap& p) {
  const Common c = common_of(p);
  const double gap = head_gap_of(p, c);
  const int courses = iparam(p, "courses", 7);
  const int pairs = iparam(p, "pairs_per_course", 11);
  require(courses >= 1 && pairs >= 1, "courses and pairs_per_course must be >= 1");
  Design d;
  d.class_label = "flemish";
  const double pair_len = c.length + c.width + 2.0 * gap;
  const double row_len = pairs * pair_len;
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    const double z = (k + 0.5) * c.height;
    double x = -0.5 * row_len + (k % 2 == 1 ? 0.5 * pair_len : 0.0);
    for (int pr = 0; pr < pairs; ++pr) {
      // Stretcher: length along the wall. Header: rotated a quarter turn so
      // its length runs across the wall thickness.
      d.bricks.push_back(brick_at(id++, Vec3(x + 0.5 * c.length, 0, z), 0.0, c));
      x += c.length + gap;
      d.bricks.push_back(brick_at(id++, Vec3(x + 0.5 * c.width, 0, z), 0.5 * kPi, c));
      x += c.width + gap;
    }
  }
  echo_common(d, c);
  d.params["courses"] = courses;
  d.params["pairs_per_course"] = pairs;
  d.params["head_gap"] = gap;
  return d;
}

// ---- corbelled arch with a wedged keystone ----
//
// Two pier stacks carry corbel courses that step inward.  The springer
// course (second from the top) cantilevers past the static tipping point of
// its support, and the cap course steps back out, leaving a slot between the
// two cap faces.  The keystone drops into that slot: it rests on the exposed
// springer ledges and its end faces wedge against the cap courses, so the
// completed ring is stable while either half-arch alone tips into the
// opening (the cap-and-springer group overhangs its support polygon).

Design arch(const ParamMap& p) {
  const Common c = common_of(p);
  const int lanes = iparam(p, "lanes", 4);
  const int pier_courses = iparam(p, "pier_courses", 7);
  const int corbel_courses = iparam(p, "corbel_courses", 5);
  require(lanes >= 1 && pier_courses >= 1 && corbel_courses >= 3,
          "lanes >= 1, pier_courses >= 1, corbel_courses >= 3 required");

  // Inward offsets of the corbel courses relative to the pier axis.
  const double gentle = 0.04 * c.length;    // early courses: shallow steps
  const double spring = 0.63 * c.length;    // springer: past the tipping point
  const double setback = 0.175 * c.length;  // cap course steps back out
  std::vector<double> offset(corbel_courses + 1, 0.0);
  for (int i = 1; i <= corbel_courses - 2; ++i) offset[i] = i * gentle;
  offset[corbel_courses - 1] = offset[corbel_courses - 2] + spring;
  offset[corbel_courses] = offset[corbel_courses - 1] - setback;
  const double reach = offset[corbel_courses - 1];

  const double half_gap = 0.2 * c.length;  // springer tips end at +-half_gap
  const double pier_x = half_gap + reach + 0.5 * c.length;

  Design d;
  d.class_label = "arch";
  int id = 0;
  // Lanes are parallel independent rings; like the head joints in the wall
  // bonds, the clearance between them stays above the contact detection
  // tolerance so load flows through bedding faces and keystone wedges only.
  const double lane_pitch = c.width + 2.0e-3;
  const auto lane_y = [&](int m) { return (m - 0.5 * (lanes - 1)) * lane_pitch; };
  for (int side = 0; side < 2; ++side) {
    const double s = side == 0 ? -1.0 : 1.0;
    for (int k = 0; k < pier_courses; ++k)
      for (int m = 0; m < lanes; ++m)
        d.bricks.push_back(
            brick_at(id++, Vec3(s * pier_x, lane_y(m), (k + 0.5) * c.height), 0.0, c));
    for (int i = 1; i <= corbel_courses; ++i)
      for (int m = 0; m < lanes; ++m)
        d.bricks.push_back(brick_at(
            id++, Vec3(s * (pier_x - offset[i]), lane_y(m), (pier_courses + i - 0.5) * c.height),
            0.0, c));
  }

  // Keystone: spans between the cap faces with a small wedging clearance,
  // sits on the springer ledges, and rises above the cap course so the apex
  // is unambiguous.
  const double clearance = 5.0e-4;
  Common key_c = c;
  key_c.length = 2.0 * (half_gap + setback - clearance);
  key_c.height = c.height * 4.0 / 3.0;
  const double key_z = (pier_courses + corbel_courses - 1) * c.height + 0.5 * key_c.height;
  for (int m = 0; m < lanes; ++m)
    d.bricks.push_back(brick_at(id++, Vec3(0, lane_y(m), key_z), 0.0, key_c));

  echo_common(d, c);
  d.params["lanes"] = lanes;
  d.params["pier_courses"] = pier_courses;
  d.params["corbel_courses"] = corbel_courses;
  return d;
}

// ---- circular curve wall (open sweep or closed ring) ----

// Smallest angular step at which two consecutive tangent bricks keep a
// positive clearance; solved by bisection on the actual box geometry.
double solve_curve_step(double radius, const Common& c, double clearance) {
  const auto min_dist = [&](double step) {
    BrickSpec a = brick_at(0, Vec3(radius, 0, 0.5 * c.height), 0.5 * kPi, c);
    BrickSpec b = brick_at(1, Vec3(radius * std::cos(step), radius * std::sin(step), 0.5 * c.height),
                           0.5 * kPi + step, c);
    return obb_surface_distance(obb_of(a), obb_of(b));
  };
  double lo = c.length / radius * 0.5, hi = c.length / radius * 3.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (min_dist(mid) >= clearance)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

Design curve(const ParamMap& p) {
  const Common c = common_of(p);
  const int courses = iparam(p, "courses", 13);
  const int per_course = iparam(p, "bricks_per_course", 25);
  const bool closed = iparam(p, "closed", 0) != 0;
  require(courses >= 1 && per_course >= 2, "courses >= 1 and bricks_per_course >= 2 required");

  const double radius_requested = param(p, "radius", 2.0);
  require(radius_requested > 0, "radius must be positive");
  double radius = radius_requested;
  // Head-joint clearance between course neighbours, kept above the contact
  // detection tolerance so load transfers through the bedding faces only.
  const double clearance = 2e-3;
  double step;
  if (closed) {
    step = 2.0 * kPi / per_course;
    // Grow the radius until the fixed step leaves the head-joint clearance.
    double lo = c.length / step * 0.5, hi = c.length / step * 4.0;
    const auto dist_at = [&](double r) {
      BrickSpec a = brick_at(0, Vec3(r, 0, 0.5 * c.height), 0.5 * kPi, c);
      BrickSpec b =
          brick_at(1, Vec3(r * std::cos(step), r * std::sin(step), 0.5 * c.height), 0.5 * kPi + step, c);
      return obb_surface_distance(obb_of(a), obb_of(b));
    };
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dist_at(mid) >= clearance)
        hi = mid;
      else
        lo = mid;
    }
    radius = hi;
  } else {
    step = solve_curve_step(radius, c, clearance);
  }

  Design d;
  d.class_label = "curve";
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    const double z = (k + 0.5) * c.height;
    const double bond = (k % 2 == 1) ? 0.5 * step : 0.0;
    for (int b = 0; b < per_course; ++b) {
      const double phi = (b - 0.5 * (per_course - 1)) * step + bond;
      d.bricks.push_back(brick_at(
          id++, Vec3(radius * std::cos(phi), radius * std::sin(phi), z), 0.5 * kPi + phi, c));
    }
  }
  echo_common(d, c);
  d.params["radius"] = radius_requested;
  d.params["radius_used"] = radius;
  d.params["courses"] = courses;
  d.params["bricks_per_course"] = per_course;
  d.params["closed"] = closed ? 1.0 : 0.0;
  return d;
}

// ---- wall with an aperture ----

struct OpeningSpec {
  int width_bricks, courses, base_course;
};

OpeningSpec opening_spec(const ParamMap& p) {
  const int variant = iparam(p, "variant", 0);
  OpeningSpec s{};
  switch (variant) {
    case 0: s = {5, 6, 5}; break;   // window
    case 1: s = {3, 10, 0}; break;  // door
    case 2: s = {6, 5, 8}; break;   // vent
    default: throw ValidationError("generator: opening variant must be 0, 1, or 2");
  }
  s.width_bricks = iparam(p, "opening_width_bricks", s.width_bricks);
  s.courses = iparam(p, "opening_courses", s.courses);
  s.base_course = iparam(p, "opening_base_course", s.base_course);
  return s;
}

Design opening(const ParamMap& p) {
  const Common c = common_of(p);
  const int courses = iparam(p, "courses", 15);
  const int per_course = iparam(p, "bricks_per_course", 22);
  const OpeningSpec spec = opening_spec(p);
  require(spec.base_course >= 0 && spec.base_course + spec.courses <= courses,
          "opening rows exceed the wall");
  require(spec.width_bricks >= 1 && spec.width_bricks < per_course, "opening width out of range");

  Design base = wall(p, courses, per_course, "opening");
  const double half_w = 0.5 * spec.width_bricks * c.length;
  Design d;
  d.class_label = "opening";
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    for (int b = 0; b < per_course; ++b) {
      const BrickSpec& src = base.bricks[k * per_course + b];
      const bool in_rows = k >= spec.base_course && k < spec.base_course + spec.courses;
      const bool in_span = src.position.x() > -half_w && src.position.x() < half_w;
      if (in_rows && in_span) continue;
      BrickSpec copy = src;
      copy.id = id++;
      d.bricks.push_back(copy);
    }
  }
  echo_common(d, c);
  d.params["courses"] = courses;
  d.params["bricks_per_course"] = per_course;
  d.params["variant"] = iparam(p, "variant", 0);
  d.params["opening_width_bricks"] = spec.width_bricks;
  d.params["opening_courses"] = spec.courses;
  d.params["opening_base_course"] = spec.base_course;
  return d;
}

// ---- hemispherical dome from shrinking rings ----

void dome_plan(const ParamMap& p, double* radius, int* rings, double* spacing) {
  *radius = param(p, "radius", 3.0);
  require(*radius > 0, "radius must be positive");
  // Presets reproduce the published per-variant counts (280 / 539 / 1420).
  int k;
  double s;
  if (std::abs(*radius - 3.0) < 1e-9) {
    k = 6;
    s = 0.315;
  } else if (std::abs(*radius - 5.0) < 1e-9) {
    k = 10;
    s = 0.4542;
  } else if (std::abs(*radius - 8.0) < 1e-9) {
    k = 14;
    s = 0.388;
  } else {
    k = std::max(2, static_cast<int>(std::floor(*radius / 0.5)));
    s = 0.35;
  }
  *rings = iparam(p, "courses", k);
  *spacing = param(p, "spacing", s);
  require(*rings >= 1 && *spacing > 0, "courses and spacing must be positive");
}

int dome_ring_count(double radius, int rings, double spacing, int k, double* ring_radius) {
  const double z = (k + 0.5) * (radius / rings);
  const double rr = radius * radius - z * z;
  const double r = rr > 0 ? std::sqrt(rr) : 0.0;
  *ring_radius = r;
  return std::max(1, static_cast<int>(std::floor(2.0 * kPi * r / spacing + 1e-12)));
}

Design dome(const ParamMap& p) {
  Common c = common_of(p);
  double radius, spacing;
  int rings;
  dome_plan(p, &radius, &rings, &spacing);

  Design d;
  d.class_label = "dome";
  int id = 0;
  double prev_r = -1.0;
  for (int k = 0; k < rings; ++k) {
    double r;
    const int n = dome_ring_count(radius, rings, spacing, k, &r);
    // Ring bricks span the radial step to the ring below so courses touch.
    Common ring_c = c;
    ring_c.length = std::max(0.05, spacing - 0.02);
    if (prev_r > 0) ring_c.width = std::max(c.width, (prev_r - r) + 0.02);
    const double z = (k + 0.5) * c.height;
    const double bond = (k % 2 == 1) ? kPi / n : 0.0;
    for (int i = 0; i < n; ++i) {
      const double phi = i * 2.0 * kPi / n + bond;
      d.bricks.push_back(brick_at(id++, Vec3(r * std::cos(phi), r * std::sin(phi), z),
                                  0.5 * kPi + phi, ring_c));
    }
    prev_r = r;
  }
  echo_common(d, c);
  d.params["radius"] = radius;
  d.params["courses"] = rings;
  d.params["spacing"] = spacing;
  return d;
}

// ---- corner: two perpendicular walls with quoin interlock ----

Design corner(const ParamMap& p) {
  const Common c = common_of(p);
  const double gap = head_gap_of(p, c);
  const int courses = iparam(p, "courses", 12);
  const int leg = iparam(p, "leg_bricks", 26);
  require(courses >= 1 && leg >= 1, "courses and leg_bricks must be >= 1");
  Design d;
  d.class_label = "corner";
  const double pitch = c.length + gap;
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    const double z = (k + 0.5) * c.height;
    const bool a_owns_corner = (k % 2 == 0);
    // Leg A runs along +x at y=0; leg B along +y at x=0.
    const double a_start = a_owns_corner ? 0.0 : 0.5 * c.width + gap;
    const double b_start = a_owns_corner ? 0.5 * c.width + gap : 0.0;
    for (int i = 0; i < leg; ++i)
      d.bricks.push_back(
          brick_at(id++, Vec3(a_start + 0.5 * c.length + i * pitch, 0, z), 0.0, c));
    for (int j = 0; j < leg; ++j)
      d.bricks.push_back(
          brick_at(id++, Vec3(0, b_start + 0.5 * c.length + j * pitch, z), 0.5 * kPi, c));
  }
  echo_common(d, c);
  d.params["courses"] = courses;
  d.params["leg_bricks"] = leg;
  d.params["head_gap"] = gap;
  return d;
}

// ---- hollow hexagon ring ----

Design hexagon(const ParamMap& p) {
  const Common c = common_of(p);
  const int courses = iparam(p, "courses", 8);
  const int per_course = iparam(p, "bricks_per_course", 13);
  require(courses >= 1 && per_course >= 6, "courses >= 1 and bricks_per_course >= 6 required");

  // Corner clearance so bricks straddling a 120-degree corner cannot touch
  // their rotated neighbors: half the width at the corner angle plus margin.
  const double spacing = c.length + c.width * std::tan(kPi / 6.0) + 0.01;
  const double side = per_course * spacing / 6.0;
  const double apothem = side * std::sqrt(3.0) / 2.0;

  // Regular hexagon vertices at circumradius = side.
  std::vector<Vec3> verts;
  for (int v = 0; v < 6; ++v) {
    const double a = v * kPi / 3.0;
    verts.emplace_back(side * std::cos(a), side * std::sin(a), 0);
  }
  const double perimeter = 6.0 * side;

  Design d;
  d.class_label = "hexagon";
  echo_common(d, c);
  d.params["apothem"] = apothem;
  d.params["courses"] = courses;
  d.params["bricks_per_course"] = per_course;
  int id = 0;
  for (int k = 0; k < courses; ++k) {
    const double z = (k + 0.5) * c.height;
    const double bond = (k % 2 == 1) ? 0.5 : 0.0;
    for (int i = 0; i < per_course; ++i) {
      double t = std::fmod((i + bond + 0.25) * perimeter / per_course, perimeter);
      const int edge = std::min(5, static_cast<int>(t / side));
      const double u = t - edge * side;
      const Vec3 a = verts[edge];
      const Vec3 b = verts[(edge + 1) % 6];
      const Vec3 dir = (b - a).normalized();
      const Vec3 pos = a + u * dir;
      const double yaw = std::atan2(dir.y(), dir.x());
      d.bricks.push_back(brick_at(id++, Vec3(pos.x(), pos.y(), z), yaw, c));
    }
  }
  return d;
}

// ---- seeded random tower (test workload) ----

Design tower(const ParamMap& p, std::uint64_t seed) {
  const Common c = common_of(p);
  const int n = iparam(p, "bricks", 5);
  const double max_off = param(p, "max_offset", 0.3);
  const double max_yaw = param(p, "max_yaw", 0.3);
  require(n >= 1, "bricks must be >= 1");
  require(max_off >= 0 && max_off < 1, "max_offset must lie in [0,1)");
  Rng rng(seed);
  Design d;
  d.class_label = "tower";
  double x = 0, y = 0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      x += rng.uniform(-max_off, max_off) * c.length;
      y += rng.uniform(-max_off, max_off) * c.width;
    }
    const double yaw = k == 0 ? 0.0 : rng.uniform(-max_yaw, max_yaw);
    d.bricks.push_back(brick_at(k, Vec3(x, y, (k + 0.5) * c.height), yaw, c));
  }
  echo_common(d, c);
  d.params["bricks"] = n;
  d.params["max_offset"] = max_off;
  d.params["max_yaw"] = max_yaw;
  return d;
}

}  // namespace

Design generate_design(const std::string& class_label, const ParamMap& params, std::uint64_t seed) {
  Design d;
  if (class_label == "basic") {
    d = wall(params, iparam(params, "courses", 4), iparam(params, "bricks_per_course", 5), "basic");
  } else if (class_label == "stretcher") {
    d = wall(params, iparam(params, "courses", 5), iparam(params, "bricks_per_course", 20),
             "stretcher");
  } else if (class_label == "flemish") {
    d = flemish(params);
  } else if (class_label == "arch") {
    d = arch(params);
  } else if (class_label == "curve") {
    d = curve(params);
  } else if (class_label == "opening") {
    d = opening(params);
  } else if (class_label == "dome") {
    d = dome(params);
  } else if (class_label == "corner") {
    d = corner(params);
  } else if (class_label == "hexagon") {
    d = hexagon(params);
  } else if (class_label == "tower") {
    d = tower(params, seed);
  } else {
    throw DomainError("generate_design: unsupported class '" + class_label + "'");
  }
  // Echo the effective parameters so saved designs are self-describing.
  for (const auto& [k, v] : params)
    if (!d.params.count(k)) d.params[k] = v;
  d.params["seed"] = static_cast<double>(seed);
  validate_design(d);
  return d;
}

std::size_t generated_brick_count(const std::string& class_label, const ParamMap& params) {
  const auto ip = [&](const char* key, int fb) { return iparam(params, key, fb); };
  if (class_label == "basic") return std::size_t(ip("courses", 4)) * ip("bricks_per_course", 5);
  if (class_label == "stretcher")
    return std::size_t(ip("courses", 5)) * ip("bricks_per_course", 20);
  if (class_label == "flemish") return std::size_t(ip("courses", 7)) * 2 * ip("pairs_per_course", 11);
  if (class_label == "arch")
    return std::size_t(ip("lanes", 4)) *
           (2 * (ip("pier_courses", 7) + ip("corbel_courses", 5)) + 1);
  if (class_label == "curve") return std::size_t(ip("courses", 13)) * ip("bricks_per_course", 25);
  if (class_label == "opening") {
    const OpeningSpec s = opening_spec(params);
    return std::size_t(ip("courses", 15)) * ip("bricks_per_course", 22) -
           std::size_t(s.courses) * s.width_bricks;
  }
  if (class_label == "dome") {
    double radius, spacing;
    int rings;
    dome_plan(params, &radius, &rings, &spacing);
    std::size_t total = 0;
    for (int k = 0; k < rings; ++k) {
      double r;
      total += dome_ring_count(radius, rings, spacing, k, &r);
    }
    return total;
  }
  if (class_label == "corner") return std::size_t(ip("courses", 12)) * 2 * ip("leg_bricks", 26);
  if (class_label == "hexagon")
    return std::size_t(ip("courses", 8)) * ip("bricks_per_course", 13);
  if (class_label == "tower") return std::size_t(ip("bricks", 5));
  throw DomainError("generated_brick_count: unsupported class '" + class_label + "'");
}

}  // namespace drystack

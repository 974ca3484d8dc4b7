#pragma once

#include <array>
#include <vector>

#include "drystack/brick.hpp"

namespace drystack {

// Oriented box, the geometric view of a brick. `half` are half extents.
struct Obb {
  Vec3 center = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 half = Vec3::Zero();
};

Obb obb_of(const BrickSpec& brick);

std::array<Vec3, 8> obb_vertices(const Obb& box);

// Exact distance from a point to the solid box (0 inside).
double point_obb_distance(const Vec3& p, const Obb& box);

// Closest distance between two segments [a0,a1], [b0,b1].
double segment_segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1);

// Signed separation along the best separating axis (15-axis SAT).
// > 0: disjoint by that much. <= 0: overlapping, magnitude = least penetration.
double obb_separation(const Obb& a, const Obb& b);

// Minimal surface distance between the two solids; exactly 0 when they
// overlap or touch. Exact for disjoint boxes (vertex/face and edge/edge
// feature pairs cover the closest-point cases of convex polytopes).
double obb_surface_distance(const Obb& a, const Obb& b);

// Contact manifold between two boxes. `normal` points from `a` into `b`.
// `points` lie near the contact interface; `depths[k]` > 0 means the boxes
// interpenetrate at that point. Classification: 4 points for face-face,
// 2 for edge-face, 1 for point-like/edge-edge contact. `area` is the patch
// area of the clipped overlap polygon (0 for edge and point contacts).
struct ContactPatch {
  Vec3 normal = Vec3::UnitZ();
  std::vector<Vec3> points;
  std::vector<double> depths;
  double area = 0.0;
};

// True when the boxes are within `threshold` of touching; fills `out`.
bool obb_contact(const Obb& a, const Obb& b, double threshold, ContactPatch* out);

// Contact of a box with the ground plane z = 0. Normal is +z (into the box).
// The manifold is the bottom face's 4 vertices so the point count is stable
// while the box settles; entries above the plane carry negative depth.
bool ground_contact(const Obb& box, double threshold, ContactPatch* out);

// Convex polygon utilities (vertices ordered, arbitrary winding).
double polygon_area_2d(const std::vector<Eigen::Vector2d>& poly);
bool point_in_convex_polygon_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly,
                                double tolerance = 0.0);
// Sutherland-Hodgman clip of `subject` against convex `clip` (both in 2D).
std::vector<Eigen::Vector2d> convex_clip_2d(const std::vector<Eigen::Vector2d>& subject,
                                            const std::vector<Eigen::Vector2d>& clip);
// Convex hull (for small point sets), counter-clockwise.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts);

// Axis-aligned bounds of a box, inflated by `margin`.
void obb_aabb(const Obb& box, double margin, Vec3* lo, Vec3* hi);

}  // namespace drystack

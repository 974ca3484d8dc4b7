#include "drystack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drystack {

namespace {

constexpr double kAxisEps = 1e-12;      // guards cross-product axes of near-parallel edges
constexpr double kFaceBias = 1.0e-8;    // prefer face axes over edge axes within this margin

struct SatResult {
  double separation = -std::numeric_limits<double>::infinity();
  int axis_kind = -1;   // 0: face of a, 1: face of b, 2: edge pair
  int index_a = -1;     // face axis or edge axis on a
  int index_b = -1;     // edge axis on b
  Vec3 axis = Vec3::Zero();  // world direction, unnormalized sign
};

// Full 15-axis SAT. Returns the axis with the maximum separation (the least
// penetrating direction). Face axes are tracked separately so callers can
// prefer them for manifold stability.
void sat_axes(const Obb& a, const Obb& b, SatResult* best_face, SatResult* best_edge) {
  const Mat3 C = a.R.transpose() * b.R;
  Mat3 absC;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) absC(i, j) = std::abs(C(i, j)) + kAxisEps;
  const Vec3 t = a.R.transpose() * (b.center - a.center);

  best_face->separation = -std::numeric_limits<double>::infinity();
  best_edge->separation = -std::numeric_limits<double>::infinity();

  for (int i = 0; i < 3; ++i) {
    const double r = a.half[i] + b.half.dot(absC.row(i));
    const double sep = std::abs(t[i]) - r;
    if (sep > best_face->separation) {
      best_face->separation = sep;
      best_face->axis_kind = 0;
      best_face->index_a = i;
      best_face->axis = a.R.col(i);
    }
  }
  for (int j = 0; j < 3; ++j) {
    const double r = b.half[j] + a.half.dot(absC.col(j));
    const double sep = std::abs(t.dot(C.col(j))) - r;
    if (sep > best_face->separation) {
      best_face->separation = sep;
      best_face->axis_kind = 1;
      best_face->index_a = j;
      best_face->axis = b.R.col(j);
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 axis_local = Vec3::Unit(i).cross(C.col(j));
      const double len = axis_local.norm();
      if (len < 1e-9) continue;  // near-parallel edges, covered by face axes
      const Vec3 l = axis_local / len;
      double ra = 0.0, rb = 0.0;
      for (int k = 0; k < 3; ++k) ra += a.half[k] * std::abs(l[k]);
      for (int k = 0; k < 3; ++k) rb += b.half[k] * std::abs(C.col(k).dot(l));
      const double sep = std::abs(t.dot(l)) - (ra + rb);
      if (sep > best_edge->separation) {
        best_edge->separation = sep;
        best_edge->axis_kind = 2;
        best_edge->index_a = i;
        best_edge->index_b = j;
        best_edge->axis = a.R * l;
      }
    }
  }
}

struct Face {
  Vec3 center;
  Vec3 normal;   // outward
  Vec3 u, v;     // in-plane axes
  double hu, hv; // in-plane half extents
};

// Face of `box` whose outward normal best matches `dir`.
Face face_toward(const Obb& box, const Vec3& dir) {
  int best_axis = 0;
  double best_dot = -2.0;
  double best_sign = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double d = box.R.col(i).dot(dir);
    if (std::abs(d) > best_dot) {
      best_dot = std::abs(d);
      best_axis = i;
      best_sign = d >= 0 ? 1.0 : -1.0;
    }
  }
  Face f;
  f.normal = best_sign * box.R.col(best_axis);
  f.center = box.center + box.half[best_axis] * f.normal;
  const int iu = (best_axis + 1) % 3;
  const int iv = (best_axis + 2) % 3;
  f.u = box.R.col(iu);
  f.v = box.R.col(iv);
  f.hu = box.half[iu];
  f.hv = box.half[iv];
  return f;
}

std::array<Vec3, 4> face_vertices(const Face& f) {
  return {f.center + f.hu * f.u + f.hv * f.v, f.center - f.hu * f.u + f.hv * f.v,
          f.center - f.hu * f.u - f.hv * f.v, f.center + f.hu * f.u - f.hv * f.v};
}

// Clips `poly` to the slab |(p - origin) . axis| <= extent.
std::vector<Vec3> clip_to_slab(const std::vector<Vec3>& poly, const Vec3& origin, const Vec3& axis,
                               double extent) {
  std::vector<Vec3> out;
  out.reserve(poly.size() + 2);
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const std::vector<Vec3>& in = side == 0 ? poly : out;
    std::vector<Vec3> tmp;
    tmp.reserve(in.size() + 2);
    const auto inside = [&](const Vec3& p) { return sign * (p - origin).dot(axis) <= extent; };
    const auto dist = [&](const Vec3& p) { return sign * (p - origin).dot(axis) - extent; };
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Vec3& cur = in[k];
      const Vec3& nxt = in[(k + 1) % in.size()];
      const bool cin = inside(cur), nin = inside(nxt);
      if (cin) tmp.push_back(cur);
      if (cin != nin) {
        const double dc = dist(cur), dn = dist(nxt);
        const double s = dc / (dc - dn);
        tmp.push_back(cur + s * (nxt - cur));
      }
    }
    if (side == 0) {
      out = std::move(tmp);
      if (out.empty()) return out;
    } else {
      return tmp;
    }
  }
  return out;
}

// Keeps at most 4 manifold points: the deepest one plus spread maximizers.
void reduce_manifold(std::vector<Vec3>& pts, std::vector<double>& depths) {
  if (pts.size() <= 4) return;
  std::vector<std::size_t> keep;
  std::size_t deepest = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (depths[i] > depths[deepest]) deepest = i;
  keep.push_back(deepest);
  auto farthest = [&](auto&& score) {
    std::size_t best = keep[0];
    double best_s = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(keep.begin(), keep.end(), i) != keep.end()) continue;
      const double s = score(i);
      if (s > best_s) {
        best_s = s;
        best = i;
      }
    }
    return best;
  };
  keep.push_back(farthest([&](std::size_t i) { return (pts[i] - pts[keep[0]]).squaredNorm(); }));
  keep.push_back(farthest([&](std::size_t i) {
    return (pts[i] - pts[keep[0]]).cross(pts[i] - pts[keep[1]]).squaredNorm();
  }));
  keep.push_back(farthest([&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j : keep) s += (pts[i] - pts[j]).norm();
    return s;
  }));
  std::sort(keep.begin(), keep.end());
  std::vector<Vec3> np;
  std::vector<double> nd;
  for (std::size_t i : keep) {
    np.push_back(pts[i]);
    nd.push_back(depths[i]);
  }
  pts = std::move(np);
  depths = std::move(nd);
}

void closest_point_segments(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                            Vec3* c1, Vec3* c2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-30 && e <= 1e-30) {
    s = t = 0.0;
  } else if (a <= 1e-30) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-30) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 1e-30) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  *c1 = p1 + s * d1;
  *c2 = p2 + t * d2;
}

}  // namespace

Obb obb_of(const BrickSpec& brick) { return Obb{brick.position, brick.rotation, brick.half_extents()}; }

std::array<Vec3, 8> obb_vertices(const Obb& box) {
  std::array<Vec3, 8> v;
  int n = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        v[n++] = box.center + box.R * Vec3(sx * box.half.x(), sy * box.half.y(), sz * box.half.z());
  return v;
}

double point_obb_distance(const Vec3& p, const Obb& box) {
  const Vec3 q = box.R.transpose() * (p - box.center);
  const Vec3 d = (q.cwiseAbs() - box.half).cwiseMax(0.0);
  return d.norm();
}

double segment_segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  Vec3 c1, c2;
  closest_point_segments(a0, a1, b0, b1, &c1, &c2);
  return (c1 - c2).norm();
}

double obb_separation(const Obb& a, const Obb& b) {
  SatResult face, edge;
  sat_axes(a, b, &face, &edge);
  return std::max(face.separation, edge.separation);
}

double obb_surface_distance(const Obb& a, const Obb& b) {
  if (obb_separation(a, b) <= 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto va = obb_vertices(a);
  const auto vb = obb_vertices(b);
  for (const Vec3& p : va) best = std::min(best, point_obb_distance(p, b));
  for (const Vec3& p : vb) best = std::min(best, point_obb_distance(p, a));

  // Edge pairs cover the skew edge-edge closest-feature case.
  static const int kEdgeVerts[12][2] = {{0, 4}, {1, 5}, {2, 6}, {3, 7}, {0, 2}, {1, 3},
                                        {4, 6}, {5, 7}, {0, 1}, {2, 3}, {4, 5}, {6, 7}};
  for (const auto& ea : kEdgeVerts)
    for (const auto& eb : kEdgeVerts)
      best = std::min(best,
                      segment_segment_distance(va[ea[0]], va[ea[1]], vb[eb[0]], vb[eb[1]]));
  return best;
}

bool obb_contact(const Obb& a, const Obb& b, double threshold, ContactPatch* out) {
  SatResult face, edge;
  sat_axes(a, b, &face, &edge);
  const double separation = std::max(face.separation, edge.separation);
  if (separation > threshold) return false;

  const bool use_face = face.separation + kFaceBias >= edge.separation;
  Vec3 normal = use_face ? face.axis : edge.axis;
  if (normal.dot(b.center - a.center) < 0.0) normal = -normal;
  normal.normalize();

  out->normal = normal;
  out->points.clear();
  out->depths.clear();
  out->area = 0.0;

  if (!use_face) {
    // Edge-edge: single point midway between the closest edge points.
    const Obb* boxes[2] = {&a, &b};
    Vec3 ends[2][2];
    const int axes[2] = {edge.index_a, edge.index_b};
    for (int side = 0; side < 2; ++side) {
      const Obb& box = *boxes[side];
      const Vec3 dir = side == 0 ? normal : Vec3(-normal);
      const int ia = axes[side];
      Vec3 mid = box.center;
      for (int k = 0; k < 3; ++k) {
        if (k == ia) continue;
        const double s = box.R.col(k).dot(dir) >= 0 ? 1.0 : -1.0;
        mid += s * box.half[k] * box.R.col(k);
      }
      ends[side][0] = mid - box.half[ia] * box.R.col(ia);
      ends[side][1] = mid + box.half[ia] * box.R.col(ia);
    }
    Vec3 c1, c2;
    closest_point_segments(ends[0][0], ends[0][1], ends[1][0], ends[1][1], &c1, &c2);
    out->points.push_back(0.5 * (c1 + c2));
    out->depths.push_back(-separation);
    return true;
  }

  const bool ref_is_a = face.axis_kind == 0;
  const Obb& ref = ref_is_a ? a : b;
  const Obb& inc = ref_is_a ? b : a;
  const Vec3 ref_out = ref_is_a ? normal : Vec3(-normal);

  const Face ref_face = face_toward(ref, ref_out);
  const Face inc_face = face_toward(inc, -ref_out);

  const auto iv = face_vertices(inc_face);
  std::vector<Vec3> poly(iv.begin(), iv.end());
  poly = clip_to_slab(poly, ref_face.center, ref_face.u, ref_face.hu);
  if (!poly.empty()) poly = clip_to_slab(poly, ref_face.center, ref_face.v, ref_face.hv);

  std::vector<Vec3> kept;
  std::vector<double> depths;
  std::vector<Eigen::Vector2d> plane_pts;
  for (const Vec3& p : poly) {
    const double s = (p - ref_face.center).dot(ref_face.normal);  // >0: outside ref surface
    if (s <= threshold) {
      kept.push_back(p);
      depths.push_back(-s);
      plane_pts.emplace_back((p - ref_face.center).dot(ref_face.u),
                             (p - ref_face.center).dot(ref_face.v));
    }
  }

  if (kept.empty()) {
    // Degenerate clip (deep or skewed); fall back to the midpoint between centers.
    const Vec3 p = 0.5 * (a.center + b.center);
    out->points.push_back(p);
    out->depths.push_back(-separation);
    return true;
  }

  if (plane_pts.size() >= 3) {
    const auto hull = convex_hull_2d(plane_pts);
    out->area = polygon_area_2d(hull);
  }
  reduce_manifold(kept, depths);
  out->points = std::move(kept);
  out->depths = std::move(depths);
  return true;
}

bool ground_contact(const Obb& box, double threshold, ContactPatch* out) {
  const Face bottom = face_toward(box, Vec3(0, 0, -1));
  const auto verts = face_vertices(bottom);
  double min_z = std::numeric_limits<double>::infinity();
  for (const Vec3& v : verts) min_z = std::min(min_z, v.z());
  if (min_z > threshold) return false;

  out->normal = Vec3::UnitZ();
  out->points.assign(verts.begin(), verts.end());
  out->depths.clear();
  std::vector<Eigen::Vector2d> flat;
  for (const Vec3& v : verts) {
    out->depths.push_back(-v.z());
    if (v.z() <= threshold) flat.emplace_back(v.x(), v.y());
  }
  out->area = flat.size() >= 3 ? polygon_area_2d(convex_hull_2d(flat)) : 0.0;
  return true;
}

double polygon_area_2d(const std::vector<Eigen::Vector2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

bool point_in_convex_polygon_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly,
                                double tolerance) {
  if (poly.size() < 3) return false;
  // Winding sign of the polygon itself.
  double ref = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    ref += (b.x() - a.x()) * (b.y() + a.y());
  }
  const double orient = ref <= 0.0 ? 1.0 : -1.0;  // 1: CCW
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const Eigen::Vector2d e = b - a;
    const double len = e.norm();
    if (len < 1e-15) continue;
    const double cross = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    if (orient * cross / len < -tolerance) return false;
  }
  return true;
}

std::vector<Eigen::Vector2d> convex_clip_2d(const std::vector<Eigen::Vector2d>& subject,
                                            const std::vector<Eigen::Vector2d>& clip) {
  if (subject.size() < 3 || clip.size() < 3) return {};
  // Ensure the clip polygon is counter-clockwise.
  std::vector<Eigen::Vector2d> clipper = clip;
  double twice = 0.0;
  for (std::size_t i = 0; i < clipper.size(); ++i) {
    const auto& p = clipper[i];
    const auto& q = clipper[(i + 1) % clipper.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  if (twice < 0.0) std::reverse(clipper.begin(), clipper.end());

  std::vector<Eigen::Vector2d> poly = subject;
  for (std::size_t c = 0; c < clipper.size() && !poly.empty(); ++c) {
    const Eigen::Vector2d a = clipper[c];
    const Eigen::Vector2d b = clipper[(c + 1) % clipper.size()];
    const auto side = [&](const Eigen::Vector2d& p) {
      return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    };
    std::vector<Eigen::Vector2d> next;
    next.reserve(poly.size() + 2);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d& cur = poly[i];
      const Eigen::Vector2d& nxt = poly[(i + 1) % poly.size()];
      const double sc = side(cur), sn = side(nxt);
      if (sc >= 0) next.push_back(cur);
      if ((sc >= 0) != (sn >= 0)) {
        const double t = sc / (sc - sn);
        next.push_back(cur + t * (nxt - cur));
      }
    }
    poly = std::move(next);
  }
  return poly;
}

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  return hull;
}

void obb_aabb(const Obb& box, double margin, Vec3* lo, Vec3* hi) {
  Vec3 ext = Vec3::Zero();
  for (int i = 0; i < 3; ++i) ext += box.half[i] * box.R.col(i).cwiseAbs();
  *lo = box.center - ext - Vec3::Constant(margin);
  *hi = box.center + ext + Vec3::Constant(margin);
}

}  // namespace drystack

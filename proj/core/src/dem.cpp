#include "drystack/dem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Geometry>

#include "drystack/errors.hpp"

namespace drystack {

namespace {

double min_placed_mass(const AssemblyGraph& graph) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (graph.placed_mask[i]) m = std::min(m, graph.nodes[i].mass);
  return std::isfinite(m) ? m : 1.0;
}

double min_placed_dimension(const AssemblyGraph& graph) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (graph.placed_mask[i]) d = std::min(d, graph.nodes[i].dimensions.minCoeff());
  return std::isfinite(d) ? d : 1.0;
}

double max_placed_weight(const AssemblyGraph& graph, double gravity) {
  double w = 0.0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (graph.placed_mask[i]) w = std::max(w, graph.nodes[i].mass * gravity);
  return w > 0.0 ? w : 1.0;
}

// Core force law shared by the one-shot evaluators and the relaxation loop.
// Depths are current per-point penetrations (> 0 in contact); `vel` returns
// the relative velocity of b w.r.t. a at a world point.
struct PairForceResult {
  double f_normal = 0.0;
  Vec3 f_tangential = Vec3::Zero();
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  Vec3 v_tangential = Vec3::Zero();  // force-weighted slip velocity
  bool active = false;
};

template <typename RelVelFn>
PairForceResult pair_force(const Vec3& n, const std::vector<Vec3>& points,
                           const std::vector<double>& depths,
                           const Vec3& stretch, const ContactModelParams& p,
                           RelVelFn&& vel) {
  PairForceResult r;
  r.normal = n;
  const double inv_n = 1.0 / static_cast<double>(points.size());
  double fn_sum = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 vt_sum = Vec3::Zero();
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (depths[k] <= 0.0) continue;
    const Vec3 v_rel = vel(points[k]);
    const double vn = v_rel.dot(n);
    const double fk =
        std::max(0.0, inv_n * (p.k_n * depths[k] - p.gamma_n * vn));
    if (fk <= 0.0) continue;
    fn_sum += fk;
    centroid += fk * points[k];
    vt_sum += fk * (v_rel - vn * n);
  }
  if (fn_sum <= 0.0) return r;

  r.active = true;
  r.f_normal = fn_sum;
  r.centroid = centroid / fn_sum;
  r.v_tangential = vt_sum / fn_sum;

  Vec3 u = stretch - stretch.dot(n) * n;
  Vec3 ft = -p.k_t * u - p.gamma_t * r.v_tangential;
  const double cap = p.mu * fn_sum;
  const double ft_norm = ft.norm();
  if (ft_norm > cap) ft *= cap / ft_norm;
  r.f_tangential = ft;
  return r;
}

Vec3 rigid_point_velocity(const BodyVelocity& vel, const Vec3& com,
                          const Vec3& point) {
  return vel.head<3>() + vel.tail<3>().cross(point - com);
}

}  // namespace

ContactModelParams ContactModelParams::resolved(
    const AssemblyGraph& graph) const {
  ContactModelParams p = *this;
  const double m_min = min_placed_mass(graph);
  if (p.gamma_n < 0) p.gamma_n = 2.0 * std::sqrt(p.k_n * m_min);
  if (p.gamma_t < 0) p.gamma_t = 0.5 * p.gamma_n;
  if (p.k_n < 0 || p.k_t < 0 || p.mu < 0 || p.gravity <= 0)
    throw ValidationError("contact parameters must be nonnegative with positive gravity");
  return p;
}

RelaxConfig RelaxConfig::resolved(const AssemblyGraph& graph) const {
  RelaxConfig c = *this;
  const double g = kGravity;
  if (c.eps_force < 0) c.eps_force = 0.01 * min_placed_mass(graph) * g;
  if (c.eps_moment < 0) c.eps_moment = c.eps_force * min_placed_dimension(graph);
  if (c.force_cap < 0) c.force_cap = 50.0 * max_placed_weight(graph, g);
  if (c.dt <= 0 || c.max_iters <= 0 || c.overlap_tolerance <= 0)
    throw ValidationError("relaxation config requires positive dt, max_iters, overlap_tolerance");
  return c;
}

double EquilibriumReport::max_force_residual() const {
  double m = 0.0;
  for (double r : force_residual) m = std::max(m, r);
  return m;
}

double EquilibriumReport::max_moment_residual() const {
  double m = 0.0;
  for (double r : moment_residual) m = std::max(m, r);
  return m;
}

double EquilibriumReport::max_displacement() const {
  double m = 0.0;
  for (double r : displacement) m = std::max(m, r);
  return m;
}

std::vector<Contact> detect_contacts(const AssemblyGraph& graph,
                                     double overlap_tolerance) {
  std::vector<Contact> out;
  const std::size_t n = graph.nodes.size();

  std::vector<Obb> boxes(n);
  for (std::size_t i = 0; i < n; ++i) boxes[i] = obb_of(graph.nodes[i]);

  auto gross_limit = [&](std::size_t i, std::size_t j) {
    return 0.1 * std::min(graph.nodes[i].dimensions.minCoeff(),
                          graph.nodes[j].dimensions.minCoeff());
  };

  // Ground contacts first (ascending brick order), then brick pairs.
  for (std::size_t i = 0; i < n; ++i) {
    if (!graph.placed_mask[i]) continue;
    ContactPatch patch;
    if (!ground_contact(boxes[i], overlap_tolerance, &patch)) continue;
    double max_depth = 0.0;
    for (double d : patch.depths) max_depth = std::max(max_depth, d);
    const double limit = 0.1 * graph.nodes[i].dimensions.minCoeff();
    if (max_depth > limit) {
      std::ostringstream msg;
      msg << "gross interpenetration: brick id " << graph.nodes[i].id
          << " and ground overlap by " << max_depth << " m (limit " << limit
          << " m)";
      throw GeometryError(msg.str());
    }
    for (double& d : patch.depths) d = std::max(0.0, d);
    Contact c;
    c.a = kGroundIndex;
    c.b = static_cast<int>(i);
    c.patch = std::move(patch);
    out.push_back(std::move(c));
  }

  std::vector<Vec3> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i)
    obb_aabb(boxes[i], 0.5 * overlap_tolerance, &lo[i], &hi[i]);

  for (std::size_t i = 0; i < n; ++i) {
    if (!graph.placed_mask[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!graph.placed_mask[j]) continue;
      if ((lo[i].array() > hi[j].array()).any() ||
          (lo[j].array() > hi[i].array()).any())
        continue;
      ContactPatch patch;
      if (!obb_contact(boxes[i], boxes[j], overlap_tolerance, &patch)) continue;
      double max_depth = 0.0;
      for (double d : patch.depths) max_depth = std::max(max_depth, d);
      if (max_depth > gross_limit(i, j)) {
        std::ostringstream msg;
        msg << "gross interpenetration: brick id " << graph.nodes[i].id
            << " and brick id " << graph.nodes[j].id << " overlap by "
            << max_depth << " m (limit " << gross_limit(i, j) << " m)";
        throw GeometryError(msg.str());
      }
      for (double& d : patch.depths) d = std::max(0.0, d);
      Contact c;
      c.a = static_cast<int>(i);
      c.b = static_cast<int>(j);
      c.patch = std::move(patch);
      out.push_back(std::move(c));
    }
  }
  return out;
}

ContactForce evaluate_contact_force(const Contact& contact,
                                    const BodyVelocity& vel_a,
                                    const BodyVelocity& vel_b,
                                    const Vec3& com_a, const Vec3& com_b,
                                    const Vec3& tangential_stretch,
                                    const ContactModelParams& params) {
  ContactForce f;
  f.a = contact.a;
  f.b = contact.b;
  f.normal = contact.patch.normal;
  f.area = contact.patch.area;
  if (contact.patch.points.empty()) return f;

  auto rel_vel = [&](const Vec3& p) {
    Vec3 v = rigid_point_velocity(vel_b, com_b, p);
    if (contact.a != kGroundIndex) v -= rigid_point_velocity(vel_a, com_a, p);
    return v;
  };
  const PairForceResult r =
      pair_force(contact.patch.normal, contact.patch.points,
                 contact.patch.depths, tangential_stretch, params, rel_vel);
  if (!r.active) return f;
  f.f_normal = r.f_normal;
  f.f_tangential = r.f_tangential;
  f.point = r.centroid;
  return f;
}

std::vector<ContactForce> compute_forces(
    const AssemblyGraph& graph, const std::vector<Contact>& contacts,
    const std::vector<BodyVelocity>& velocities,
    const ContactModelParams& params,
    const std::vector<Vec3>* tangential_stretch) {
  if (velocities.size() != graph.nodes.size())
    throw ValidationError("compute_forces: one velocity 6-vector per node required");
  if (tangential_stretch && tangential_stretch->size() != contacts.size())
    throw ValidationError("compute_forces: one tangential stretch per contact required");
  const ContactModelParams p = params.resolved(graph);
  const BodyVelocity zero = BodyVelocity::Zero();

  std::vector<ContactForce> out;
  out.reserve(contacts.size());
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    const Contact& contact = contacts[c];
    const bool grounded = contact.a == kGroundIndex;
    const Vec3 com_a =
        grounded ? Vec3::Zero() : graph.nodes[contact.a].position;
    const Vec3 com_b = graph.nodes[contact.b].position;
    const BodyVelocity& va = grounded ? zero : velocities[contact.a];
    const Vec3 stretch =
        tangential_stretch ? (*tangential_stretch)[c] : Vec3::Zero();
    out.push_back(evaluate_contact_force(contact, va, velocities[contact.b],
                                         com_a, com_b, stretch, p));
  }
  return out;
}

namespace {

// Internal relaxation state ----------------------------------------------

struct Body {
  int node = -1;       // graph node index
  double mass = 0.0;
  Vec3 inv_inertia = Vec3::Zero();  // body-frame diagonal of I^-1
  Vec3 x = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  Vec3 x0 = Vec3::Zero();
};

// Persistent contact slot between two candidate bodies.  Between manifold
// refreshes the patch is anchored symmetrically: each point is split into
// an anchor fixed in body a (world-fixed for the ground) and an anchor
// fixed in body b, so per-point penetration tracks the true relative
// normal displacement.  The normal rides with body a's rotation.
struct Slot {
  int a = kGroundIndex;  // body array index, ground = kGroundIndex
  int b = -1;
  bool active = false;
  Vec3 normal_local = Vec3::UnitZ();  // in a's frame (world for ground)
  std::vector<Vec3> anchor_a;         // a-frame (world for ground)
  std::vector<Vec3> anchor_b;         // b-frame
  Vec3 stretch = Vec3::Zero();        // tangential spring, world frame
  double area = 0.0;

  // Scratch for the current step (filled by eval).
  PairForceResult last;
};

struct World {
  std::vector<Body> bodies;
  std::vector<Slot> slots;
  double clip_threshold = 1.0e-3;
};

Obb body_obb(const Body& body, const AssemblyGraph& graph) {
  Obb box;
  box.center = body.x;
  box.R = body.R;
  box.half = 0.5 * graph.nodes[body.node].dimensions;
  return box;
}

// Refresh one slot's manifold from current poses.
void reclip_slot(World& w, Slot& slot, const AssemblyGraph& graph) {
  slot.anchor_a.clear();
  slot.anchor_b.clear();
  ContactPatch patch;
  const Body& bb = w.bodies[slot.b];
  const Obb box_b = body_obb(bb, graph);

  if (slot.a == kGroundIndex) {
    if (!ground_contact(box_b, w.clip_threshold, &patch)) {
      slot.active = false;
      slot.stretch.setZero();
      return;
    }
    slot.normal_local = patch.normal;  // +z, world anchored
    for (std::size_t k = 0; k < patch.points.size(); ++k) {
      const Vec3& p = patch.points[k];
      slot.anchor_a.push_back(Vec3(p.x(), p.y(), 0.0));  // ground plane
      slot.anchor_b.push_back(bb.R.transpose() * (p - bb.x));
    }
  } else {
    const Body& ba = w.bodies[slot.a];
    const Obb box_a = body_obb(ba, graph);
    if (!obb_contact(box_a, box_b, w.clip_threshold, &patch)) {
      slot.active = false;
      slot.stretch.setZero();
      return;
    }
    slot.normal_local = ba.R.transpose() * patch.normal;
    for (std::size_t k = 0; k < patch.points.size(); ++k) {
      const Vec3& p = patch.points[k];
      const Vec3 half_gap = 0.5 * patch.depths[k] * patch.normal;
      slot.anchor_a.push_back(ba.R.transpose() * (p + half_gap - ba.x));
      slot.anchor_b.push_back(bb.R.transpose() * (p - half_gap - bb.x));
    }
  }
  slot.active = true;
  slot.area = patch.area;
}

// Evaluate the contact force of one slot at current poses/velocities.
// `integrate_spring` advances the tangential spring (one solver step);
// read-only passes (residual reports) leave the state untouched.
void eval_slot(World& w, Slot& slot, const ContactModelParams& p, double dt,
               bool integrate_spring) {
  slot.last = PairForceResult{};
  if (!slot.active) return;

  Body& bb = w.bodies[slot.b];
  const bool grounded = slot.a == kGroundIndex;
  const Body* ba = grounded ? nullptr : &w.bodies[slot.a];

  const Vec3 n = grounded ? slot.normal_local : Vec3(ba->R * slot.normal_local);
  const std::size_t count = slot.anchor_a.size();

  // Current world positions and penetrations of the anchored points.
  std::vector<Vec3> points(count);
  std::vector<double> depths(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Vec3 pa = grounded ? slot.anchor_a[k]
                             : Vec3(ba->x + ba->R * slot.anchor_a[k]);
    const Vec3 pb = bb.x + bb.R * slot.anchor_b[k];
    points[k] = 0.5 * (pa + pb);
    depths[k] = -(pb - pa).dot(n);
  }

  auto rel_vel = [&](const Vec3& pt) {
    Vec3 v = bb.v + bb.w.cross(pt - bb.x);
    if (!grounded) v -= ba->v + ba->w.cross(pt - ba->x);
    return v;
  };

  // The normal force, centroid, and slip velocity are independent of the
  // tangential spring, so a single kinematic pass suffices; the spring is
  // advanced before the tangential force is formed from it.
  Vec3 stretch = slot.stretch;
  if (integrate_spring) {
    PairForceResult probe = pair_force(n, points, depths, stretch, p, rel_vel);
    if (!probe.active) {
      slot.stretch.setZero();
      return;
    }
    stretch += probe.v_tangential * dt;
    stretch -= stretch.dot(n) * n;

    Vec3 ft = -p.k_t * stretch - p.gamma_t * probe.v_tangential;
    const double cap = p.mu * probe.f_normal;
    const double ft_norm = ft.norm();
    if (ft_norm > cap) ft *= cap / ft_norm;
    probe.f_tangential = ft;

    // Slip consistency: when the cone clamps the force, rescale the spring
    // so it stores exactly the elastic part actually returned.
    slot.stretch = p.k_t > 0
                       ? Vec3(-(ft + p.gamma_t * probe.v_tangential) / p.k_t)
                       : stretch;
    slot.last = probe;
    return;
  }

  PairForceResult r = pair_force(n, points, depths, stretch, p, rel_vel);
  if (!r.active) return;
  slot.last = r;
}

}  // namespace

EquilibriumReport relax_to_equilibrium(AssemblyGraph& graph,
                                       const ContactModelParams& params,
                                       const RelaxConfig& config) {
  const std::size_t n_nodes = graph.nodes.size();
  EquilibriumReport report;
  report.force_residual.assign(n_nodes, 0.0);
  report.moment_residual.assign(n_nodes, 0.0);
  report.displacement.assign(n_nodes, 0.0);

  // Gross-interpenetration gate (throws) and initial sanity pass.
  detect_contacts(graph, config.overlap_tolerance);

  const ContactModelParams p = params.resolved(graph);
  const RelaxConfig cfg = config.resolved(graph);
  const Vec3 gravity(0.0, 0.0, -p.gravity);

  World w;
  w.clip_threshold = cfg.overlap_tolerance;
  std::vector<int> node_to_body(n_nodes, -1);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (!graph.placed_mask[i]) continue;
    const BrickSpec& b = graph.nodes[i];
    Body body;
    body.node = static_cast<int>(i);
    body.mass = b.mass;
    const Vec3 d = b.dimensions;
    body.inv_inertia = Vec3(
        12.0 / (b.mass * (d.y() * d.y() + d.z() * d.z())),
        12.0 / (b.mass * (d.x() * d.x() + d.z() * d.z())),
        12.0 / (b.mass * (d.x() * d.x() + d.y() * d.y())));
    body.x = body.x0 = b.position;
    body.R = b.rotation;
    node_to_body[i] = static_cast<int>(w.bodies.size());
    w.bodies.push_back(body);
  }

  if (w.bodies.empty()) {  // vacuous stability
    report.stable = true;
    annotate_forces(graph, report.forces);
    return report;
  }

  // Candidate slots: every pair (and brick/ground combination) that could
  // come within contact range given the drift limit.  Beyond the limit the
  // run exits as "drift", so no new pairs can form later.
  const double reach = cfg.collapse_factor * cfg.overlap_tolerance;
  const double margin = reach + 2.0 * cfg.overlap_tolerance;
  {
    std::vector<Vec3> lo(w.bodies.size()), hi(w.bodies.size());
    for (std::size_t i = 0; i < w.bodies.size(); ++i) {
      obb_aabb(body_obb(w.bodies[i], graph), margin, &lo[i], &hi[i]);
      if (lo[i].z() <= margin) {
        Slot s;
        s.a = kGroundIndex;
        s.b = static_cast<int>(i);
        w.slots.push_back(std::move(s));
      }
    }
    for (std::size_t i = 0; i < w.bodies.size(); ++i)
      for (std::size_t j = i + 1; j < w.bodies.size(); ++j) {
        if ((lo[i].array() > hi[j].array()).any() ||
            (lo[j].array() > hi[i].array()).any())
          continue;
        Slot s;
        s.a = static_cast<int>(i);
        s.b = static_cast<int>(j);
        w.slots.push_back(std::move(s));
      }
  }

  const double dt = cfg.dt;
  std::vector<Vec3> force(w.bodies.size());
  std::vector<Vec3> torque(w.bodies.size());

  // Residual/verdict evaluation at the current state (read-only pass).
  auto evaluate_state = [&](EquilibriumReport* rep) {
    for (auto& f : force) f.setZero();
    for (auto& t : torque) t.setZero();
    rep->forces.clear();
    double max_pair_force = 0.0;
    for (Slot& slot : w.slots) {
      eval_slot(w, slot, p, dt, /*integrate_spring=*/false);
      if (!slot.last.active) continue;
      const Vec3 f_on_b =
          slot.last.f_normal * slot.last.normal + slot.last.f_tangential;
      Body& bb = w.bodies[slot.b];
      force[slot.b] += f_on_b;
      torque[slot.b] += (slot.last.centroid - bb.x).cross(f_on_b);
      if (slot.a != kGroundIndex) {
        Body& ba = w.bodies[slot.a];
        force[slot.a] -= f_on_b;
        torque[slot.a] += (slot.last.centroid - ba.x).cross(-f_on_b);
      }
      ContactForce cf;
      cf.a = slot.a == kGroundIndex ? kGroundIndex : w.bodies[slot.a].node;
      cf.b = w.bodies[slot.b].node;
      cf.point = slot.last.centroid;
      cf.normal = slot.last.normal;
      cf.f_normal = slot.last.f_normal;
      cf.f_tangential = slot.last.f_tangential;
      cf.area = slot.area;
      max_pair_force = std::max(max_pair_force, cf.magnitude());
      rep->forces.push_back(std::move(cf));
    }
    for (std::size_t i = 0; i < w.bodies.size(); ++i) {
      const Body& b = w.bodies[i];
      rep->force_residual[b.node] = (force[i] + b.mass * gravity).norm();
      rep->moment_residual[b.node] = torque[i].norm();
    }
    return max_pair_force;
  };

  int iter = 0;
  std::string exit_reason = "not_converged";
  bool converged = false;

  for (; iter < cfg.max_iters; ++iter) {
    // Manifolds are persistent: re-clipping a force-bearing manifold moves
    // its points between solver steps, which kicks the state and can sustain
    // a limit cycle instead of settling.  Established contacts therefore keep
    // their anchors; the periodic pass only (re)builds slots that currently
    // carry no contact, so pairs that approach later still engage.
    if (iter == 0) {
      for (Slot& slot : w.slots) reclip_slot(w, slot, graph);
    } else if (iter % cfg.reclip_every == 0) {
      for (Slot& slot : w.slots)
        if (!slot.active || !slot.last.active) reclip_slot(w, slot, graph);
    }

    // Contact forces (integrating tangential springs).
    for (auto& f : force) f.setZero();
    for (auto& t : torque) t.setZero();
    for (Slot& slot : w.slots) {
      eval_slot(w, slot, p, dt, /*integrate_spring=*/true);
      if (!slot.last.active) continue;
      const Vec3 f_on_b =
          slot.last.f_normal * slot.last.normal + slot.last.f_tangential;
      force[slot.b] += f_on_b;
      torque[slot.b] +=
          (slot.last.centroid - w.bodies[slot.b].x).cross(f_on_b);
      if (slot.a != kGroundIndex) {
        force[slot.a] -= f_on_b;
        torque[slot.a] +=
            (slot.last.centroid - w.bodies[slot.a].x).cross(-f_on_b);
      }
    }

    // Semi-implicit Euler with implicit background damping; gyroscopic
    // coupling is dropped (quasi-static regime).
    const double damp = 1.0 / (1.0 + cfg.damping * dt);
    for (std::size_t i = 0; i < w.bodies.size(); ++i) {
      Body& b = w.bodies[i];
      b.v = (b.v + dt * (force[i] / b.mass + gravity)) * damp;
      b.x += dt * b.v;
      const Vec3 torque_body = b.R.transpose() * torque[i];
      const Vec3 dw_body = b.inv_inertia.cwiseProduct(torque_body);
      b.w = (b.w + dt * (b.R * dw_body)) * damp;
      const double angle = b.w.norm() * dt;
      if (angle > 1e-14)
        b.R = Eigen::AngleAxisd(angle, b.w / b.w.norm()).toRotationMatrix() * b.R;
      if ((iter + 1) % 200 == 0)
        b.R = Eigen::Quaterniond(b.R).normalized().toRotationMatrix();
    }

    if ((iter + 1) % cfg.check_every != 0) continue;

    // Drift / divergence monitors.
    bool drifted = false, diverged = false;
    for (const Body& b : w.bodies) {
      const double d = (b.x - b.x0).norm();
      if (!std::isfinite(d)) diverged = true;
      else if (d > reach) drifted = true;
    }
    if (diverged) {
      exit_reason = "diverged";
      ++iter;
      break;
    }
    if (drifted) {
      exit_reason = "drift";
      ++iter;
      break;
    }

    const double max_pair = evaluate_state(&report);
    if (max_pair > cfg.force_cap) {
      exit_reason = "force_cap";
      ++iter;
      break;
    }

    bool at_rest = true;
    for (const Body& b : w.bodies)
      if (b.v.norm() > cfg.v_eps || b.w.norm() > cfg.w_eps) {
        at_rest = false;
        break;
      }
    if (at_rest) {
      converged = true;
      ++iter;
      break;
    }
  }

  report.iterations = iter;
  const double max_pair = evaluate_state(&report);
  for (const Body& b : w.bodies)
    report.displacement[b.node] = (b.x - b.x0).norm();

  if (converged) {
    const bool residual_ok = report.max_force_residual() <= cfg.eps_force &&
                             report.max_moment_residual() <= cfg.eps_moment;
    const bool cap_ok = max_pair <= cfg.force_cap;
    bool drift_ok = true;
    for (const Body& b : w.bodies)
      if ((b.x - b.x0).norm() > reach) drift_ok = false;
    report.stable = residual_ok && cap_ok && drift_ok;
    if (!report.stable)
      report.reason = !cap_ok ? "force_cap" : (!drift_ok ? "drift" : "residual");
  } else {
    report.stable = false;
    report.reason = exit_reason;
  }

  annotate_forces(graph, report.forces);
  return report;
}

bool is_stable(AssemblyGraph& graph, const ContactModelParams& params,
               const RelaxConfig& config) {
  return relax_to_equilibrium(graph, params, config).stable;
}

void annotate_forces(AssemblyGraph& graph,
                     const std::vector<ContactForce>& forces) {
  graph.edge_forces.assign(graph.edges.size(), EdgeForce{});
  for (const ContactForce& f : forces) {
    if (f.a == kGroundIndex) continue;
    const int e = graph.find_edge(f.a, f.b);
    if (e < 0) continue;
    EdgeForce& ef = graph.edge_forces[e];
    ef.f_normal = f.f_normal;
    ef.f_tangential = f.f_tangential;
    ef.area = f.area;
  }
  graph.annotated = true;
}

bool torque_balance_oracle(const AssemblyGraph& graph,
                           double overlap_tolerance) {
  const auto contacts = detect_contacts(graph, overlap_tolerance);

  // Layered assemblies transmit load straight down: every brick-brick
  // contact normal must be vertical.
  for (const Contact& c : contacts) {
    if (c.a == kGroundIndex) continue;
    if (std::abs(c.patch.normal.z()) < 0.99)
      throw DomainError(
          "torque_balance_oracle: assembly is not layered (tilted contact "
          "normal between brick id " +
          std::to_string(graph.nodes[c.a].id) + " and brick id " +
          std::to_string(graph.nodes[c.b].id) + ")");
  }

  // Group contact interfaces by height.
  struct Interface {
    double z = 0.0;
    std::vector<Eigen::Vector2d> points;
  };
  std::vector<Interface> interfaces;
  auto interface_for = [&](double z) -> Interface& {
    for (Interface& itf : interfaces)
      if (std::abs(itf.z - z) < 1e-6) return itf;
    interfaces.push_back(Interface{z, {}});
    return interfaces.back();
  };
  for (const Contact& c : contacts) {
    double z_mean = 0.0;
    for (const Vec3& pt : c.patch.points) z_mean += pt.z();
    z_mean /= static_cast<double>(c.patch.points.size());
    if (c.a == kGroundIndex) z_mean = 0.0;
    Interface& itf = interface_for(z_mean);
    for (const Vec3& pt : c.patch.points)
      itf.points.emplace_back(pt.x(), pt.y());
  }

  // Every subassembly above an interface must have its combined COM over
  // that interface's support hull.
  for (const Interface& itf : interfaces) {
    double mass = 0.0;
    Eigen::Vector2d com = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      if (!graph.placed_mask[i]) continue;
      const BrickSpec& b = graph.nodes[i];
      if (b.position.z() <= itf.z + 1e-9) continue;
      mass += b.mass;
      com += b.mass * Eigen::Vector2d(b.position.x(), b.position.y());
    }
    if (mass <= 0.0) continue;  // nothing above this interface
    com /= mass;

    const auto hull = convex_hull_2d(itf.points);
    if (hull.size() >= 3) {
      if (!point_in_convex_polygon_2d(com, hull, 1e-9)) return false;
    } else if (hull.size() == 2) {
      const Eigen::Vector2d d = hull[1] - hull[0];
      const double t = std::clamp(d.squaredNorm() > 0
                                      ? (com - hull[0]).dot(d) / d.squaredNorm()
                                      : 0.0,
                                  0.0, 1.0);
      if ((com - (hull[0] + t * d)).norm() > 1e-9) return false;
    } else if (hull.size() == 1) {
      if ((com - hull[0]).norm() > 1e-9) return false;
    } else {
      return false;  // an above-set with no support at all
    }
  }
  return true;
}

}  // namespace drystack

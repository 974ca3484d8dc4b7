#pragma once

// Quasi-static rigid-body relaxation for brick assemblies.
//
// Bricks are rigid boxes coupled by penalty contacts (linear spring-dashpot
// normal model, regularized Coulomb friction).  The assembly is integrated
// with semi-implicit Euler under gravity plus background viscous damping
// until kinetic energy dies out; the converged contact network is then
// checked against force/torque residual thresholds and a contact-force cap
// to decide static stability.

#include <cmath>
#include <string>
#include <vector>

#include "drystack/geometry.hpp"
#include "drystack/graph.hpp"

namespace drystack {

// Index used for the ground half of a contact pair.
inline constexpr int kGroundIndex = -1;

// Rigid-body velocity: linear (m/s) stacked over angular (rad/s).
using BodyVelocity = Eigen::Matrix<double, 6, 1>;

// Contact constitutive parameters.  Negative damping values mean "derive
// from the assembly at solve time" using the documented defaults.
struct ContactModelParams {
  double k_n = 1.0e6;   // normal spring stiffness [N/m]
  double k_t = 5.0e5;   // tangential spring stiffness [N/m]
  double gamma_n = -1;  // normal dashpot [N s/m]; <0 -> 2*sqrt(k_n * m_min)
  double gamma_t = -1;  // tangential dashpot; <0 -> 0.5 * gamma_n
  double mu = 0.6;      // Coulomb friction coefficient
  double gravity = kGravity;  // field magnitude, acts along -z

  // Resolve every negative entry against the placed bricks of `graph`.
  ContactModelParams resolved(const AssemblyGraph& graph) const;
};

// Solver configuration.  Negative thresholds are derived from the assembly.
struct RelaxConfig {
  double dt = 1.0e-4;     // integration step [s]
  int max_iters = 20000;  // step budget before declaring non-convergence
  double eps_force = -1;   // force residual threshold; <0 -> 0.01*m_min*g
  double eps_moment = -1;  // moment threshold; <0 -> eps_force * min_dim
  double force_cap = -1;   // contact force cap; <0 -> 50 * heaviest weight
  double overlap_tolerance = 1.0e-3;  // admissible initial penetration [m]
  double collapse_factor = 100.0;     // drift limit = factor * overlap_tol

  // Internal integration knobs (fixed defaults, exposed for tests).
  int check_every = 25;   // convergence test cadence [steps]
  int reclip_every = 10;  // contact manifold refresh cadence [steps]
  double v_eps = 1.0e-5;  // linear speed considered "at rest" [m/s]
  double w_eps = 1.0e-3;  // angular speed considered "at rest" [rad/s]
  double damping = 50.0;  // background viscous rate [1/s]

  RelaxConfig resolved(const AssemblyGraph& graph) const;
};

// One detected contact between bodies `a` and `b` (graph node indices).
// Ground contacts use a == kGroundIndex so the patch normal, which points
// from a toward b, is +z for a brick resting on the floor.
struct Contact {
  int a = kGroundIndex;
  int b = -1;
  ContactPatch patch;  // normal a -> b; depths clamped to >= 0
};

// Aggregated force transmitted through one contact pair.  The force exerted
// on body b is f_normal * normal + f_tangential; body a receives the
// opposite (Newton's third law).
struct ContactForce {
  int a = kGroundIndex;
  int b = -1;
  Vec3 point = Vec3::Zero();   // force-weighted contact centroid [m]
  Vec3 normal = Vec3::UnitZ();  // unit normal, from a toward b
  double f_normal = 0.0;       // normal force magnitude [N], >= 0
  Vec3 f_tangential = Vec3::Zero();  // friction force on b [N]
  double area = 0.0;           // patch area [m^2]

  double magnitude() const {
    return std::sqrt(f_normal * f_normal + f_tangential.squaredNorm());
  }
};

// Result of a relaxation run.
struct EquilibriumReport {
  bool stable = false;
  int iterations = 0;  // steps actually integrated
  std::string reason;  // "", "not_converged", "drift", "force_cap", ...
  std::vector<double> force_residual;   // per node [N] (0 for unplaced)
  std::vector<double> moment_residual;  // per node [N m]
  std::vector<double> displacement;     // per node, final COM drift [m]
  std::vector<ContactForce> forces;     // final pair forces

  double max_force_residual() const;
  double max_moment_residual() const;
  double max_displacement() const;
};

// Detect all contacts among placed bricks and against the ground plane
// z = 0 at the poses stored in the graph.  Surfaces within
// `overlap_tolerance` of touching count as contacts; reported depths are
// clamped to >= 0.  Throws GeometryError naming the offending pair if any
// penetration exceeds 10% of the smallest brick dimension involved.
std::vector<Contact> detect_contacts(const AssemblyGraph& graph,
                                     double overlap_tolerance = 1.0e-3);

// Evaluate the spring-dashpot force law for one contact.  Velocities are
// rigid-body 6-vectors (linear over angular) about the given centers of
// mass; `tangential_stretch` is the accumulated tangential spring
// displacement (world frame).  Ground contacts pass a zero velocity for
// side a.  The per-point normal stiffness is k_n / point_count so a
// uniformly overlapping patch reproduces the pair-level force law.
ContactForce evaluate_contact_force(const Contact& contact,
                                    const BodyVelocity& vel_a,
                                    const BodyVelocity& vel_b,
                                    const Vec3& com_a, const Vec3& com_b,
                                    const Vec3& tangential_stretch,
                                    const ContactModelParams& params);

// Batch force evaluation at the graph's stored poses.  `velocities` holds
// one 6-vector per graph node (entries for unplaced nodes are ignored);
// `tangential_stretch`, when given, supplies one accumulated spring vector
// per contact (defaults to zero springs).
std::vector<ContactForce> compute_forces(
    const AssemblyGraph& graph, const std::vector<Contact>& contacts,
    const std::vector<BodyVelocity>& velocities,
    const ContactModelParams& params,
    const std::vector<Vec3>* tangential_stretch = nullptr);

// Relax the placed sub-assembly to rest and judge stability.  Edge forces
// for contacting placed pairs are written back into graph.edge_forces from
// the final step's contact network and graph.annotated is set.
EquilibriumReport relax_to_equilibrium(
    AssemblyGraph& graph, const ContactModelParams& params = {},
    const RelaxConfig& config = {});

// Convenience wrapper: relax and return the verdict only.
bool is_stable(AssemblyGraph& graph, const ContactModelParams& params = {},
               const RelaxConfig& config = {});

// Write a force list into graph.edge_forces (ground reactions have no edge
// and are skipped) and set graph.annotated.
void annotate_forces(AssemblyGraph& graph,
                     const std::vector<ContactForce>& forces);

// Independent static check for layered assemblies: every brick-brick
// contact normal must be vertical.  Groups contact interfaces by height and
// requires the combined center of mass of everything above each interface
// to project into the convex hull of that interface's contact points.
// Throws DomainError when the assembly is not layered.
bool torque_balance_oracle(const AssemblyGraph& graph,
                           double overlap_tolerance = 1.0e-3);

}  // namespace drystack

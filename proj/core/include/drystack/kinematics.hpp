#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drystack/brick.hpp"
#include "drystack/geometry.hpp"

namespace drystack {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Rigid transform: rotate, then translate. Used both for link offsets and
// for end-effector poses.
struct Pose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

Pose compose(const Pose& a, const Pose& b);

// Geodesic angle between two rotations, radians in [0, pi].
double rotation_angle(const Mat3& a, const Mat3& b);

// Pose on the straight task-space path from `a` to `b`: position linear in
// u in [0,1], orientation along the geodesic.
Pose pose_interpolate(const Pose& a, const Pose& b, double u);

// One revolute joint: rotation about `axis` in the local frame entered from
// the previous link, followed by the rigid `offset` to the next joint (the
// last joint's offset reaches the end effector).
struct JointSpec {
  Vec3 axis = Vec3::UnitZ();  // unit vector, local frame
  Pose offset;                // link transform to the next frame
  double lo = -3.14159265358979323846;
  double hi = 3.14159265358979323846;
  double effort_weight = 1.0;  // diagonal inertia proxy, kg*m^2
};

struct ManipulatorModel {
  // Where the arm is mounted in the world (a work cell calibrates this);
  // the joint chain hangs off it. Identity by default.
  Pose base;
  std::vector<JointSpec> joints;

  int n() const { return static_cast<int>(joints.size()); }

  // Upper bound on end-effector distance from the base: the sum of link
  // offset translation norms. Targets farther than this are unreachable.
  double reach() const;

  // Throws ValidationError unless: >= 2 joints, unit axes, lo < hi, and
  // positive effort weights.
  void validate() const;

  // Clamp a configuration into the joint limits, component-wise.
  VecX clamp(const VecX& q) const;

  // Default 6-revolute arm (yaw-pitch-pitch wrist r/p/r), link lengths
  // summing to 1.5 m.
  static ManipulatorModel six_axis();

  // The six-axis arm mounted 0.75 m back from the origin: the standard
  // pick-and-place cell for assemblies laid out around the origin, keeping
  // the build volume outside the arm's own column.
  static ManipulatorModel workcell();

  // Planar arm rotating about z: two links in the xy-plane, for analytic
  // checks (manipulability = l1*l2*|sin q2|).
  static ManipulatorModel planar(double l1, double l2);
};

// JSON layout:
// {"base": {"translation": [x,y,z], "rpy": [roll,pitch,yaw]},   (optional)
//  "joints": [{"axis": [x,y,z], "offset": {"translation": [x,y,z],
//   "rpy": [roll,pitch,yaw]}, "limits": [lo,hi], "effort_weight": w}, ...]}
nlohmann::json model_to_json(const ManipulatorModel& model);
ManipulatorModel model_from_json(const nlohmann::json& j);

// Task-space tolerances and safety margins for feasibility, trajectories,
// and IK convergence (IK converges to a tenth of the terminal tolerances).
struct KinematicLimits {
  double pos_tol = 0.01;      // terminal position compliance, m
  double vel_limit = 1.0;     // task-space speed cap, m/s
  double acc_limit = 10.0;    // task-space acceleration cap, m/s^2
  double orient_tol = 0.1;    // terminal orientation compliance, rad
  double clearance = 0.02;    // minimum obstacle distance, m
  double sing_floor = 1e-3;   // manipulability floor

  void validate() const;  // all positive
};

struct TrajectorySample {
  double time = 0.0;  // s
  VecX q;             // joint configuration, rad
  Pose ee;            // end-effector pose at q
  VecX qd;            // backward-difference joint velocity, rad/s
  VecX qdd;           // backward-difference joint acceleration, rad/s^2
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

// Throws ValidationError unless timestamps strictly increase and the stored
// velocities/accelerations match backward differences of q within 1e-6.
void validate_trajectory(const Trajectory& t);

// End-effector pose: the product of per-joint rotation+offset transforms.
Pose fk(const ManipulatorModel& model, const VecX& q);

// Geometric Jacobian, 6 x n: rows 0-2 linear (axis x (p_ee - p_joint)),
// rows 3-5 angular (world-frame joint axis).
MatX jacobian(const ManipulatorModel& model, const VecX& q);

// Yoshikawa index sqrt(det(J J^T)). For mechanisms whose joint axes are all
// parallel (planar arms) the in-plane 2 x n position block is used, since
// the out-of-plane rows are identically zero; otherwise the full 6 x n.
double manipulability(const ManipulatorModel& model, const VecX& q);

// Damped-least-squares IK from q_init, joint limits clamped every step.
// Converges when position error < pos_tol/10 and orientation error
// < orient_tol/10. Throws UnreachableError when the target is farther than
// reach() or the iteration cap passes without convergence; throws
// SingularityError when the converged solution has manipulability
// <= sing_floor.
VecX ik(const ManipulatorModel& model, const Pose& target, const VecX& q_init,
        double sing_floor, const KinematicLimits& limits = {});

// Eight fixed initial configurations spanning the shoulder/elbow/wrist
// branches, each clamped into the joint limits.
std::vector<VecX> ik_seeds(const ManipulatorModel& model);

// True iff ik succeeds from at least one fixed seed, the solution clears
// the manipulability floor, and the target keeps `clearance` from the arm
// base and every obstacle. Never throws: any failure is false.
bool kinematic_feasible(const ManipulatorModel& model, const Pose& target,
                        const KinematicLimits& limits,
                        const std::vector<Obb>& obstacles = {});

// Straight task-space path from `from` to `to` at speed v_max, sampled
// every dt seconds (duration ||d||/v_max, end pose included exactly).
// Joint configurations by per-sample IK warm-started from the previous
// sample; velocities/accelerations by backward differences. Throws
// TrajectoryError naming the first sample that exceeds vel_limit/acc_limit
// or comes within `clearance` of an obstacle.
Trajectory linear_trajectory(const ManipulatorModel& model, const Pose& from,
                             const Pose& to, double v_max, double dt,
                             const KinematicLimits& limits,
                             const std::vector<Obb>& obstacles = {});

// Effort-weighted path cost: sum over steps of |tau . qd| * dt with
// tau = effort_weights * qdd, plus rho for every sample whose
// manipulability falls below sing_floor. Nonnegative and additive over
// trajectory concatenation.
double kinematic_cost(const ManipulatorModel& model, const Trajectory& t,
                      double rho, double sing_floor);

}  // namespace drystack

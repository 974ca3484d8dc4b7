#include "drystack/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "drystack/errors.hpp"

namespace drystack {

namespace {

using nlohmann::json;

Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

// World-frame origin and axis of every joint plus the end pose, shared by
// fk, jacobian, and manipulability.
struct ChainFrames {
  std::vector<Vec3> origins;
  std::vector<Vec3> axes;
  Pose ee;
};

ChainFrames chain_frames(const ManipulatorModel& m, const VecX& q) {
  if (q.size() != m.n())
    throw ValidationError("kinematics: configuration length " +
                          std::to_string(q.size()) + " does not match " +
                          std::to_string(m.n()) + " joints");
  ChainFrames f;
  f.origins.reserve(m.joints.size());
  f.axes.reserve(m.joints.size());
  Pose T = m.base;
  for (int i = 0; i < m.n(); ++i) {
    f.origins.push_back(T.position);
    f.axes.push_back(T.rotation * m.joints[i].axis);
    Pose joint;
    joint.rotation = axis_rotation(m.joints[i].axis, q[i]);
    T = compose(T, compose(joint, m.joints[i].offset));
  }
  f.ee = T;
  return f;
}

MatX jacobian_of(const ChainFrames& f) {
  const int n = static_cast<int>(f.axes.size());
  MatX J(6, n);
  for (int i = 0; i < n; ++i) {
    J.block<3, 1>(0, i) = f.axes[i].cross(f.ee.position - f.origins[i]);
    J.block<3, 1>(3, i) = f.axes[i];
  }
  return J;
}

// Orientation error as an axis-angle vector rotating `current` onto
// `target`.
Vec3 orientation_error(const Mat3& target, const Mat3& current) {
  const Eigen::AngleAxisd rel(target * current.transpose());
  return rel.angle() * rel.axis();
}

Vec3 read_vec3(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw FormatError(std::string("manipulator model: '") + key +
                      "' must be a 3-element array");
  return Vec3(j[key][0].get<double>(), j[key][1].get<double>(),
              j[key][2].get<double>());
}

}  // namespace

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.position = a.position + a.rotation * b.position;
  return out;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Pose pose_interpolate(const Pose& a, const Pose& b, double u) {
  Pose out;
  out.position = a.position + u * (b.position - a.position);
  const Eigen::AngleAxisd rel(a.rotation.transpose() * b.rotation);
  out.rotation =
      a.rotation *
      Eigen::AngleAxisd(u * rel.angle(), rel.axis()).toRotationMatrix();
  return out;
}

double ManipulatorModel::reach() const {
  double r = 0.0;
  for (const JointSpec& j : joints) r += j.offset.position.norm();
  return r;
}

void ManipulatorModel::validate() const {
  if (joints.size() < 2)
    throw ValidationError("manipulator model: at least 2 joints required");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const JointSpec& j = joints[i];
    const std::string where = "joint " + std::to_string(i);
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw ValidationError("manipulator model: " + where +
                            " axis is not a unit vector");
    if (!(j.lo < j.hi))
      throw ValidationError("manipulator model: " + where +
                            " limits must satisfy lo < hi");
    if (!(j.effort_weight > 0.0))
      throw ValidationError("manipulator model: " + where +
                            " effort weight must be positive");
  }
}

VecX ManipulatorModel::clamp(const VecX& q) const {
  VecX out = q;
  for (int i = 0; i < n(); ++i)
    out[i] = std::clamp(out[i], joints[i].lo, joints[i].hi);
  return out;
}

ManipulatorModel ManipulatorModel::six_axis() {
  // Yaw base, two pitch links, and a roll-pitch-roll wrist; link lengths
  // 0.50 + 0.45 + 0.35 + 0.10 + 0.07 + 0.03 = 1.5 m. The first link
  // carries the shoulder 0.30 m off the yaw axis (and 0.40 m up): with a
  // down-pointing tool the wrist center must stay outside the folded-elbow
  // radius of the shoulder, and the orbiting shoulder lets the arm reach
  // across its own base for targets near the column, where a shoulder fixed
  // on the column itself would leave a dead zone around it. The yaw/roll
  // limits extend past pi so that reach-across postures (base yaw or tool
  // roll at +-pi) are not cut off by an artificial seam.
  const struct {
    Vec3 axis;
    Vec3 offset;
    double lo, hi, effort;
  } rows[6] = {
      {Vec3::UnitZ(), Vec3(0.30, 0, 0.40), -3.5, 3.5, 4.0},
      {Vec3::UnitY(), Vec3(0, 0, 0.45), -2.0, 2.0, 4.0},
      {Vec3::UnitY(), Vec3(0, 0, 0.35), -2.5, 2.5, 2.0},
      {Vec3::UnitZ(), Vec3(0, 0, 0.10), -3.5, 3.5, 1.0},
      {Vec3::UnitY(), Vec3(0, 0, 0.07), -2.0, 2.0, 0.5},
      {Vec3::UnitZ(), Vec3(0, 0, 0.03), -3.5, 3.5, 0.25},
  };
  ManipulatorModel m;
  for (const auto& r : rows) {
    JointSpec j;
    j.axis = r.axis;
    j.offset.position = r.offset;
    j.lo = r.lo;
    j.hi = r.hi;
    j.effort_weight = r.effort;
    m.joints.push_back(j);
  }
  return m;
}

ManipulatorModel ManipulatorModel::workcell() {
  ManipulatorModel m = six_axis();
  m.base.position = Vec3(0.0, -0.75, 0.0);
  return m;
}

ManipulatorModel ManipulatorModel::planar(double l1, double l2) {
  ManipulatorModel m;
  for (double len : {l1, l2}) {
    JointSpec j;
    j.axis = Vec3::UnitZ();
    j.offset.position = Vec3(len, 0, 0);
    m.joints.push_back(j);
  }
  return m;
}

namespace {

// rpy = (roll about x, pitch about y, yaw about z), composed as
// Rz(yaw) * Ry(pitch) * Rx(roll).
json pose_to_json(const Pose& p) {
  const Vec3 zyx = p.rotation.eulerAngles(2, 1, 0);
  return json{
      {"translation", {p.position.x(), p.position.y(), p.position.z()}},
      {"rpy", {zyx[2], zyx[1], zyx[0]}}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  if (j.contains("translation")) p.position = read_vec3(j, "translation");
  if (j.contains("rpy")) {
    const Vec3 rpy = read_vec3(j, "rpy");
    p.rotation = (Eigen::AngleAxisd(rpy[2], Vec3::UnitZ()) *
                  Eigen::AngleAxisd(rpy[1], Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy[0], Vec3::UnitX()))
                     .toRotationMatrix();
  }
  return p;
}

}  // namespace

nlohmann::json model_to_json(const ManipulatorModel& model) {
  json joints = json::array();
  for (const JointSpec& j : model.joints) {
    joints.push_back({{"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
                      {"offset", pose_to_json(j.offset)},
                      {"limits", {j.lo, j.hi}},
                      {"effort_weight", j.effort_weight}});
  }
  return json{{"base", pose_to_json(model.base)}, {"joints", joints}};
}

ManipulatorModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("joints") || !j["joints"].is_array())
    throw FormatError("manipulator model: 'joints' array required");
  ManipulatorModel m;
  if (j.contains("base")) m.base = pose_from_json(j["base"]);
  for (const json& row : j["joints"]) {
    JointSpec spec;
    spec.axis = read_vec3(row, "axis");
    if (row.contains("offset")) spec.offset = pose_from_json(row["offset"]);
    if (!row.contains("limits") || !row["limits"].is_array() ||
        row["limits"].size() != 2)
      throw FormatError("manipulator model: 'limits' must be [lo, hi]");
    spec.lo = row["limits"][0].get<double>();
    spec.hi = row["limits"][1].get<double>();
    spec.effort_weight = row.value("effort_weight", 1.0);
    m.joints.push_back(spec);
  }
  m.validate();
  return m;
}

void KinematicLimits::validate() const {
  if (!(pos_tol > 0 && vel_limit > 0 && acc_limit > 0 && orient_tol > 0 &&
        clearance > 0 && sing_floor > 0))
    throw ValidationError("kinematic limits: all fields must be positive");
}

void validate_trajectory(const Trajectory& t) {
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    const TrajectorySample& s = t.samples[k];
    if (s.qd.size() != s.q.size() || s.qdd.size() != s.q.size())
      throw ValidationError("trajectory: sample " + std::to_string(k) +
                            " has mismatched vector sizes");
    if (k == 0) continue;
    const TrajectorySample& prev = t.samples[k - 1];
    const double dt = s.time - prev.time;
    if (!(dt > 0))
      throw ValidationError("trajectory: timestamps must strictly increase "
                            "at sample " +
                            std::to_string(k));
    if (((s.q - prev.q) / dt - s.qd).cwiseAbs().maxCoeff() > 1e-6 ||
        ((s.qd - prev.qd) / dt - s.qdd).cwiseAbs().maxCoeff() > 1e-6)
      throw ValidationError(
          "trajectory: sample " + std::to_string(k) +
          " velocities/accelerations are not finite-difference consistent");
  }
}

Pose fk(const ManipulatorModel& m, const VecX& q) {
  return chain_frames(m, q).ee;
}

MatX jacobian(const ManipulatorModel& m, const VecX& q) {
  return jacobian_of(chain_frames(m, q));
}

double manipulability(const ManipulatorModel& m, const VecX& q) {
  const ChainFrames f = chain_frames(m, q);
  const MatX J = jacobian_of(f);

  // Planar mechanism: all joint axes parallel. The out-of-plane linear row
  // and the two in-plane angular rows are identically zero, so the full
  // Gram determinant vanishes for structural (not postural) reasons; the
  // index that discriminates postures is the in-plane position block.
  bool planar = true;
  for (const Vec3& a : f.axes)
    if (std::abs(std::abs(a.dot(f.axes[0])) - 1.0) > 1e-9) planar = false;

  if (planar) {
    const Vec3 e1 = f.axes[0].unitOrthogonal();
    const Vec3 e2 = f.axes[0].cross(e1);
    MatX Jp(2, J.cols());
    Jp.row(0) = e1.transpose() * J.topRows(3);
    Jp.row(1) = e2.transpose() * J.topRows(3);
    return std::sqrt(std::max(0.0, (Jp * Jp.transpose()).determinant()));
  }
  return std::sqrt(std::max(0.0, (J * J.transpose()).determinant()));
}

VecX ik(const ManipulatorModel& m, const Pose& target, const VecX& q_init,
        double sing_floor, const KinematicLimits& limits) {
  m.validate();
  limits.validate();
  if (q_init.size() != m.n())
    throw ValidationError("ik: seed length does not match joint count");
  const double base_dist = (target.position - m.base.position).norm();
  if (base_dist > m.reach())
    throw UnreachableError("ik: target at " + std::to_string(base_dist) +
                           " m from the base exceeds the " +
                           std::to_string(m.reach()) + " m reach");

  const double pos_tol = limits.pos_tol / 10.0;
  const double ang_tol = limits.orient_tol / 10.0;
  constexpr int kMaxIters = 300;
  constexpr double kDamping2 = 0.01;  // (lambda = 0.1)^2
  constexpr double kMaxStep = 0.2;    // rad per joint per iteration

  VecX q = m.clamp(q_init);
  for (int it = 0; it < kMaxIters; ++it) {
    const ChainFrames f = chain_frames(m, q);
    const Vec3 pos_err = target.position - f.ee.position;
    const Vec3 rot_err = orientation_error(target.rotation, f.ee.rotation);
    if (pos_err.norm() < pos_tol && rot_err.norm() < ang_tol) {
      const double w = manipulability(m, q);
      if (w <= sing_floor)
        throw SingularityError("ik: converged configuration has "
                               "manipulability " +
                               std::to_string(w) + " <= floor " +
                               std::to_string(sing_floor));
      return q;
    }
    const MatX J = jacobian_of(f);
    Eigen::Matrix<double, 6, 1> err;
    err << pos_err, rot_err;
    Eigen::Matrix<double, 6, 6> A = J * J.transpose();
    A.diagonal().array() += kDamping2;
    VecX dq = J.transpose() * A.ldlt().solve(err);
    const double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > kMaxStep) dq *= kMaxStep / biggest;
    q = m.clamp(q + dq);
  }
  throw UnreachableError("ik: no convergence within " +
                         std::to_string(kMaxIters) + " iterations");
}

std::vector<VecX> ik_seeds(const ManipulatorModel& m) {
  // Two bend profiles -- a mid-range reach and an overhand fold (elbow past
  // vertical, wrist counter-bent) that suits down-pointing tool poses --
  // each hung at the four compass azimuths of the first joint and mirrored
  // through the base plane, so every quadrant gets an elbow-up and an
  // elbow-down start, including the reach-across postures near +-pi.
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr double kProfiles[2][6] = {
      {0.0, 0.6, 1.2, 0.4, 0.8, 0.5},
      {0.0, 0.7, 1.8, 0.2, 0.65, 0.3},
  };
  static constexpr double kAzimuths[4] = {0.0, 0.5 * kPi, kPi, -0.5 * kPi};
  std::vector<VecX> seeds;
  seeds.reserve(16);
  for (const auto& profile : kProfiles) {
    for (const double az : kAzimuths) {
      for (const double sign : {1.0, -1.0}) {
        VecX q(m.n());
        for (int i = 0; i < m.n(); ++i) q[i] = sign * profile[i % 6];
        q[0] += az;
        seeds.push_back(m.clamp(q));
      }
    }
  }
  return seeds;
}

bool kinematic_feasible(const ManipulatorModel& m, const Pose& target,
                        const KinematicLimits& limits,
                        const std::vector<Obb>& obstacles) {
  try {
    m.validate();
    limits.validate();
    if ((target.position - m.base.position).norm() < limits.clearance)
      return false;  // inside the arm's own mounting zone
    for (const Obb& box : obstacles)
      if (point_obb_distance(target.position, box) < limits.clearance)
        return false;
    for (const VecX& seed : ik_seeds(m)) {
      try {
        ik(m, target, seed, limits.sing_floor, limits);
        return true;
      } catch (const Error&) {
        // next seed
      }
    }
  } catch (const Error&) {
    // feasibility never throws
  }
  return false;
}

Trajectory linear_trajectory(const ManipulatorModel& m, const Pose& from,
                             const Pose& to, double v_max, double dt,
                             const KinematicLimits& limits,
                             const std::vector<Obb>& obstacles) {
  m.validate();
  limits.validate();
  if (!(v_max > 0) || !(dt > 0))
    throw ValidationError("linear_trajectory: v_max and dt must be positive");

  const Vec3 d = to.position - from.position;
  const double dist = d.norm();
  const double T = dist / v_max;
  // Samples at k*dt, with the final sample pinned to exactly T.
  const int steps =
      dist < 1e-12 ? 0 : static_cast<int>(std::ceil(T / dt - 1e-9));

  // Singularity handling belongs to the cost penalty, not the path solver,
  // so per-sample IK runs with the check disabled.
  const double no_floor = -1.0;

  const auto solve_first = [&](const Pose& pose) {
    std::string last_msg = "no seeds";
    for (const VecX& seed : ik_seeds(m)) {
      try {
        return ik(m, pose, seed, no_floor, limits);
      } catch (const Error& e) {
        last_msg = e.what();
      }
    }
    throw TrajectoryError("trajectory: sample 0 violates reachability (" +
                          last_msg + ")");
  };

  Trajectory t;
  std::vector<Vec3> commanded;
  for (int k = 0; k <= steps; ++k) {
    const double time = k == steps ? T : k * dt;
    const double u = steps == 0 ? 0.0 : time / T;
    const Pose pose = pose_interpolate(from, to, u);

    TrajectorySample s;
    s.time = time;
    if (k == 0) {
      s.q = solve_first(pose);
    } else {
      try {
        s.q = ik(m, pose, t.samples.back().q, no_floor, limits);
      } catch (const Error& e) {
        throw TrajectoryError("trajectory: sample " + std::to_string(k) +
                              " violates reachability (" + e.what() + ")");
      }
    }
    s.ee = fk(m, s.q);
    if (k == 0) {
      s.qd = VecX::Zero(m.n());
      s.qdd = VecX::Zero(m.n());
    } else {
      const TrajectorySample& prev = t.samples.back();
      const double step_dt = s.time - prev.time;
      s.qd = (s.q - prev.q) / step_dt;
      s.qdd = (s.qd - prev.qd) / step_dt;
    }
    t.samples.push_back(std::move(s));
    commanded.push_back(pose.position);
  }

  // Constraint sweep over the commanded task-space path: speed between
  // samples, acceleration from second differences, obstacle clearance per
  // sample. The first offender is reported by index and constraint.
  for (std::size_t k = 0; k < commanded.size(); ++k) {
    for (const Obb& box : obstacles)
      if (point_obb_distance(commanded[k], box) <= limits.clearance)
        throw TrajectoryError("trajectory: sample " + std::to_string(k) +
                              " violates clearance");
    if (k == 0) continue;
    const double step_dt = t.samples[k].time - t.samples[k - 1].time;
    const double speed = (commanded[k] - commanded[k - 1]).norm() / step_dt;
    if (speed > limits.vel_limit + 1e-12)
      throw TrajectoryError("trajectory: sample " + std::to_string(k) +
                            " violates velocity limit");
    if (k + 1 < commanded.size()) {
      const double next_dt = t.samples[k + 1].time - t.samples[k].time;
      const Vec3 v0 = (commanded[k] - commanded[k - 1]) / step_dt;
      const Vec3 v1 = (commanded[k + 1] - commanded[k]) / next_dt;
      const double acc = (v1 - v0).norm() / (0.5 * (step_dt + next_dt));
      if (acc > limits.acc_limit + 1e-12)
        throw TrajectoryError("trajectory: sample " + std::to_string(k) +
                              " violates acceleration limit");
    }
  }
  return t;
}

double kinematic_cost(const ManipulatorModel& m, const Trajectory& t,
                      double rho, double sing_floor) {
  if (t.samples.empty())
    throw ValidationError("kinematic_cost: empty trajectory");
  VecX effort(m.n());
  for (int i = 0; i < m.n(); ++i) effort[i] = m.joints[i].effort_weight;

  double cost = 0.0;
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    const TrajectorySample& s = t.samples[k];
    if (k > 0) {
      const double dt = s.time - t.samples[k - 1].time;
      const VecX tau = effort.cwiseProduct(s.qdd);
      cost += std::abs(tau.dot(s.qd)) * dt;
    }
    if (manipulability(m, s.q) < sing_floor) cost += rho;
  }
  return cost;
}

}  // namespace drystack

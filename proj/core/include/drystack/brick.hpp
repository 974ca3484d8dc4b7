#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace drystack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;  // m/s^2, -z

// One rigid cuboid brick. `rotation` maps body axes to world axes and must be
// orthonormal to 1e-9. `dimensions` are full extents along the body axes.
struct BrickSpec {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 dimensions = Vec3::Zero();
  double mass = 0.0;

  double weight() const { return mass * kGravity; }
  Vec3 half_extents() const { return 0.5 * dimensions; }
};

// Generator parameters are kept as a flat name -> value map so designs
// round-trip through JSON without a schema per class.
using ParamMap = std::map<std::string, double>;

struct Design {
  std::string class_label;
  ParamMap params;
  std::vector<BrickSpec> bricks;

  std::size_t size() const { return bricks.size(); }
  const BrickSpec* find(int id) const {
    for (const auto& b : bricks)
      if (b.id == id) return &b;
    return nullptr;
  }
  double min_mass() const;
  double max_mass() const;
  double min_dimension() const;
};

// Throws ValidationError naming the offending brick index and field.
// Checks: unique non-negative ids, orthonormal rotation (1e-9), positive
// dimensions and mass, finite values.
void validate_design(const Design& design);

// Orthonormality defect max(|R R^T - I|).
double rotation_defect(const Mat3& rotation);

}  // namespace drystack

#include "drystack/brick.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "drystack/errors.hpp"

namespace drystack {

double Design::min_mass() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : bricks) m = std::min(m, b.mass);
  return m;
}

double Design::max_mass() const {
  double m = 0.0;
  for (const auto& b : bricks) m = std::max(m, b.mass);
  return m;
}

double Design::min_dimension() const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : bricks) d = std::min(d, b.dimensions.minCoeff());
  return d;
}

double rotation_defect(const Mat3& rotation) {
  const Mat3 defect = rotation * rotation.transpose() - Mat3::Identity();
  return defect.cwiseAbs().maxCoeff();
}

namespace {

[[noreturn]] void fail(std::size_t index, int id, const std::string& field, const std::string& why) {
  std::ostringstream os;
  os << "brick[" << index << "] (id " << id << "): field '" << field << "' " << why;
  throw ValidationError(os.str());
}

bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

void validate_design(const Design& design) {
  std::set<int> seen;
  for (std::size_t i = 0; i < design.bricks.size(); ++i) {
    const BrickSpec& b = design.bricks[i];
    if (b.id < 0) fail(i, b.id, "id", "must be non-negative");
    if (!seen.insert(b.id).second) fail(i, b.id, "id", "duplicates an earlier brick id");
    if (!all_finite(b.position)) fail(i, b.id, "position", "must be finite");
    if (!b.rotation.allFinite()) fail(i, b.id, "rotation", "must be finite");
    if (rotation_defect(b.rotation) > 1e-9)
      fail(i, b.id, "rotation", "is not orthonormal within 1e-9");
    if (!all_finite(b.dimensions) || b.dimensions.minCoeff() <= 0.0)
      fail(i, b.id, "dimensions", "must be strictly positive");
    if (!std::isfinite(b.mass) || b.mass <= 0.0) fail(i, b.id, "mass", "must be strictly positive");
  }
}

}  // namespace drystack

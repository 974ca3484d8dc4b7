#pragma once

#include <cstdint>
#include <string>

#include "drystack/brick.hpp"

namespace drystack {

// Parametric design families. All generators are deterministic for a fixed
// (class, params, seed) triple; `seed` only matters for the stochastic
// "tower" family. Unknown params are ignored; omitted ones take the defaults
// below. Common params: brick_length (0.2), brick_width (0.1),
// brick_height (0.06), density (1800).
//
//   basic      courses (4), bricks_per_course (5): running-bond wall
//   stretcher  courses (5), bricks_per_course (20): running-bond wall
//   flemish    courses (7), pairs_per_course (11): alternating stretcher and
//              header bricks, 2*pairs per course
//   arch       lanes (4), pier_courses (7), corbel_courses (5): two piers,
//              harmonically corbelled jambs, one keystone brick per lane;
//              count = lanes*(2*(pier_courses+corbel_courses)+1)
//   curve      radius (2), courses (13), bricks_per_course (25), closed (0):
//              circular wall; angular step solved so neighbors touch without
//              interpenetration; closed=1 derives the radius from the count
//   opening    courses (15), bricks_per_course (22), variant (0=window,
//              1=door, 2=vent) or explicit opening_width_bricks /
//              opening_courses / opening_base_course; removes the aperture
//              bricks from a stretcher wall
//   dome       radius (3): ring counts follow floor(2*pi*r_k/spacing) with
//              r_k = sqrt(R^2 - z_k^2); calibrated presets for radius 3/5/8;
//              explicit courses + spacing accepted for other radii
//   corner     courses (12), leg_bricks (26): two perpendicular walls with
//              alternating quoin interlock, 2*leg_bricks per course
//   hexagon    courses (8), bricks_per_course (13): hollow hexagonal ring,
//              bricks swept along the perimeter with course offsets
//   tower      bricks (5), max_offset (0.3, fraction of length), max_yaw
//              (0.3 rad): seeded random single stack, one brick per layer
//
// Errors: DomainError for an unknown class, ValidationError for params out of
// range.
Design generate_design(const std::string& class_label, const ParamMap& params, std::uint64_t seed);

// Closed-form brick count for the given class and params (same defaults).
std::size_t generated_brick_count(const std::string& class_label, const ParamMap& params);

}  // namespace drystack

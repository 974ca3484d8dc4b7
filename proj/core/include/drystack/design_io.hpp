#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "drystack/brick.hpp"

namespace drystack {

// File layout:
// {
//   "class": "stretcher",
//   "params": {"courses": 5, ...},
//   "bricks": [
//     {"id": 0, "position": [x,y,z], "rotation": [r00,...,r22],  // row-major
//      "dimensions": [dx,dy,dz], "mass": m}, ...
//   ]
// }
// Writing is canonical (sorted keys, fixed indentation, shortest round-trip
// number formatting) so identical designs produce identical bytes.

Design design_from_json(const nlohmann::json& j);
nlohmann::json design_to_json(const Design& design);

// Throws IoError on missing/unwritable paths, FormatError on malformed JSON,
// ValidationError on contract violations (also validated on save).
Design load_design(const std::string& path);
void save_design(const Design& design, const std::string& path);

// Shared helpers for other JSON writers in the library.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace drystack

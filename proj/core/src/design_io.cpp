#include "drystack/design_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "drystack/errors.hpp"

namespace drystack {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string(where) + ": missing key '" + key + "'");
  return *it;
}

Vec3 vec3_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(where) + ": expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(where) + ": expected numeric entries");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat3 mat3_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 9) throw FormatError(std::string(where) + ": expected an array of 9 numbers (row-major)");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const json& e = j[3 * r + c];
      if (!e.is_number()) throw FormatError(std::string(where) + ": expected numeric entries");
      m(r, c) = e.get<double>();
    }
  return m;
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat3_to(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

}  // namespace

Design design_from_json(const json& j) {
  Design d;
  d.class_label = require(j, "class", "design").get<std::string>();
  const json& params = require(j, "params", "design");
  if (!params.is_object()) throw FormatError("design: 'params' must be an object");
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (!it.value().is_number()) throw FormatError("design: param '" + it.key() + "' must be numeric");
    d.params[it.key()] = it.value().get<double>();
  }
  const json& bricks = require(j, "bricks", "design");
  if (!bricks.is_array()) throw FormatError("design: 'bricks' must be an array");
  d.bricks.reserve(bricks.size());
  for (std::size_t i = 0; i < bricks.size(); ++i) {
    const json& bj = bricks[i];
    std::ostringstream where;
    where << "bricks[" << i << "]";
    const std::string w = where.str();
    BrickSpec b;
    b.id = require(bj, "id", w.c_str()).get<int>();
    b.position = vec3_from(require(bj, "position", w.c_str()), w.c_str());
    b.rotation = mat3_from(require(bj, "rotation", w.c_str()), w.c_str());
    b.dimensions = vec3_from(require(bj, "dimensions", w.c_str()), w.c_str());
    const json& mass = require(bj, "mass", w.c_str());
    if (!mass.is_number()) throw FormatError(w + ": 'mass' must be numeric");
    b.mass = mass.get<double>();
    d.bricks.push_back(b);
  }
  validate_design(d);
  return d;
}

json design_to_json(const Design& design) {
  json j;
  j["class"] = design.class_label;
  j["params"] = json::object();
  for (const auto& [k, v] : design.params) j["params"][k] = v;
  j["bricks"] = json::array();
  for (const auto& b : design.bricks) {
    json bj;
    bj["id"] = b.id;
    bj["position"] = vec3_to(b.position);
    bj["rotation"] = mat3_to(b.rotation);
    bj["dimensions"] = vec3_to(b.dimensions);
    bj["mass"] = b.mass;
    j["bricks"].push_back(std::move(bj));
  }
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

Design load_design(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError("design file '" + path + "': " + e.what());
  }
  return design_from_json(j);
}

void save_design(const Design& design, const std::string& path) {
  validate_design(design);
  write_text_file(path, design_to_json(design).dump(2) + "\n");
}

}  // namespace drystack

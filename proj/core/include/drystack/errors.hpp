#pragma once

#include <stdexcept>
#include <string>

namespace drystack {

// Base class for all library errors so callers can catch one type at the CLI
// boundary and map it to a nonzero exit code.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (JSON syntax, missing keys, wrong types).
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

// Structurally valid input that violates a model contract (non-orthonormal
// rotation, non-positive dimensions, duplicate ids, shape mismatch).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Request outside the supported domain (unknown generator class, unknown
// planner method, unreachable IK target where an error was demanded).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// IK target outside the reachable workspace, or no convergent solution
// within the iteration cap.
class UnreachableError : public DomainError {
public:
  explicit UnreachableError(const std::string& what) : DomainError(what) {}
};

// IK converged onto a configuration at or below the manipulability floor.
class SingularityError : public DomainError {
public:
  explicit SingularityError(const std::string& what) : DomainError(what) {}
};

// A trajectory sample violated a velocity/acceleration limit or an obstacle
// clearance; the message names the sample index and the constraint.
class TrajectoryError : public Error {
public:
  explicit TrajectoryError(const std::string& what) : Error(what) {}
};

// I/O failure: missing file, unwritable output path.
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Geometric precondition violated (gross interpenetration, degenerate
// configuration an algorithm cannot process).
class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& what) : Error(what) {}
};

}  // namespace drystack

#pragma once

#include <stdexcept>
#include <string>

namespace finegrid {

enum class ErrorKind {
  InvalidGeometry,
  OccupiedConflict,
  Collision,
  DegenerateBody,
  UndefinedDirection,
  Parse,
  Validation,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace finegrid

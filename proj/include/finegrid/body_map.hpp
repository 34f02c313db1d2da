#pragma once

#include <array>
#include <string>
#include <vector>

#include "finegrid/geometry.hpp"

namespace finegrid {

/// Compass octants, counterclockwise from East. Values double as octant indices.
enum class Direction : uint8_t { East, NorthEast, North, NorthWest, West, SouthWest, South, SouthEast };

inline constexpr int kDirections = 8;

const char* to_string(Direction d);

/// Unit lattice step for a direction, e.g. NorthEast -> (1, 1).
CellCoord step_of(Direction d);

inline bool is_diagonal(Direction d) { return (static_cast<int>(d) & 1) != 0; }

/// Octant whose bisector is nearest to atan2(dy, dx); boundaries go to the
/// counterclockwise octant. Throws UndefinedDirection for the zero vector.
Direction orientation_from_direction(double dx, double dy);

struct BodyProfile {
  std::string label = "adult";
  double shoulder_width = 0.50;
  double body_depth = 0.30;
  double free_flow_speed = 1.34;

  /// Throws Validation unless shoulder_width >= body_depth > 0 and free_flow_speed > 0.
  void validate() const;
};

/// One row of a body map: cells (col_begin .. col_begin + len - 1) at row offset drow.
struct RowRun {
  int32_t drow = 0;
  int32_t dcol_begin = 0;
  int32_t len = 0;
};

struct BodyMap {
  Direction orientation = Direction::East;
  std::vector<CellCoord> offsets;  // sorted; always contains (0, 0)
  std::vector<RowRun> rows;        // same cells as `offsets`, one run per row

  std::size_t size() const { return offsets.size(); }
};

/// Cells whose centers lie strictly inside the body ellipse: shoulder width across
/// the heading, body depth along it. Throws DegenerateBody if cell_size > body_depth.
BodyMap rasterize_body(const BodyProfile& profile, Direction orientation, double cell_size);

/// {center + o : o in map.offsets}
std::vector<CellCoord> footprint_cells(const BodyMap& map, CellCoord center);

/// The eight orientation maps of one profile at one cell size, plus, for every
/// (current orientation, new orientation, step) the cells of the moved body that
/// the current body does not already cover. A move is collision-free iff those
/// cells are free, since cells a pedestrian owns never block it.
class BodyMapSet {
 public:
  static constexpr int kStay = kDirections;  // step index for "no translation"

  BodyMapSet(const BodyProfile& profile, double cell_size);

  const BodyProfile& profile() const { return profile_; }
  const BodyMap& map(Direction d) const { return maps_[static_cast<int>(d)]; }

  /// Offsets relative to the current center. `step` is a Direction index or kStay.
  const std::vector<CellCoord>& leading_cells(Direction current, Direction next, int step) const {
    return delta_[static_cast<int>(current)][static_cast<int>(next)][step];
  }

 private:
  BodyProfile profile_;
  std::array<BodyMap, kDirections> maps_;
  std::array<std::array<std::array<std::vector<CellCoord>, kDirections + 1>, kDirections>, kDirections> delta_;
};

}  // namespace finegrid

#include "finegrid/body_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "finegrid/error.hpp"

namespace finegrid {

const char* to_string(Direction d) {
  static constexpr const char* names[] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
  return names[static_cast<int>(d)];
}

CellCoord step_of(Direction d) {
  static constexpr CellCoord steps[] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  return steps[static_cast<int>(d)];
}

Direction orientation_from_direction(double dx, double dy) {
  if (dx == 0.0 && dy == 0.0) throw Error(ErrorKind::UndefinedDirection, "zero direction vector");
  const double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  double pos = (deg + 22.5) / 45.0;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) pos = nearest;
  const int octant = static_cast<int>(std::floor(pos));
  return static_cast<Direction>(((octant % kDirections) + kDirections) % kDirections);
}

void BodyProfile::validate() const {
  if (!(body_depth > 0.0) || !(shoulder_width >= body_depth) || !(free_flow_speed > 0.0)) {
    std::ostringstream os;
    os << "body profile '" << label << "' needs shoulder_width >= body_depth > 0 and free_flow_speed > 0";
    throw Error(ErrorKind::Validation, os.str());
  }
}

BodyMap rasterize_body(const BodyProfile& profile, Direction orientation, double cell_size) {
  profile.validate();
  if (!(cell_size > 0.0) || cell_size > profile.body_depth) {
    std::ostringstream os;
    os << "cell size " << cell_size << " exceeds body depth " << profile.body_depth << " of '" << profile.label << "'";
    throw Error(ErrorKind::DegenerateBody, os.str());
  }
  // semi-axes in cell units
  const double across_axis = 0.5 * profile.shoulder_width / cell_size;
  const double along_axis = 0.5 * profile.body_depth / cell_size;
  const CellCoord step = step_of(orientation);
  const double norm = is_diagonal(orientation) ? std::numbers::sqrt2 / 2.0 : 1.0;
  const double ux = step.col * norm;
  const double uy = step.row * norm;

  BodyMap map;
  map.orientation = orientation;
  const int32_t reach = static_cast<int32_t>(std::ceil(across_axis)) + 1;
  for (int32_t dr = -reach; dr <= reach; ++dr) {
    RowRun run{dr, 0, 0};
    for (int32_t dc = -reach; dc <= reach; ++dc) {
      const double along = dc * ux + dr * uy;
      const double across = dr * ux - dc * uy;
      const double q = (across / across_axis) * (across / across_axis) + (along / along_axis) * (along / along_axis);
      if (q < 1.0 - 1e-9) {
        map.offsets.push_back({dc, dr});
        if (run.len == 0) run.dcol_begin = dc;
        ++run.len;
      }
    }
    if (run.len > 0) map.rows.push_back(run);
  }
  std::sort(map.offsets.begin(), map.offsets.end());
  return map;
}

std::vector<CellCoord> footprint_cells(const BodyMap& map, CellCoord center) {
  std::vector<CellCoord> out;
  out.reserve(map.offsets.size());
  for (const CellCoord& o : map.offsets) out.push_back(center + o);
  return out;
}

BodyMapSet::BodyMapSet(const BodyProfile& profile, double cell_size) : profile_(profile) {
  for (int d = 0; d < kDirections; ++d) maps_[d] = rasterize_body(profile, static_cast<Direction>(d), cell_size);
  for (int cur = 0; cur < kDirections; ++cur) {
    const auto& held = maps_[cur].offsets;  // sorted
    for (int next = 0; next < kDirections; ++next) {
      for (int s = 0; s <= kDirections; ++s) {
        const CellCoord shift = s == kStay ? CellCoord{0, 0} : step_of(static_cast<Direction>(s));
        std::vector<CellCoord> moved;
        moved.reserve(maps_[next].offsets.size());
        for (const CellCoord& o : maps_[next].offsets) moved.push_back(o + shift);
        std::sort(moved.begin(), moved.end());
        auto& out = delta_[cur][next][s];
        std::set_difference(moved.begin(), moved.end(), held.begin(), held.end(), std::back_inserter(out));
      }
    }
  }
}

}  // namespace finegrid

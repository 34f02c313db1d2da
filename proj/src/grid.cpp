#include "finegrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finegrid/error.hpp"

namespace finegrid {

namespace {

int32_t round_cells(double length, double cell_size) {
  // nearest, ties up; the epsilon absorbs binary representation error (1.0/0.4 -> 2.5)
  return static_cast<int32_t>(std::floor(length / cell_size + 0.5 + 1e-9));
}

}  // namespace

Grid::Grid(double width, double height, double cell_size) {
  if (!(width > 0.0) || !(height > 0.0) || !(cell_size > 0.0)) {
    std::ostringstream os;
    os << "grid dimensions must be positive (width " << width << ", height " << height << ", cell_size "
       << cell_size << ")";
    throw Error(ErrorKind::InvalidGeometry, os.str());
  }
  width_ = std::max(1, round_cells(width, cell_size));
  height_ = std::max(1, round_cells(height, cell_size));
  cell_size_ = cell_size;
  cells_.assign(static_cast<std::size_t>(width_) * height_, kFree);
}

CellCoord Grid::cell_at(Point p) const {
  return {static_cast<int32_t>(std::floor(p.x / cell_size_)), static_cast<int32_t>(std::floor(p.y / cell_size_))};
}

CellState Grid::state(CellCoord c) const {
  const int32_t v = raw(c);
  if (v == kFree) return {CellKind::Free, std::nullopt};
  if (v == kObstacle) return {CellKind::Obstacle, std::nullopt};
  return {CellKind::Occupied, v};
}

std::vector<CellCoord> Grid::cells_in(const Rect& area) const {
  // center (c + 0.5) * s inside [min, max)  <=>  c >= min / s - 0.5 and c < max / s - 0.5
  // the window is widened by one cell so rounding never drops a boundary cell
  const auto lo = [&](double v) { return std::max(0, static_cast<int32_t>(std::ceil(v / cell_size_ - 0.5)) - 1); };
  const auto hi = [&](double v, int32_t limit) {
    return std::min(limit, static_cast<int32_t>(std::ceil(v / cell_size_ - 0.5)) + 1);
  };
  std::vector<CellCoord> out;
  const int32_t c0 = lo(area.x_min), c1 = hi(area.x_max, width_);
  const int32_t r0 = lo(area.y_min), r1 = hi(area.y_max, height_);
  for (int32_t r = r0; r < r1; ++r) {
    for (int32_t c = c0; c < c1; ++c) {
      if (area.contains(center_of({c, r}))) out.push_back({c, r});
    }
  }
  return out;
}

void Grid::mark_obstacle(const Rect& area) {
  const auto cells = cells_in(area);
  for (const CellCoord& c : cells) {
    const int32_t v = cells_[index(c)];
    if (v > 0) {
      std::ostringstream os;
      os << "obstacle overlaps cell (" << c.col << ", " << c.row << ") owned by pedestrian " << v;
      throw Error(ErrorKind::OccupiedConflict, os.str());
    }
  }
  for (const CellCoord& c : cells) cells_[index(c)] = kObstacle;
}

bool Grid::cells_free(std::span<const CellCoord> cells, PedId ignoring) const {
  return std::all_of(cells.begin(), cells.end(), [&](CellCoord c) {
    const int32_t v = raw(c);
    return v == kFree || (v > 0 && v == ignoring);
  });
}

void Grid::transfer_occupancy(PedId id, std::span<const CellCoord> old_cells, std::span<const CellCoord> new_cells) {
  if (!cells_free(new_cells, id)) {
    std::ostringstream os;
    os << "pedestrian " << id << " cannot claim target cells";
    throw Error(ErrorKind::Collision, os.str());
  }
  for (const CellCoord& c : old_cells) {
    if (in_bounds(c) && cells_[index(c)] == id) cells_[index(c)] = kFree;
  }
  for (const CellCoord& c : new_cells) cells_[index(c)] = id;
}

std::size_t Grid::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](int32_t v) { return v > 0; }));
}

}  // namespace finegrid

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "finegrid/geometry.hpp"

namespace finegrid {

using PedId = int32_t;  // strictly positive; 0 is reserved for "free"

enum class CellKind : uint8_t { Free, Obstacle, Occupied };

struct CellState {
  CellKind kind = CellKind::Free;
  std::optional<PedId> owner;

  friend bool operator==(const CellState&, const CellState&) = default;
};

/// Square-cell occupancy lattice. Cell (col, row) has its center at
/// ((col + 0.5) * cell_size, (row + 0.5) * cell_size). Coordinates outside the
/// lattice behave as permanent obstacles.
class Grid {
 public:
  static constexpr int32_t kFree = 0;
  static constexpr int32_t kObstacle = -1;

  /// Dimensions are rounded to the nearest whole cell, ties up.
  Grid(double width, double height, double cell_size);

  int32_t width_cells() const { return width_; }
  int32_t height_cells() const { return height_; }
  double cell_size() const { return cell_size_; }
  Rect bounds() const { return Rect{0.0, 0.0, width_ * cell_size_, height_ * cell_size_}; }

  bool in_bounds(CellCoord c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
  Point center_of(CellCoord c) const { return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_}; }
  /// Cell containing point p (may be out of bounds).
  CellCoord cell_at(Point p) const;

  CellState state(CellCoord c) const;
  /// Raw owner code: kFree, kObstacle, or a pedestrian id. Out of bounds reads as kObstacle.
  int32_t raw(CellCoord c) const { return in_bounds(c) ? cells_[index(c)] : kObstacle; }

  /// Contiguous owner codes for row `row`, columns [col_begin, col_begin + len). Must be in bounds.
  std::span<const int32_t> row_span(int32_t row, int32_t col_begin, int32_t len) const {
    return {cells_.data() + index({col_begin, row}), static_cast<size_t>(len)};
  }

  /// Cells whose centers lie in `area` (half-open on max edges), clipped to the lattice.
  std::vector<CellCoord> cells_in(const Rect& area) const;

  /// Marks every cell whose center is inside `area` as obstacle. Throws
  /// OccupiedConflict (grid unchanged) if any such cell is owned by a pedestrian.
  void mark_obstacle(const Rect& area);

  /// True iff every cell is free or owned by `ignoring`. Out of bounds is blocked.
  bool cells_free(std::span<const CellCoord> cells, PedId ignoring) const;

  /// Releases `old_cells` held by `id` and claims `new_cells`, all or nothing.
  /// Throws Collision with the grid untouched when new_cells are not free for `id`.
  void transfer_occupancy(PedId id, std::span<const CellCoord> old_cells, std::span<const CellCoord> new_cells);

  /// Number of cells owned by some pedestrian.
  std::size_t occupied_count() const;

  std::span<const int32_t> raw_cells() const { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(CellCoord c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

  int32_t width_ = 0;
  int32_t height_ = 0;
  double cell_size_ = 0.0;
  std::vector<int32_t> cells_;
};

}  // namespace finegrid

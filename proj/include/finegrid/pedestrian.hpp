#pragma once

#include <cstdint>
#include <vector>

#include "finegrid/body_map.hpp"
#include "finegrid/grid.hpp"
#include "finegrid/speed_control.hpp"

namespace finegrid {

struct Pedestrian {
  PedId id = 0;
  int profile = 0;  // index into the simulation's body map sets
  CellCoord center;
  Direction orientation = Direction::East;
  Rect target;      // region the pedestrian walks to
  double free_flow_speed = 1.34;
  int sector = 0;   // last heading sector, kept when the heading is undefined

  int64_t spawn_step = 0;
  DisplacementLedger ledger;

  // Per-step displacement over the trailing second, in units of cell steps:
  // 0 = stayed, 1 = direct move, 2 = diagonal move.
  std::vector<uint8_t> recent_moves;
  std::size_t recent_pos = 0;
};

}  // namespace finegrid

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace finegrid {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Integer lattice coordinate. Row grows with y (north).
struct CellCoord {
  int32_t col = 0;
  int32_t row = 0;

  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
  CellCoord operator+(const CellCoord& o) const { return {col + o.col, row + o.row}; }
};

/// Axis-aligned rectangle in meters. Membership is half-open on the max edges.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  /// Throws InvalidGeometry if min > max on either axis.
  static Rect make(double x_min, double y_min, double x_max, double y_max);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool contains(Point p) const { return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max; }

  /// Closest point of the closed rectangle to `p` (p itself when inside).
  Point nearest_point(Point p) const;

  double distance_to(Point p) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Rectangle of `length` along unit direction (ux, uy) and `width` across it, whose
/// near short edge is centered on `origin`.
struct OrientedRect {
  Point origin;
  double ux = 1.0;
  double uy = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// along in [0, length), across in [-width/2, width/2).
  bool contains(Point p) const;

  Rect bounding_box() const;

  /// Area of the intersection with an axis-aligned box.
  double clipped_area(const Rect& bounds) const;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace finegrid

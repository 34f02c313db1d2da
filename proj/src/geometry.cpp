#include "finegrid/geometry.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "finegrid/error.hpp"

namespace finegrid {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::OccupiedConflict: return "occupied-conflict";
    case ErrorKind::Collision: return "collision";
    case ErrorKind::DegenerateBody: return "degenerate-body";
    case ErrorKind::UndefinedDirection: return "undefined-direction";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

Rect Rect::make(double x_min, double y_min, double x_max, double y_max) {
  if (!(x_min <= x_max) || !(y_min <= y_max)) {
    std::ostringstream os;
    os << "rect has min > max: (" << x_min << ", " << y_min << ", " << x_max << ", " << y_max << ")";
    throw Error(ErrorKind::InvalidGeometry, os.str());
  }
  return Rect{x_min, y_min, x_max, y_max};
}

Point Rect::nearest_point(Point p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

double Rect::distance_to(Point p) const { return distance(p, nearest_point(p)); }

bool OrientedRect::contains(Point p) const {
  const double dx = p.x - origin.x;
  const double dy = p.y - origin.y;
  const double along = dx * ux + dy * uy;
  const double across = -dx * uy + dy * ux;
  const double half = 0.5 * width;
  return along >= 0.0 && along < length && across >= -half && across < half;
}

namespace {

std::array<Point, 4> corners(const OrientedRect& r) {
  const double half = 0.5 * r.width;
  const Point side{-r.uy * half, r.ux * half};
  const Point far{r.origin.x + r.ux * r.length, r.origin.y + r.uy * r.length};
  return {Point{r.origin.x - side.x, r.origin.y - side.y}, Point{far.x - side.x, far.y - side.y},
          Point{far.x + side.x, far.y + side.y}, Point{r.origin.x + side.x, r.origin.y + side.y}};
}

// Convex polygon; clipping a quad against four half planes never exceeds 8 vertices.
struct Poly {
  std::array<Point, 12> v;
  size_t n = 0;
  void push(Point p) { v[n++] = p; }
};

// Sutherland-Hodgman against one axis-aligned half plane.
template <typename Inside, typename Cross>
Poly clip(const Poly& poly, Inside inside, Cross cross) {
  Poly out;
  for (size_t i = 0; i < poly.n; ++i) {
    const Point& cur = poly.v[i];
    const Point& prev = poly.v[(i + poly.n - 1) % poly.n];
    const bool in_cur = inside(cur);
    const bool in_prev = inside(prev);
    if (in_cur) {
      if (!in_prev) out.push(cross(prev, cur));
      out.push(cur);
    } else if (in_prev) {
      out.push(cross(prev, cur));
    }
  }
  return out;
}

Point cross_x(Point a, Point b, double x) {
  const double t = (x - a.x) / (b.x - a.x);
  return {x, a.y + t * (b.y - a.y)};
}

Point cross_y(Point a, Point b, double y) {
  const double t = (y - a.y) / (b.y - a.y);
  return {a.x + t * (b.x - a.x), y};
}

}  // namespace

Rect OrientedRect::bounding_box() const {
  const auto c = corners(*this);
  Rect box{c[0].x, c[0].y, c[0].x, c[0].y};
  for (const Point& p : c) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

double OrientedRect::clipped_area(const Rect& b) const {
  const auto c = corners(*this);
  const Rect box = bounding_box();
  if (box.x_min >= b.x_min && box.x_max <= b.x_max && box.y_min >= b.y_min && box.y_max <= b.y_max) {
    return length * width;
  }
  Poly poly;
  for (const Point& p : c) poly.push(p);
  poly = clip(poly, [&](Point p) { return p.x >= b.x_min; }, [&](Point p, Point q) { return cross_x(p, q, b.x_min); });
  poly = clip(poly, [&](Point p) { return p.x <= b.x_max; }, [&](Point p, Point q) { return cross_x(p, q, b.x_max); });
  poly = clip(poly, [&](Point p) { return p.y >= b.y_min; }, [&](Point p, Point q) { return cross_y(p, q, b.y_min); });
  poly = clip(poly, [&](Point p) { return p.y <= b.y_max; }, [&](Point p, Point q) { return cross_y(p, q, b.y_max); });
  double twice = 0.0;
  for (size_t i = 0; i < poly.n; ++i) {
    const Point& p = poly.v[i];
    const Point& q = poly.v[(i + 1) % poly.n];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(twice);
}

}  // namespace finegrid

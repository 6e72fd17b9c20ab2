#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cellhom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double length(Vec2 a);

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

/// Ellipse with semi-axes (a along the rotated x axis, b along the rotated y axis).
struct Ellipse {
  Vec2 center;
  double semi_a = 0.0;
  double semi_b = 0.0;
  double angle = 0.0;  // radians, counterclockwise
};

/// Simple polygon, vertices counterclockwise.
struct Polygon {
  std::vector<Vec2> vertices;
};

struct Annulus {
  Vec2 center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
};

using Hole = std::variant<Circle, Ellipse, Polygon>;
using RegionShape = std::variant<Circle, Ellipse, Polygon, Annulus>;

/// A material phase occupying `shape` (minus holes); `tag` keys per-region moduli.
struct Region {
  std::string tag;
  RegionShape shape;
};

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

/// Strict interior test: points on the boundary are not inside.
bool inside(const Hole& hole, Vec2 p);
bool inside(const RegionShape& shape, Vec2 p);
double area(const Hole& hole);
BoundingBox bounds(const Hole& hole);
/// Counterclockwise boundary polygon; circles and ellipses use `segments` vertices,
/// polygons return their own vertices.
std::vector<Vec2> boundary_polygon(const Hole& hole, int segments);
double polygon_signed_area(const std::vector<Vec2>& vertices);
bool point_in_polygon(const std::vector<Vec2>& vertices, Vec2 p);
/// Distance from p to the closed polyline and the closest point on it,
/// parameterized as segment index + fraction in [0, size).
struct PolylineProjection {
  double distance = 0.0;
  Vec2 point;
  double param = 0.0;
};
PolylineProjection project_to_polygon(const std::vector<Vec2>& vertices, Vec2 p);

/// Rectangular periodicity cell (0, l1) x (0, l2) with holes and material phases.
struct CellGeometry {
  double l1 = 1.0;
  double l2 = 1.0;
  std::vector<Hole> holes;
  std::vector<Region> regions;
  /// Minimum hole distance to the cell edges; defaults to l2 / 64.
  std::optional<double> clearance;

  double cell_area() const { return l1 * l2; }
  double min_clearance() const { return clearance.value_or(l2 / 64.0); }
  /// Index of the first region containing p, or -1 for the base phase.
  int region_at(Vec2 p) const;
};

/// The 2 x 1 cell with a centered hole of radius 1/4.
CellGeometry paper_cell();
/// l x l cell with a centered circular hole (no hole when radius <= 0).
CellGeometry square_cell(double side, double radius);

/// True iff p (in the closed cell) lies outside every hole; hole boundaries count as material.
bool contains_material(const CellGeometry& g, Vec2 p);

/// l1 l2 minus the hole areas; throws ValidationError when holes overlap.
double material_area(const CellGeometry& g);

struct GeometryReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Clearance, shape validity, hole disjointness, and connectivity of the material
/// and of its periodic extension (pixel flood fill, `pixel_n` pixels across l2).
GeometryReport validate(const CellGeometry& g, int pixel_n = 256);

enum class LineDirection { along_x1 = 1, along_x2 = 2 };

/// Straight periodic line: x2 = coordinate (along_x1) or x1 = coordinate (along_x2).
struct Line {
  LineDirection direction = LineDirection::along_x1;
  double coordinate = 0.0;
};

/// A coordinate whose full periodic line keeps distance >= clearance from every hole.
/// Chooses the midpoint of the widest admissible gap. Throws ValidationError when no
/// straight line exists.
double clear_line(const CellGeometry& g, LineDirection direction);
double clear_line(const CellGeometry& g, LineDirection direction, double clearance);

/// Distance from the line to the nearest hole (infinite when there are none).
double line_hole_distance(const CellGeometry& g, const Line& line);

}  // namespace cellhom

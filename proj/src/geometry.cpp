#include "cellhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "cellhom/errors.hpp"

namespace cellhom {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double segment_distance(Vec2 a, Vec2 b, Vec2 p, double* t_out = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  if (t_out) *t_out = t;
  return length(p - (a + t * ab));
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool polygon_is_simple(const std::vector<Vec2>& v) {
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (j == i + 1 || (i == 0 && j == m - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m])) return false;
    }
  }
  return true;
}

bool polygons_overlap(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return point_in_polygon(a, b.front()) || point_in_polygon(b, a.front());
}

std::string describe(const Hole& hole, std::size_t index) {
  std::ostringstream os;
  os << "hole " << index << " ("
     << std::visit(overloaded{[](const Circle&) { return "circle"; },
                              [](const Ellipse&) { return "ellipse"; },
                              [](const Polygon&) { return "polygon"; }},
                   hole)
     << ")";
  return os.str();
}

std::vector<std::string> shape_violations(const Hole& hole, std::size_t index) {
  std::vector<std::string> out;
  const std::string name = describe(hole, index);
  std::visit(overloaded{
                 [&](const Circle& c) {
                   if (!(c.radius > 0.0)) out.push_back(name + ": radius must be positive");
                 },
                 [&](const Ellipse& e) {
                   if (!(e.semi_a > 0.0 && e.semi_b > 0.0)) {
                     out.push_back(name + ": semi-axes must be positive");
                   }
                 },
                 [&](const Polygon& p) {
                   if (p.vertices.size() < 3) {
                     out.push_back(name + ": needs at least 3 vertices");
                   } else if (!(polygon_signed_area(p.vertices) > 0.0)) {
                     out.push_back(name + ": vertices must be counterclockwise with positive area");
                   } else if (!polygon_is_simple(p.vertices)) {
                     out.push_back(name + ": polygon is not simple");
                   }
                 }},
             hole);
  return out;
}

bool holes_overlap(const Hole& a, const Hole& b) {
  if (const auto* ca = std::get_if<Circle>(&a)) {
    if (const auto* cb = std::get_if<Circle>(&b)) {
      return length(ca->center - cb->center) <= ca->radius + cb->radius;
    }
  }
  return polygons_overlap(boundary_polygon(a, 1024), boundary_polygon(b, 1024));
}

}  // namespace

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double length(Vec2 a) { return std::hypot(a.x, a.y); }

double polygon_signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

bool point_in_polygon(const std::vector<Vec2>& v, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

PolylineProjection project_to_polygon(const std::vector<Vec2>& v, Vec2 p) {
  PolylineProjection best{std::numeric_limits<double>::infinity(), {}, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    double t = 0.0;
    const double d = segment_distance(a, b, p, &t);
    if (d < best.distance) {
      best.distance = d;
      best.point = a + t * (b - a);
      best.param = static_cast<double>(i) + t;
    }
  }
  if (best.param >= static_cast<double>(v.size())) best.param -= static_cast<double>(v.size());
  return best;
}

bool inside(const Hole& hole, Vec2 p) {
  return std::visit(
      overloaded{[&](const Circle& c) { return length(p - c.center) < c.radius; },
                 [&](const Ellipse& e) {
                   const Vec2 q = rotate(p - e.center, -e.angle);
                   return (q.x * q.x) / (e.semi_a * e.semi_a) + (q.y * q.y) / (e.semi_b * e.semi_b) <
                          1.0;
                 },
                 [&](const Polygon& poly) {
                   if (!point_in_polygon(poly.vertices, p)) return false;
                   const BoundingBox bb = bounds(hole);
                   const double scale = std::max(bb.hi.x - bb.lo.x, bb.hi.y - bb.lo.y);
                   return project_to_polygon(poly.vertices, p).distance > 1e-14 * scale;
                 }},
      hole);
}

bool inside(const RegionShape& shape, Vec2 p) {
  return std::visit(overloaded{[&](const Annulus& a) {
                                 const double r = length(p - a.center);
                                 return r > a.inner_radius && r < a.outer_radius;
                               },
                               [&](const auto& s) { return inside(Hole{s}, p); }},
                    shape);
}

double area(const Hole& hole) {
  return std::visit(overloaded{[](const Circle& c) { return std::numbers::pi * c.radius * c.radius; },
                               [](const Ellipse& e) { return std::numbers::pi * e.semi_a * e.semi_b; },
                               [](const Polygon& p) { return polygon_signed_area(p.vertices); }},
                    hole);
}

BoundingBox bounds(const Hole& hole) {
  return std::visit(
      overloaded{[](const Circle& c) {
                   return BoundingBox{c.center - Vec2{c.radius, c.radius},
                                      c.center + Vec2{c.radius, c.radius}};
                 },
                 [](const Ellipse& e) {
                   const double c = std::cos(e.angle);
                   const double s = std::sin(e.angle);
                   const double hx = std::sqrt(e.semi_a * e.semi_a * c * c + e.semi_b * e.semi_b * s * s);
                   const double hy = std::sqrt(e.semi_a * e.semi_a * s * s + e.semi_b * e.semi_b * c * c);
                   return BoundingBox{e.center - Vec2{hx, hy}, e.center + Vec2{hx, hy}};
                 },
                 [](const Polygon& p) {
                   BoundingBox bb{p.vertices.front(), p.vertices.front()};
                   for (Vec2 v : p.vertices) {
                     bb.lo = {std::min(bb.lo.x, v.x), std::min(bb.lo.y, v.y)};
                     bb.hi = {std::max(bb.hi.x, v.x), std::max(bb.hi.y, v.y)};
                   }
                   return bb;
                 }},
      hole);
}

std::vector<Vec2> boundary_polygon(const Hole& hole, int segments) {
  return std::visit(
      overloaded{[&](const Circle& c) {
                   std::vector<Vec2> v(static_cast<std::size_t>(segments));
                   for (int k = 0; k < segments; ++k) {
                     const double t = 2.0 * std::numbers::pi * k / segments;
                     v[static_cast<std::size_t>(k)] =
                         c.center + Vec2{c.radius * std::cos(t), c.radius * std::sin(t)};
                   }
                   return v;
                 },
                 [&](const Ellipse& e) {
                   std::vector<Vec2> v(static_cast<std::size_t>(segments));
                   for (int k = 0; k < segments; ++k) {
                     const double t = 2.0 * std::numbers::pi * k / segments;
                     v[static_cast<std::size_t>(k)] =
                         e.center + rotate({e.semi_a * std::cos(t), e.semi_b * std::sin(t)}, e.angle);
                   }
                   return v;
                 },
                 [](const Polygon& p) { return p.vertices; }},
      hole);
}

int CellGeometry::region_at(Vec2 p) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (inside(regions[i].shape, p)) return static_cast<int>(i);
  }
  return -1;
}

CellGeometry paper_cell() {
  CellGeometry g;
  g.l1 = 2.0;
  g.l2 = 1.0;
  g.holes.push_back(Circle{{1.0, 0.5}, 0.25});
  return g;
}

CellGeometry square_cell(double side, double radius) {
  CellGeometry g;
  g.l1 = side;
  g.l2 = side;
  if (radius > 0.0) g.holes.push_back(Circle{{0.5 * side, 0.5 * side}, radius});
  return g;
}

bool contains_material(const CellGeometry& g, Vec2 p) {
  return std::none_of(g.holes.begin(), g.holes.end(), [&](const Hole& h) { return inside(h, p); });
}

double material_area(const CellGeometry& g) {
  double a = g.cell_area();
  for (std::size_t i = 0; i < g.holes.size(); ++i) {
    for (std::size_t j = i + 1; j < g.holes.size(); ++j) {
      if (holes_overlap(g.holes[i], g.holes[j])) {
        throw ValidationError("holes " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
    a -= area(g.holes[i]);
  }
  return a;
}

GeometryReport validate(const CellGeometry& g, int pixel_n) {
  GeometryReport report;
  auto& out = report.violations;
  if (!(g.l1 > 0.0 && g.l2 > 0.0)) {
    out.push_back("cell side lengths must be positive");
    return report;
  }
  const double clr = g.min_clearance();
  bool shapes_ok = true;
  for (std::size_t i = 0; i < g.holes.size(); ++i) {
    auto v = shape_violations(g.holes[i], i);
    if (!v.empty()) {
      shapes_ok = false;
      out.insert(out.end(), v.begin(), v.end());
      continue;
    }
    const BoundingBox bb = bounds(g.holes[i]);
    const double gap = std::min({bb.lo.x, bb.lo.y, g.l1 - bb.hi.x, g.l2 - bb.hi.y});
    if (gap < clr) {
      std::ostringstream os;
      os << describe(g.holes[i], i) << ": clearance to the cell boundary is " << gap
         << ", minimum " << clr;
      out.push_back(os.str());
    }
  }
  if (shapes_ok) {
    for (std::size_t i = 0; i < g.holes.size(); ++i) {
      for (std::size_t j = i + 1; j < g.holes.size(); ++j) {
        if (holes_overlap(g.holes[i], g.holes[j])) {
          out.push_back("holes " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
        }
      }
    }
  }
  for (const Region& r : g.regions) {
    if (const auto* a = std::get_if<Annulus>(&r.shape)) {
      if (!(a->inner_radius >= 0.0 && a->outer_radius > a->inner_radius)) {
        out.push_back("region '" + r.tag + "': annulus radii must satisfy 0 <= inner < outer");
      }
    }
  }
  if (!shapes_ok) return report;

  // Pixel connectivity, 4-neighbour flood fill.
  const int ny = std::max(1, pixel_n);
  const int nx = std::max(1, static_cast<int>(std::lround(pixel_n * g.l1 / g.l2)));
  std::vector<char> material(static_cast<std::size_t>(nx * ny));
  auto idx = [nx](int i, int j) { return static_cast<std::size_t>(j * nx + i); };
  int material_count = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 p{(i + 0.5) * g.l1 / nx, (j + 0.5) * g.l2 / ny};
      material[idx(i, j)] = contains_material(g, p) ? 1 : 0;
      material_count += material[idx(i, j)];
    }
  }
  if (material_count == 0) {
    out.push_back("cell contains no material");
    return report;
  }
  std::vector<int> label(material.size(), -1);
  int components = 0;
  for (int j0 = 0; j0 < ny; ++j0) {
    for (int i0 = 0; i0 < nx; ++i0) {
      if (!material[idx(i0, j0)] || label[idx(i0, j0)] >= 0) continue;
      std::queue<std::pair<int, int>> q;
      q.emplace(i0, j0);
      label[idx(i0, j0)] = components;
      while (!q.empty()) {
        auto [i, j] = q.front();
        q.pop();
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int a = i + di[k];
          const int b = j + dj[k];
          if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
          if (material[idx(a, b)] && label[idx(a, b)] < 0) {
            label[idx(a, b)] = components;
            q.emplace(a, b);
          }
        }
      }
      ++components;
    }
  }
  if (components > 1) {
    out.push_back("material region is disconnected (" + std::to_string(components) +
                  " components at pixel resolution)");
  }
  bool joins_x = false;
  for (int j = 0; j < ny && !joins_x; ++j) joins_x = material[idx(0, j)] && material[idx(nx - 1, j)];
  bool joins_y = false;
  for (int i = 0; i < nx && !joins_y; ++i) joins_y = material[idx(i, 0)] && material[idx(i, ny - 1)];
  if (!joins_x) out.push_back("periodic extension is disconnected across the x1 period");
  if (!joins_y) out.push_back("periodic extension is disconnected across the x2 period");
  return report;
}

double clear_line(const CellGeometry& g, LineDirection direction) {
  return clear_line(g, direction, g.min_clearance());
}

double clear_line(const CellGeometry& g, LineDirection direction, double clearance) {
  const bool horizontal = direction == LineDirection::along_x1;
  const double extent = horizontal ? g.l2 : g.l1;
  std::vector<std::pair<double, double>> blocked;
  for (const Hole& h : g.holes) {
    const BoundingBox bb = bounds(h);
    const double lo = (horizontal ? bb.lo.y : bb.lo.x) - clearance;
    const double hi = (horizontal ? bb.hi.y : bb.hi.x) + clearance;
    blocked.emplace_back(lo, hi);
  }
  std::sort(blocked.begin(), blocked.end());
  double best_width = 0.0;
  double best_mid = 0.0;
  double cursor = 0.0;
  auto consider = [&](double a, double b) {
    if (b - a > best_width) {
      best_width = b - a;
      best_mid = 0.5 * (a + b);
    }
  };
  for (const auto& [lo, hi] : blocked) {
    if (lo > cursor) consider(cursor, std::min(lo, extent));
    cursor = std::max(cursor, hi);
  }
  if (cursor < extent) consider(cursor, extent);
  if (!(best_width > 0.0)) {
    throw ValidationError(std::string("no straight line along ") + (horizontal ? "x1" : "x2") +
                          " keeps the required clearance from all holes; supply a polyline path");
  }
  return best_mid;
}

double line_hole_distance(const CellGeometry& g, const Line& line) {
  double d = std::numeric_limits<double>::infinity();
  const bool horizontal = line.direction == LineDirection::along_x1;
  for (const Hole& h : g.holes) {
    const BoundingBox bb = bounds(h);
    const double lo = horizontal ? bb.lo.y : bb.lo.x;
    const double hi = horizontal ? bb.hi.y : bb.hi.x;
    const double c = line.coordinate;
    d = std::min(d, c < lo ? lo - c : (c > hi ? c - hi : 0.0));
  }
  return d;
}

}  // namespace cellhom

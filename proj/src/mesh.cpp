#include "cellhom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "cellhom/errors.hpp"

namespace cellhom {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1 / sqrt(3)
constexpr double kAreaFloor = 1e-4;                  // in units of h^2
constexpr double kFlatTangent = 0.07;                // about 4 degrees

struct NodeState {
  int state = 1;  // +1 material, 0 on a hole boundary, -1 inside a hole
  int hole = -1;
  double param = 0.0;
};

struct RingPoint {
  int node;
  int hole;
  double param;
  bool exit = false;
  bool entry = false;
};

double signed_area(const std::vector<Vec2>& p) { return polygon_signed_area(p); }

double triangle_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

class Builder {
 public:
  Builder(const CellGeometry& g, int n, const MeshOptions& opt) : g_(g), n_(n), opt_(opt) {}

  Mesh run();

 private:
  int grid_id(int i, int j) const { return j * (m_.nx + 1) + i; }
  int add_node(Vec2 p, NodeState s) {
    m_.nodes.push_back(p);
    state_.push_back(s);
    return static_cast<int>(m_.nodes.size()) - 1;
  }
  void classify_grid();
  int crossing(int a, int b);
  void mesh_cell(int i, int j);
  bool try_q4(const std::array<int, 4>& c, int cell);
  void add_triangle(int a, int b, int c, int cell);
  void fan_or_clip(const std::vector<int>& ring, int cell);
  std::vector<int> arc_nodes(const RingPoint& a, const RingPoint& b, const std::array<Vec2, 4>& quad);
  void finalize();

  const CellGeometry& g_;
  int n_;
  MeshOptions opt_;
  Mesh m_;
  std::vector<std::vector<Vec2>> curves_;
  std::vector<NodeState> state_;
  std::map<std::pair<int, int>, int> crossings_;
  std::set<int> hole_nodes_;
};

Mesh Builder::run() {
  if (n_ < 8) throw MeshError("mesh resolution n must be at least 8, got " + std::to_string(n_));
  const GeometryReport report = validate(g_);
  if (!report.ok()) {
    std::string msg = "invalid geometry:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw ValidationError(msg);
  }
  const double ratio = n_ * g_.l1 / g_.l2;
  const long nx = std::lround(ratio);
  if (nx < 1 || std::abs(ratio - static_cast<double>(nx)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "n * l1 / l2 = " << ratio
       << " is not an integer; choose n so that it is, or rescale the cell so l1/l2 is a ratio of "
          "small integers";
    throw MeshError(os.str());
  }
  m_.l1 = g_.l1;
  m_.l2 = g_.l2;
  m_.nx = static_cast<int>(nx);
  m_.ny = n_;
  m_.h = g_.l2 / n_;
  for (const Region& r : g_.regions) m_.region_tags.push_back(r.tag);
  const int segments = opt_.hole_segments > 0 ? opt_.hole_segments : 4 * n_;
  for (const Hole& hole : g_.holes) curves_.push_back(boundary_polygon(hole, segments));

  classify_grid();
  m_.cell_elements.assign(static_cast<std::size_t>(m_.nx * m_.ny), {});
  for (int j = 0; j < m_.ny; ++j) {
    for (int i = 0; i < m_.nx; ++i) mesh_cell(i, j);
  }
  finalize();
  return std::move(m_);
}

void Builder::classify_grid() {
  const double snap = opt_.snap_factor * m_.h;
  std::vector<int> resolved(curves_.size(), 0);
  for (int j = 0; j <= m_.ny; ++j) {
    for (int i = 0; i <= m_.nx; ++i) {
      const Vec2 p{i * m_.l1 / m_.nx, j * m_.l2 / m_.ny};
      const bool boundary = i == 0 || j == 0 || i == m_.nx || j == m_.ny;
      NodeState s;
      Vec2 pos = p;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < curves_.size(); ++k) {
        const PolylineProjection proj = project_to_polygon(curves_[k], p);
        if (!boundary && proj.distance < snap && proj.distance < best) {
          best = proj.distance;
          s = {0, static_cast<int>(k), proj.param};
          pos = proj.point;
        }
      }
      if (s.state == 1) {
        for (std::size_t k = 0; k < curves_.size(); ++k) {
          if (point_in_polygon(curves_[k], p)) {
            s = {-1, static_cast<int>(k), 0.0};
            break;
          }
        }
      }
      if (s.hole >= 0) resolved[static_cast<std::size_t>(s.hole)] = 1;
      const int id = add_node(pos, s);
      if (s.state == 0) hole_nodes_.insert(id);
    }
  }
  for (std::size_t k = 0; k < resolved.size(); ++k) {
    if (!resolved[k]) {
      throw MeshError("hole " + std::to_string(k) + " is smaller than the mesh spacing; increase n");
    }
  }
}

int Builder::crossing(int a, int b) {
  const std::pair<int, int> key = std::minmax(a, b);
  if (auto it = crossings_.find(key); it != crossings_.end()) return it->second;
  // a is the material end, b the hole end
  if (state_[static_cast<std::size_t>(a)].state < 0) std::swap(a, b);
  const int hole = state_[static_cast<std::size_t>(b)].hole;
  const auto& curve = curves_[static_cast<std::size_t>(hole)];
  const Vec2 pa = m_.nodes[static_cast<std::size_t>(a)];
  const Vec2 pb = m_.nodes[static_cast<std::size_t>(b)];
  const Vec2 d = pb - pa;
  double best_t = std::numeric_limits<double>::infinity();
  double best_param = 0.0;
  const std::size_t mseg = curve.size();
  for (std::size_t s = 0; s < mseg; ++s) {
    const Vec2 q0 = curve[s];
    const Vec2 e = curve[(s + 1) % mseg] - q0;
    const double den = cross(d, e);
    if (den == 0.0) continue;
    const double t = cross(q0 - pa, e) / den;
    const double u = cross(q0 - pa, d) / den;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0 && t < best_t) {
      best_t = t;
      best_param = static_cast<double>(s) + u;
    }
  }
  if (!std::isfinite(best_t)) {
    throw MeshError("failed to intersect a grid edge with the boundary of hole " +
                    std::to_string(hole));
  }
  if (best_param >= static_cast<double>(mseg)) best_param -= static_cast<double>(mseg);
  const int id = add_node(pa + best_t * d, {0, hole, best_param});
  hole_nodes_.insert(id);
  crossings_.emplace(key, id);
  return id;
}

std::vector<int> Builder::arc_nodes(const RingPoint& a, const RingPoint& b,
                                    const std::array<Vec2, 4>& quad) {
  std::vector<int> out;
  const auto& curve = curves_[static_cast<std::size_t>(a.hole)];
  const int mseg = static_cast<int>(curve.size());
  const double pa = a.param;
  double pb = b.param;
  if (pb >= pa) pb -= mseg;
  constexpr double eps = 1e-9;
  std::vector<Vec2> verts;
  for (int k = static_cast<int>(std::ceil(pa - eps)) - 1; k > pb + eps; --k) {
    verts.push_back(curve[static_cast<std::size_t>(((k % mseg) + mseg) % mseg)]);
  }
  const Vec2 xa = m_.nodes[static_cast<std::size_t>(a.node)];
  const Vec2 xb = m_.nodes[static_cast<std::size_t>(b.node)];
  double len = 0.0;
  Vec2 prev = xa;
  for (Vec2 v : verts) {
    len += length(v - prev);
    prev = v;
  }
  len += length(xb - prev);
  const double h = m_.h;
  if (len > 3.0 * h) return out;

  auto strictly_inside_quad = [&](Vec2 p) {
    for (int k = 0; k < 4; ++k) {
      const Vec2 e = quad[static_cast<std::size_t>((k + 1) % 4)] - quad[static_cast<std::size_t>(k)];
      if (cross(e, p - quad[static_cast<std::size_t>(k)]) / length(e) < 0.02 * h) return false;
    }
    return true;
  };
  Vec2 last = xa;
  for (Vec2 v : verts) {
    if (!strictly_inside_quad(v)) continue;
    if (length(v - xa) < 0.35 * h || length(v - xb) < 0.35 * h || length(v - last) < 0.35 * h) {
      continue;
    }
    // Nearly collinear vertices only produce slivers.
    const double offset = std::abs(cross(xb - last, v - last)) / length(xb - last);
    if (offset < kFlatTangent * std::min(length(v - last), length(xb - v))) continue;
    const int id = add_node(v, {0, a.hole, 0.0});
    hole_nodes_.insert(id);
    out.push_back(id);
    last = v;
  }
  return out;
}

bool Builder::try_q4(const std::array<int, 4>& c, int cell) {
  Element el;
  el.type = ElementType::q4;
  el.nodes = c;
  m_.elements.push_back(el);
  const int e = static_cast<int>(m_.elements.size()) - 1;
  const double floor = 1e-3 * m_.h * m_.h;
  for (double r : {-kGauss, kGauss}) {
    for (double s : {-kGauss, kGauss}) {
      if (jacobian_determinant(m_, e, r, s) <= floor) {
        m_.elements.pop_back();
        return false;
      }
    }
  }
  m_.elements.back().region = g_.region_at(m_.centroid(e));
  m_.cell_elements[static_cast<std::size_t>(cell)].push_back(e);
  return true;
}

void Builder::add_triangle(int a, int b, int c, int cell) {
  Element el;
  el.type = ElementType::t3;
  el.nodes = {a, b, c, -1};
  m_.elements.push_back(el);
  const int e = static_cast<int>(m_.elements.size()) - 1;
  m_.elements.back().region = g_.region_at(m_.centroid(e));
  m_.cell_elements[static_cast<std::size_t>(cell)].push_back(e);
}

void Builder::fan_or_clip(const std::vector<int>& ring, int cell) {
  const double floor = kAreaFloor * m_.h * m_.h;
  std::vector<Vec2> pts;
  for (int id : ring) pts.push_back(m_.nodes[static_cast<std::size_t>(id)]);
  if (ring.size() == 3) {
    if (triangle_area(pts[0], pts[1], pts[2]) > floor) add_triangle(ring[0], ring[1], ring[2], cell);
    return;
  }
  const std::size_t nv = pts.size();
  auto tri_min_angle = [](Vec2 p, Vec2 q, Vec2 r) {
    auto ang = [](Vec2 o, Vec2 u, Vec2 v) {
      return std::acos(std::clamp(dot(u - o, v - o) / (length(u - o) * length(v - o)), -1.0, 1.0));
    };
    return std::min({ang(p, q, r), ang(q, r, p), ang(r, p, q)});
  };
  constexpr double invalid = -1.0;

  // Area centroid keeps the triangulation mirror symmetric when the cell is.
  const double a = signed_area(pts);
  Vec2 c{0.0, 0.0};
  for (std::size_t k = 0; k < nv; ++k) {
    const Vec2 p = pts[k];
    const Vec2 q = pts[(k + 1) % nv];
    c += (cross(p, q) / (6.0 * a)) * (p + q);
  }
  double centroid_quality = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nv; ++k) {
    const Vec2 p = pts[k];
    const Vec2 q = pts[(k + 1) % nv];
    if (triangle_area(c, p, q) <= floor) {
      centroid_quality = invalid;
      break;
    }
    centroid_quality = std::min(centroid_quality, tri_min_angle(c, p, q));
  }

  // Fans from a polygon vertex. A unique best fan is mirrored in the mirror cell;
  // tied candidates are mirror pairs and fall back to the centroid fan.
  std::vector<double> vertex_quality(nv, invalid);
  for (std::size_t v = 0; v < nv; ++v) {
    double qv = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < nv; ++k) {
      const Vec2 p = pts[v];
      const Vec2 q = pts[(v + k) % nv];
      const Vec2 r = pts[(v + k + 1) % nv];
      if (triangle_area(p, q, r) <= floor) {
        qv = invalid;
        break;
      }
      qv = std::min(qv, tri_min_angle(p, q, r));
    }
    vertex_quality[v] = qv;
  }
  const auto best_it = std::max_element(vertex_quality.begin(), vertex_quality.end());
  const double best_vertex = *best_it;
  auto diagonals = [nv](std::size_t v) {
    std::set<std::pair<std::size_t, std::size_t>> d;
    for (std::size_t k = 2; k + 1 < nv; ++k) d.insert(std::minmax(v, (v + k) % nv));
    return d;
  };
  std::set<std::set<std::pair<std::size_t, std::size_t>>> distinct_best;
  for (std::size_t v = 0; v < nv; ++v) {
    if (vertex_quality[v] > best_vertex - 1e-9) distinct_best.insert(diagonals(v));
  }
  if (best_vertex > invalid && distinct_best.size() == 1 && best_vertex > centroid_quality + 1e-9) {
    const std::size_t v = static_cast<std::size_t>(best_it - vertex_quality.begin());
    for (std::size_t k = 1; k + 1 < nv; ++k) {
      add_triangle(ring[v], ring[(v + k) % nv], ring[(v + k + 1) % nv], cell);
    }
    return;
  }
  if (centroid_quality > invalid) {
    const int center = add_node(c, {1, -1, 0.0});
    for (std::size_t k = 0; k < nv; ++k) add_triangle(center, ring[k], ring[(k + 1) % nv], cell);
    return;
  }

  // Ear clipping, always cutting the ear with the best minimum angle.
  std::vector<int> idx(ring.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
  while (idx.size() > 3) {
    int best = -1;
    double best_angle = -1.0;
    const std::size_t sz = idx.size();
    for (std::size_t k = 0; k < sz; ++k) {
      const Vec2 p = pts[static_cast<std::size_t>(idx[(k + sz - 1) % sz])];
      const Vec2 q = pts[static_cast<std::size_t>(idx[k])];
      const Vec2 r = pts[static_cast<std::size_t>(idx[(k + 1) % sz])];
      if (triangle_area(p, q, r) <= floor) continue;
      bool empty = true;
      for (std::size_t o = 0; o < sz && empty; ++o) {
        if (o == k || o == (k + 1) % sz || o == (k + sz - 1) % sz) continue;
        const Vec2 x = pts[static_cast<std::size_t>(idx[o])];
        empty = !(triangle_area(p, q, x) >= 0 && triangle_area(q, r, x) >= 0 &&
                  triangle_area(r, p, x) >= 0);
      }
      if (!empty) continue;
      const double angle = tri_min_angle(p, q, r);
      if (angle > best_angle) {
        best_angle = angle;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) throw MeshError("failed to triangulate cut cell " + std::to_string(cell));
    const std::size_t k = static_cast<std::size_t>(best);
    add_triangle(ring[static_cast<std::size_t>(idx[(k + sz - 1) % sz])],
                 ring[static_cast<std::size_t>(idx[k])],
                 ring[static_cast<std::size_t>(idx[(k + 1) % sz])], cell);
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
  }
  if (triangle_area(pts[static_cast<std::size_t>(idx[0])], pts[static_cast<std::size_t>(idx[1])],
                    pts[static_cast<std::size_t>(idx[2])]) > floor) {
    add_triangle(ring[static_cast<std::size_t>(idx[0])], ring[static_cast<std::size_t>(idx[1])],
                 ring[static_cast<std::size_t>(idx[2])], cell);
  }
}

void Builder::mesh_cell(int i, int j) {
  const int cell = j * m_.nx + i;
  const std::array<int, 4> c{grid_id(i, j), grid_id(i + 1, j), grid_id(i + 1, j + 1),
                             grid_id(i, j + 1)};
  std::array<int, 4> s{};
  std::array<Vec2, 4> quad{};
  for (int k = 0; k < 4; ++k) {
    s[static_cast<std::size_t>(k)] = state_[static_cast<std::size_t>(c[static_cast<std::size_t>(k)])].state;
    quad[static_cast<std::size_t>(k)] = m_.nodes[static_cast<std::size_t>(c[static_cast<std::size_t>(k)])];
  }
  if (std::all_of(s.begin(), s.end(), [](int v) { return v < 0; })) return;

  auto in_hole = [&](Vec2 p, int hole) {
    return hole >= 0 && point_in_polygon(curves_[static_cast<std::size_t>(hole)], p);
  };
  if (std::all_of(s.begin(), s.end(), [](int v) { return v == 0; })) {
    const Vec2 mid = 0.25 * (quad[0] + quad[1] + quad[2] + quad[3]);
    bool hole = false;
    for (std::size_t k = 0; k < curves_.size() && !hole; ++k) hole = point_in_polygon(curves_[k], mid);
    if (!hole && !try_q4(c, cell)) fan_or_clip({c[0], c[1], c[2], c[3]}, cell);
    return;
  }

  // Walk the cell boundary counterclockwise, keeping material on the left.
  std::vector<RingPoint> ring;
  std::array<bool, 4> corner_entry{};
  std::array<int, 4> corner_slot{-1, -1, -1, -1};
  for (int k = 0; k < 4; ++k) {
    const std::size_t ka = static_cast<std::size_t>(k);
    const std::size_t kb = static_cast<std::size_t>((k + 1) % 4);
    const int a = c[ka];
    const int b = c[kb];
    const NodeState& sa = state_[static_cast<std::size_t>(a)];
    const NodeState& sb = state_[static_cast<std::size_t>(b)];
    if (sa.state >= 0) {
      corner_slot[ka] = static_cast<int>(ring.size());
      ring.push_back({a, sa.hole, sa.param});
    }
    if (sa.state > 0 && sb.state < 0) {
      const int x = crossing(a, b);
      const NodeState& sx = state_[static_cast<std::size_t>(x)];
      ring.push_back({x, sx.hole, sx.param, true, false});
    } else if (sa.state < 0 && sb.state > 0) {
      const int x = crossing(a, b);
      const NodeState& sx = state_[static_cast<std::size_t>(x)];
      ring.push_back({x, sx.hole, sx.param, false, true});
    } else if (sa.state == 0 && sb.state < 0) {
      ring.back().exit = true;
    } else if (sa.state < 0 && sb.state == 0) {
      corner_entry[kb] = true;
    } else if (sa.state == 0 && sb.state == 0 && sa.hole == sb.hole &&
               in_hole(0.5 * (quad[ka] + quad[kb]), sa.hole)) {
      ring.back().exit = true;
      corner_entry[kb] = true;
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (corner_entry[k] && corner_slot[k] >= 0) ring[static_cast<std::size_t>(corner_slot[k])].entry = true;
  }

  const bool plain = ring.size() == 4 &&
                     std::none_of(ring.begin(), ring.end(), [](const RingPoint& p) { return p.exit; });
  if (plain) {
    if (!try_q4(c, cell)) fan_or_clip({c[0], c[1], c[2], c[3]}, cell);
    return;
  }

  std::vector<int> ids;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    ids.push_back(ring[k].node);
    const RingPoint& next = ring[(k + 1) % ring.size()];
    if (ring[k].exit && next.entry && ring[k].hole == next.hole && ring.size() > 1) {
      for (int v : arc_nodes(ring[k], next, quad)) ids.push_back(v);
    }
  }
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
  if (ids.size() < 3) return;
  std::vector<Vec2> pts;
  for (int id : ids) pts.push_back(m_.nodes[static_cast<std::size_t>(id)]);
  if (signed_area(pts) < kAreaFloor * m_.h * m_.h) return;
  fan_or_clip(ids, cell);
}

void Builder::finalize() {
  const std::size_t nn = m_.nodes.size();
  std::vector<int> remap(nn, -1);
  std::vector<char> used(nn, 0);
  for (const Element& e : m_.elements) {
    for (int k = 0; k < e.size(); ++k) used[static_cast<std::size_t>(e.nodes[static_cast<std::size_t>(k)])] = 1;
  }
  std::vector<Vec2> nodes;
  for (std::size_t k = 0; k < nn; ++k) {
    if (used[k]) {
      remap[k] = static_cast<int>(nodes.size());
      nodes.push_back(m_.nodes[k]);
    }
  }
  for (Element& e : m_.elements) {
    for (int k = 0; k < e.size(); ++k) {
      auto& id = e.nodes[static_cast<std::size_t>(k)];
      id = remap[static_cast<std::size_t>(id)];
    }
  }
  m_.nodes = std::move(nodes);
  for (int id : hole_nodes_) {
    if (remap[static_cast<std::size_t>(id)] >= 0) m_.hole_boundary_nodes.push_back(remap[static_cast<std::size_t>(id)]);
  }
  std::sort(m_.hole_boundary_nodes.begin(), m_.hole_boundary_nodes.end());

  const int nx = m_.nx;
  const int ny = m_.ny;
  auto pair = [&](int si, int sj, int mi, int mj, Vec2 offset) {
    const int s = remap[static_cast<std::size_t>(grid_id(si, sj))];
    const int mm = remap[static_cast<std::size_t>(grid_id(mi, mj))];
    if (s < 0 || mm < 0) throw MeshError("outer boundary node missing from the mesh");
    m_.periodic_pairs.push_back({s, mm, offset});
  };
  for (int j = 1; j < ny; ++j) pair(nx, j, 0, j, {m_.l1, 0.0});
  for (int i = 1; i < nx; ++i) pair(i, ny, i, 0, {0.0, m_.l2});
  pair(nx, 0, 0, 0, {m_.l1, 0.0});
  pair(0, ny, 0, 0, {0.0, m_.l2});
  pair(nx, ny, 0, 0, {m_.l1, m_.l2});
  m_.pinned_node = remap[static_cast<std::size_t>(grid_id(0, 0))];
}

bool contains(const Mesh& m, int e, Vec2 p, Location& loc) {
  const Element& el = m.elements[static_cast<std::size_t>(e)];
  constexpr double tol = 1e-10;
  if (el.type == ElementType::t3) {
    const Vec2 x0 = m.nodes[static_cast<std::size_t>(el.nodes[0])];
    const Vec2 x1 = m.nodes[static_cast<std::size_t>(el.nodes[1])];
    const Vec2 x2 = m.nodes[static_cast<std::size_t>(el.nodes[2])];
    const double det = cross(x1 - x0, x2 - x0);
    const double r = cross(p - x0, x2 - x0) / det;
    const double s = cross(x1 - x0, p - x0) / det;
    if (r >= -tol && s >= -tol && r + s <= 1.0 + tol) {
      loc = {e, r, s};
      return true;
    }
    return false;
  }
  std::array<Vec2, 4> x{};
  for (std::size_t k = 0; k < 4; ++k) x[k] = m.nodes[static_cast<std::size_t>(el.nodes[k])];
  double r = 0.0;
  double s = 0.0;
  for (int it = 0; it < 50; ++it) {
    const auto n = q4_shape(r, s);
    const auto dn = q4_shape_derivatives(r, s);
    Vec2 f{-p.x, -p.y};
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      f += n[k] * x[k];
      j11 += dn[0][k] * x[k].x;
      j12 += dn[1][k] * x[k].x;
      j21 += dn[0][k] * x[k].y;
      j22 += dn[1][k] * x[k].y;
    }
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) return false;
    const double dr = (j22 * f.x - j12 * f.y) / det;
    const double ds = (-j21 * f.x + j11 * f.y) / det;
    r -= dr;
    s -= ds;
    if (std::abs(dr) + std::abs(ds) < 1e-14) break;
    if (std::abs(r) > 10.0 || std::abs(s) > 10.0) return false;
  }
  if (std::abs(r) <= 1.0 + tol && std::abs(s) <= 1.0 + tol) {
    loc = {e, r, s};
    return true;
  }
  return false;
}

std::array<Vec2, 4> element_points(const Mesh& m, const Element& el) {
  std::array<Vec2, 4> x{};
  for (int k = 0; k < el.size(); ++k) {
    x[static_cast<std::size_t>(k)] = m.nodes[static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(k)])];
  }
  return x;
}

}  // namespace

std::array<double, 4> q4_shape(double xi, double eta) {
  return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
          0.25 * (1 - xi) * (1 + eta)};
}

std::array<std::array<double, 4>, 2> q4_shape_derivatives(double xi, double eta) {
  return {{{-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)},
           {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)}}};
}

double jacobian_determinant(const Mesh& m, int e, double r, double s) {
  const Element& el = m.elements.at(static_cast<std::size_t>(e));
  const auto x = element_points(m, el);
  if (el.type == ElementType::t3) return cross(x[1] - x[0], x[2] - x[0]);
  const auto dn = q4_shape_derivatives(r, s);
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    j11 += dn[0][k] * x[k].x;
    j12 += dn[1][k] * x[k].x;
    j21 += dn[0][k] * x[k].y;
    j22 += dn[1][k] * x[k].y;
  }
  return j11 * j22 - j12 * j21;
}

double Mesh::element_area(int e) const {
  const Element& el = elements.at(static_cast<std::size_t>(e));
  const auto x = element_points(*this, el);
  return polygon_signed_area(std::vector<Vec2>(x.begin(), x.begin() + el.size()));
}

double Mesh::area() const {
  double a = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e) a += element_area(static_cast<int>(e));
  return a;
}

Vec2 Mesh::centroid(int e) const {
  const Element& el = elements.at(static_cast<std::size_t>(e));
  const auto x = element_points(*this, el);
  Vec2 c{0.0, 0.0};
  for (int k = 0; k < el.size(); ++k) c += x[static_cast<std::size_t>(k)];
  return (1.0 / el.size()) * c;
}

int Mesh::count(ElementType t) const {
  return static_cast<int>(
      std::count_if(elements.begin(), elements.end(), [t](const Element& e) { return e.type == t; }));
}

bool Mesh::on_outer_boundary(int node) const {
  const Vec2 p = nodes.at(static_cast<std::size_t>(node));
  const double tol = 1e-12 * std::max(l1, l2);
  return std::abs(p.x) <= tol || std::abs(p.y) <= tol || std::abs(p.x - l1) <= tol ||
         std::abs(p.y - l2) <= tol;
}

Location Mesh::locate(Vec2 p) const {
  const int ci = std::clamp(static_cast<int>(std::floor(p.x / l1 * nx)), 0, nx - 1);
  const int cj = std::clamp(static_cast<int>(std::floor(p.y / l2 * ny)), 0, ny - 1);
  Location loc;
  for (int ring = 0; ring <= 1; ++ring) {
    for (int dj = -ring; dj <= ring; ++dj) {
      for (int di = -ring; di <= ring; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
        const int i = ci + di;
        const int j = cj + dj;
        if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
        for (int e : cell_elements[static_cast<std::size_t>(j * nx + i)]) {
          if (contains(*this, e, p, loc)) return loc;
        }
      }
    }
  }
  return {};
}

Mesh generate(const CellGeometry& g, int n, const MeshOptions& options) {
  return Builder(g, n, options).run();
}

QualityReport quality_report(const Mesh& m) {
  QualityReport rep;
  rep.q4_count = m.count(ElementType::q4);
  rep.t3_count = m.count(ElementType::t3);
  rep.node_count = static_cast<int>(m.nodes.size());
  rep.snap_tolerance = 0.3 * m.h;
  rep.min_angle_deg = 180.0;
  rep.min_cut_angle_deg = 180.0;
  rep.min_jacobian = std::numeric_limits<double>::infinity();
  rep.min_t3_area_over_h2 = std::numeric_limits<double>::infinity();
  const std::set<int> hole(m.hole_boundary_nodes.begin(), m.hole_boundary_nodes.end());
  const double h2 = m.h * m.h;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const Element& el = m.elements[e];
    const auto x = element_points(m, el);
    const int nv = el.size();
    bool cut = false;
    double shortest = std::numeric_limits<double>::infinity();
    double longest = 0.0;
    for (int k = 0; k < nv; ++k) {
      const Vec2 p = x[static_cast<std::size_t>((k + nv - 1) % nv)];
      const Vec2 q = x[static_cast<std::size_t>(k)];
      const Vec2 r = x[static_cast<std::size_t>((k + 1) % nv)];
      const double angle =
          std::acos(std::clamp(dot(p - q, r - q) / (length(p - q) * length(r - q)), -1.0, 1.0)) *
          180.0 / std::numbers::pi;
      rep.min_angle_deg = std::min(rep.min_angle_deg, angle);
      rep.max_angle_deg = std::max(rep.max_angle_deg, angle);
      shortest = std::min(shortest, length(r - q));
      longest = std::max(longest, length(r - q));
      cut = cut || hole.count(el.nodes[static_cast<std::size_t>(k)]) > 0;
    }
    if (cut) {
      for (int k = 0; k < nv; ++k) {
        const Vec2 p = x[static_cast<std::size_t>((k + nv - 1) % nv)];
        const Vec2 q2 = x[static_cast<std::size_t>(k)];
        const Vec2 r = x[static_cast<std::size_t>((k + 1) % nv)];
        const double angle = std::acos(std::clamp(dot(p - q2, r - q2) / (length(p - q2) * length(r - q2)),
                                                  -1.0, 1.0)) *
                             180.0 / std::numbers::pi;
        rep.min_cut_angle_deg = std::min(rep.min_cut_angle_deg, angle);
      }
    }
    rep.max_aspect_ratio = std::max(rep.max_aspect_ratio, longest / shortest);
    if (el.type == ElementType::q4) {
      for (double r : {-kGauss, kGauss}) {
        for (double s : {-kGauss, kGauss}) {
          rep.min_jacobian = std::min(rep.min_jacobian, 4.0 * jacobian_determinant(m, static_cast<int>(e), r, s) / h2);
        }
      }
    } else {
      const double a = m.element_area(static_cast<int>(e));
      rep.min_jacobian = std::min(rep.min_jacobian, 2.0 * a / h2);
      rep.min_t3_area_over_h2 = std::min(rep.min_t3_area_over_h2, a / h2);
    }
  }
  if (rep.t3_count == 0) rep.min_t3_area_over_h2 = 0.0;
  if (m.hole_boundary_nodes.empty()) rep.min_cut_angle_deg = 0.0;
  return rep;
}

std::vector<std::string> check_mesh(const Mesh& m) {
  std::vector<std::string> out;
  const double h2 = m.h * m.h;
  std::map<std::pair<int, int>, int> edges;
  std::vector<char> used(m.nodes.size(), 0);
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const Element& el = m.elements[e];
    const int nv = el.size();
    if (el.type == ElementType::t3) {
      if (m.element_area(static_cast<int>(e)) <= kAreaFloor * h2) {
        out.push_back("element " + std::to_string(e) + ": triangle area below floor");
      }
    } else {
      for (double r : {-kGauss, kGauss}) {
        for (double s : {-kGauss, kGauss}) {
          if (jacobian_determinant(m, static_cast<int>(e), r, s) <= 0.0) {
            out.push_back("element " + std::to_string(e) + ": non-positive Jacobian");
          }
        }
      }
    }
    for (int k = 0; k < nv; ++k) {
      const int a = el.nodes[static_cast<std::size_t>(k)];
      const int b = el.nodes[static_cast<std::size_t>((k + 1) % nv)];
      used[static_cast<std::size_t>(a)] = 1;
      ++edges[std::minmax(a, b)];
    }
  }
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) out.push_back("node " + std::to_string(k) + " belongs to no element");
  }
  const std::set<int> hole(m.hole_boundary_nodes.begin(), m.hole_boundary_nodes.end());
  const double tol = 1e-12 * std::max(m.l1, m.l2);
  auto same_side = [&](int a, int b) {
    const Vec2 p = m.nodes[static_cast<std::size_t>(a)];
    const Vec2 q = m.nodes[static_cast<std::size_t>(b)];
    return (std::abs(p.x) <= tol && std::abs(q.x) <= tol) ||
           (std::abs(p.y) <= tol && std::abs(q.y) <= tol) ||
           (std::abs(p.x - m.l1) <= tol && std::abs(q.x - m.l1) <= tol) ||
           (std::abs(p.y - m.l2) <= tol && std::abs(q.y - m.l2) <= tol);
  };
  for (const auto& [edge, count] : edges) {
    if (count > 2) {
      out.push_back("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                    ") shared by more than two elements");
    } else if (count == 1 && !same_side(edge.first, edge.second) &&
               !(hole.count(edge.first) && hole.count(edge.second))) {
      out.push_back("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                    ") is an interior edge used by one element (hanging node)");
    }
  }

  std::vector<int> slave_count(m.nodes.size(), 0);
  std::vector<char> is_master(m.nodes.size(), 0);
  for (const PeriodicPair& p : m.periodic_pairs) {
    ++slave_count[static_cast<std::size_t>(p.slave)];
    is_master[static_cast<std::size_t>(p.master)] = 1;
    const Vec2 d = m.nodes[static_cast<std::size_t>(p.slave)] - m.nodes[static_cast<std::size_t>(p.master)] - p.offset;
    const bool offset_ok = (p.offset == Vec2{m.l1, 0.0}) || (p.offset == Vec2{0.0, m.l2}) ||
                           (p.offset == Vec2{m.l1, m.l2});
    if (!offset_ok || length(d) > tol) {
      out.push_back("periodic pair (" + std::to_string(p.slave) + ", " + std::to_string(p.master) +
                    ") has an inconsistent offset");
    }
  }
  for (std::size_t k = 0; k < m.nodes.size(); ++k) {
    if (!m.on_outer_boundary(static_cast<int>(k))) continue;
    if (is_master[k] && slave_count[k] == 0) continue;
    if (slave_count[k] != 1) {
      out.push_back("outer boundary node " + std::to_string(k) + " is in " +
                    std::to_string(slave_count[k]) + " periodic pairs as slave");
    }
  }
  return out;
}

void write_vtk(std::ostream& os, const Mesh& m, const VtkFields& fields) {
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\ncellhom mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.nodes.size() << " double\n";
  for (Vec2 p : m.nodes) os << p.x << ' ' << p.y << " 0\n";
  std::size_t total = 0;
  for (const Element& e : m.elements) total += static_cast<std::size_t>(e.size()) + 1;
  os << "CELLS " << m.elements.size() << ' ' << total << '\n';
  for (const Element& e : m.elements) {
    os << e.size();
    for (int k = 0; k < e.size(); ++k) os << ' ' << e.nodes[static_cast<std::size_t>(k)];
    os << '\n';
  }
  os << "CELL_TYPES " << m.elements.size() << '\n';
  for (const Element& e : m.elements) os << (e.type == ElementType::q4 ? 9 : 5) << '\n';

  os << "CELL_DATA " << m.elements.size() << '\n';
  os << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const Element& e : m.elements) os << e.region << '\n';
  for (const auto& [name, values] : fields.cell_scalars) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << v << '\n';
  }
  for (const auto& [name, values] : fields.cell_tensors) {
    os << "TENSORS " << name << " double\n";
    for (const auto& t : values) {
      os << t[0] << ' ' << t[2] << " 0\n" << t[2] << ' ' << t[1] << " 0\n0 0 0\n";
    }
  }
  if (fields.point_vectors.empty() && fields.point_scalars.empty()) return;
  os << "POINT_DATA " << m.nodes.size() << '\n';
  for (const auto& [name, values] : fields.point_scalars) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << v << '\n';
  }
  for (const auto& [name, values] : fields.point_vectors) {
    os << "VECTORS " << name << " double\n";
    for (Vec2 v : values) os << v.x << ' ' << v.y << " 0\n";
  }
}

}  // namespace cellhom

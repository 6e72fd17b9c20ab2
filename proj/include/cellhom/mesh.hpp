#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cellhom/geometry.hpp"

namespace cellhom {

enum class ElementType { q4, t3 };

struct Element {
  ElementType type = ElementType::q4;
  std::array<int, 4> nodes{-1, -1, -1, -1};  // counterclockwise; nodes[3] unused for T3
  int region = -1;                           // index into CellGeometry::regions, -1 = base phase

  int size() const { return type == ElementType::q4 ? 4 : 3; }
};

struct PeriodicPair {
  int slave = -1;
  int master = -1;
  Vec2 offset;  // x(slave) = x(master) + offset
};

/// Point inside a located element: natural coordinates (Q4: xi, eta in [-1, 1];
/// T3: barycentric weights of nodes 1 and 2).
struct Location {
  int element = -1;
  double r = 0.0;
  double s = 0.0;
};

struct Mesh {
  double l1 = 0.0;
  double l2 = 0.0;
  double h = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<Vec2> nodes;
  std::vector<Element> elements;
  std::vector<PeriodicPair> periodic_pairs;
  std::vector<int> hole_boundary_nodes;
  std::vector<std::string> region_tags;  // Element::region indexes this list
  int pinned_node = 0;
  /// Elements generated from each background grid cell, index j * nx + i.
  std::vector<std::vector<int>> cell_elements;

  double area() const;
  double element_area(int e) const;
  Vec2 centroid(int e) const;
  int count(ElementType t) const;
  bool on_outer_boundary(int node) const;

  /// Element containing p with its natural coordinates; element = -1 outside the mesh.
  Location locate(Vec2 p) const;
};

struct MeshOptions {
  int hole_segments = 0;      // polygon segments per curved hole; 0 means 4 n
  double snap_factor = 0.3;   // snap grid nodes within snap_factor * h of a hole
};

/// Structured cut-cell mesh with n cells across l2. Requires n >= 8, a valid geometry,
/// and n l1 / l2 integral.
Mesh generate(const CellGeometry& g, int n, const MeshOptions& options = {});

// Bilinear and linear shape functions on the reference elements.
std::array<double, 4> q4_shape(double xi, double eta);
/// dN/dxi and dN/deta.
std::array<std::array<double, 4>, 2> q4_shape_derivatives(double xi, double eta);
/// Jacobian determinant of element e at natural coordinates (Q4) or anywhere (T3).
double jacobian_determinant(const Mesh& m, int e, double r = 0.0, double s = 0.0);

struct QualityReport {
  int q4_count = 0;
  int t3_count = 0;
  int node_count = 0;
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_cut_angle_deg = 0.0;   // over elements touching the hole boundary
  double max_aspect_ratio = 0.0;    // longest / shortest edge
  double min_jacobian = 0.0;        // over Q4 Gauss points and T3 (twice the area)
  double min_t3_area_over_h2 = 0.0;
  double snap_tolerance = 0.0;
};

QualityReport quality_report(const Mesh& m);

/// Conformity, orientation, area floor and periodic-pair invariants; empty when valid.
std::vector<std::string> check_mesh(const Mesh& m);

/// Optional data sections for VTK export.
struct VtkFields {
  std::map<std::string, std::vector<Vec2>> point_vectors;
  std::map<std::string, std::vector<double>> point_scalars;
  std::map<std::string, std::vector<std::array<double, 3>>> cell_tensors;  // (s11, s22, s12)
  std::map<std::string, std::vector<double>> cell_scalars;
};

/// Legacy ASCII VTK 3.0 unstructured grid.
void write_vtk(std::ostream& os, const Mesh& m, const VtkFields& fields = {});

}  // namespace cellhom

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cellhom/errors.hpp"
#include "cellhom/mesh.hpp"

using namespace cellhom;

namespace {

const double kPaperArea = 2.0 - std::numbers::pi / 16.0;

CellGeometry mixed_holes() {
  CellGeometry g;
  g.holes.push_back(Ellipse{{0.5, 0.5}, 0.3, 0.12, 0.5});
  g.holes.push_back(Polygon{{{0.1, 0.1}, {0.3, 0.1}, {0.2, 0.3}}});
  return g;
}

}  // namespace

TEST(Generate, PlainGridCounts) {
  const Mesh m = generate(square_cell(1.0, 0.0), 8);
  EXPECT_EQ(m.elements.size(), 64u);
  EXPECT_EQ(m.nodes.size(), 81u);
  EXPECT_EQ(m.count(ElementType::q4), 64);
  // 7 + 7 edge slaves and 3 corner slaves of the origin
  EXPECT_EQ(m.periodic_pairs.size(), 17u);
  EXPECT_NEAR(m.area(), 1.0, 1e-14);
}

TEST(Generate, RejectsCoarseOrIncommensurate) {
  EXPECT_THROW(generate(square_cell(1.0, 0.0), 4), MeshError);
  CellGeometry g;
  g.l1 = 1.3;
  EXPECT_ANY_THROW(generate(g, 8));
  EXPECT_THROW(generate(square_cell(1.0, 0.55), 16), ValidationError);
}

TEST(Generate, PeriodicPairInvariants) {
  const Mesh m = generate(paper_cell(), 16);
  std::set<int> slaves;
  for (const PeriodicPair& p : m.periodic_pairs) {
    EXPECT_TRUE(slaves.insert(p.slave).second) << "slave " << p.slave << " paired twice";
    const Vec2 d = m.nodes[p.slave] - m.nodes[p.master];
    EXPECT_DOUBLE_EQ(d.x, p.offset.x);
    EXPECT_DOUBLE_EQ(d.y, p.offset.y);
    const bool lattice = (p.offset.x == 0.0 || p.offset.x == m.l1) && (p.offset.y == 0.0 || p.offset.y == m.l2) &&
                         (p.offset.x != 0.0 || p.offset.y != 0.0);
    EXPECT_TRUE(lattice);
  }
  int boundary = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) boundary += m.on_outer_boundary(static_cast<int>(i)) ? 1 : 0;
  // every boundary node is a slave, or the master of at least one pair
  std::set<int> masters;
  for (const PeriodicPair& p : m.periodic_pairs) masters.insert(p.master);
  EXPECT_EQ(static_cast<int>(slaves.size() + masters.size()), boundary);
}

TEST(Generate, ValidMeshes) {
  for (const CellGeometry& g : {paper_cell(), square_cell(1.0, 0.25), mixed_holes()}) {
    const Mesh m = generate(g, 32);
    const auto problems = check_mesh(m);
    EXPECT_TRUE(problems.empty()) << problems.front();
    const QualityReport q = quality_report(m);
    EXPECT_GT(q.min_angle_deg, 10.0);
    EXPECT_GT(q.min_jacobian, 0.0);
    EXPECT_GT(q.min_t3_area_over_h2, 1e-4);
  }
}

TEST(Generate, Deterministic) {
  const Mesh a = generate(mixed_holes(), 24);
  const Mesh b = generate(mixed_holes(), 24);
  ASSERT_EQ(a.nodes.size(), b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    EXPECT_EQ(a.nodes[i].x, b.nodes[i].x);
    EXPECT_EQ(a.nodes[i].y, b.nodes[i].y);
  }
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t e = 0; e < a.elements.size(); ++e) EXPECT_EQ(a.elements[e].nodes, b.elements[e].nodes);
}

TEST(Generate, PaperAreaWithinTolerance) {
  EXPECT_NEAR(generate(paper_cell(), 64).area(), kPaperArea, 1e-3);
}

TEST(Generate, AreaErrorRatioUnderRefinement) {
  // Measured ratio 3.98 between n = 8 and n = 16 (second order in h).
  const double e8 = std::abs(generate(paper_cell(), 8).area() - kPaperArea);
  const double e16 = std::abs(generate(paper_cell(), 16).area() - kPaperArea);
  EXPECT_GT(e8 / e16, 3.0);
  EXPECT_LT(e8 / e16, 5.0);
}

TEST(Generate, HoleBoundaryNodesOnInscribedPolygon) {
  const Mesh m = generate(paper_cell(), 32);
  ASSERT_FALSE(m.hole_boundary_nodes.empty());
  const double sagitta = 0.25 * (1.0 - std::cos(std::numbers::pi / (4 * 32)));
  for (int i : m.hole_boundary_nodes) {
    const double r = length(m.nodes[i] - Vec2{1.0, 0.5});
    EXPECT_LE(r, 0.25 + 1e-12);
    EXPECT_GE(r, 0.25 - sagitta - 1e-12);
  }
}

TEST(Generate, RegionTags) {
  CellGeometry g = paper_cell();
  g.regions.push_back({"ring", Annulus{{1.0, 0.5}, 0.25, 0.375}});
  const Mesh m = generate(g, 32);
  ASSERT_EQ(m.region_tags.size(), 1u);
  EXPECT_EQ(m.region_tags[0], "ring");
  double ring_area = 0.0;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    if (m.elements[e].region == 0) ring_area += m.element_area(static_cast<int>(e));
  }
  const double exact = std::numbers::pi * (0.375 * 0.375 - 0.25 * 0.25);
  EXPECT_NEAR(ring_area, exact, 0.1 * exact);
}

TEST(Quality, HomogeneousIsSquare) {
  const QualityReport q = quality_report(generate(square_cell(1.0, 0.0), 8));
  EXPECT_DOUBLE_EQ(q.min_angle_deg, 90.0);
  EXPECT_DOUBLE_EQ(q.max_angle_deg, 90.0);
  EXPECT_EQ(q.t3_count, 0);
  EXPECT_NEAR(q.max_aspect_ratio, 1.0, 1e-12);
}

TEST(Locate, FindsContainingElement) {
  const Mesh m = generate(paper_cell(), 16);
  for (const Vec2 p : {Vec2{0.1, 0.1}, Vec2{1.0, 0.8}, Vec2{1.9, 0.95}, Vec2{0.74, 0.5}}) {
    const Location loc = m.locate(p);
    ASSERT_GE(loc.element, 0) << p.x << " " << p.y;
  }
  EXPECT_EQ(m.locate({1.0, 0.5}).element, -1);
}

TEST(Vtk, LegacyHeaderAndCounts) {
  const Mesh m = generate(square_cell(1.0, 0.25), 8);
  std::ostringstream os;
  write_vtk(os, m);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0", 0), 0u);
  EXPECT_NE(s.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(s.find("POINTS " + std::to_string(m.nodes.size()) + " double"), std::string::npos);
  EXPECT_NE(s.find("CELL_TYPES " + std::to_string(m.elements.size())), std::string::npos);
}

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cellhom/errors.hpp"
#include "cellhom/fem.hpp"

using namespace cellhom;

namespace {

Mesh unit_square_element(bool clockwise = false) {
  Mesh m;
  m.l1 = m.l2 = m.h = 1.0;
  m.nx = m.ny = 1;
  m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  Element e;
  e.nodes = clockwise ? std::array<int, 4>{0, 3, 2, 1} : std::array<int, 4>{0, 1, 2, 3};
  m.elements.push_back(e);
  m.cell_elements = {{0}};
  return m;
}

Eigen::VectorXd nodal(const Mesh& m, auto field) {
  Eigen::VectorXd u(2 * m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const Vec2 v = field(m.nodes[i]);
    u[2 * i] = v.x;
    u[2 * i + 1] = v.y;
  }
  return u;
}

double rel(const Voigt3& a, const Voigt3& b) {
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

const IsotropicModuli kHalf(0.5, 0.5);
const IsotropicModuli kPaper = moduli_from_engineering(1.0, 0.3, PlanarModel::plane_strain);

}  // namespace

class ElementStiffness : public ::testing::TestWithParam<Quadrature> {};

TEST_P(ElementStiffness, RigidModesInKernel) {
  const Mesh m = unit_square_element();
  const Eigen::MatrixXd k = element_stiffness(m, 0, kHalf, GetParam());
  EXPECT_NEAR((k - k.transpose()).norm(), 0.0, 1e-14);
  const Eigen::VectorXd tx = nodal(m, [](Vec2) { return Vec2{1, 0}; });
  const Eigen::VectorXd ty = nodal(m, [](Vec2) { return Vec2{0, 1}; });
  const Eigen::VectorXd rot = nodal(m, [](Vec2 p) { return Vec2{-p.y, p.x}; });
  EXPECT_NEAR((k * tx).norm(), 0.0, 1e-14);
  EXPECT_NEAR((k * ty).norm(), 0.0, 1e-14);
  EXPECT_NEAR((k * rot).norm(), 0.0, 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  EXPECT_GT(eig.eigenvalues()[3], 1e-3);  // exactly three zero modes
  EXPECT_GT(eig.eigenvalues()[0], -1e-14);
}

TEST_P(ElementStiffness, AffineEnergy) {
  // u = (x, 0) gives strain (1, 0, 0) and energy density B1 / 2 = (K + G) / 2.
  const Mesh m = unit_square_element();
  const Eigen::MatrixXd k = element_stiffness(m, 0, kHalf, GetParam());
  const Eigen::VectorXd u = nodal(m, [](Vec2 p) { return Vec2{p.x, 0}; });
  EXPECT_NEAR(0.5 * u.dot(k * u), 0.5, 1e-14);
  const Eigen::VectorXd s = nodal(m, [](Vec2 p) { return Vec2{p.y, 0}; });
  EXPECT_NEAR(0.5 * s.dot(k * s), 0.5 * 0.5, 1e-14);  // engineering shear 1, G / 2
}

INSTANTIATE_TEST_SUITE_P(Quadratures, ElementStiffness, ::testing::Values(Quadrature::full, Quadrature::selective));

TEST(ElementStiffness, InvertedElementThrows) {
  const Mesh m = unit_square_element(true);
  try {
    element_stiffness(m, 0, kHalf);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    EXPECT_EQ(e.element(), 0);
  }
}

class PatchTest : public ::testing::TestWithParam<BcMode> {};

TEST_P(PatchTest, AffineStatesExact) {
  const Mesh m = generate(square_cell(1.0, 0.0), 8);
  for (const IsotropicModuli& mod : {kHalf, IsotropicModuli(3.0, 0.2)}) {
    const MaterialField mat(mod);
    for (const Quasiperiod& xi : {Quasiperiod(1, 0, 0), Quasiperiod(0.3, -0.7, 1.1)}) {
      const CellSolution s = solve_cell(m, mat, xi, GetParam());
      double fluct = 0;
      for (const Vec2 v : s.fluctuation(m)) fluct = std::max(fluct, length(v));
      EXPECT_LT(fluct, 1e-10);
      EXPECT_LT(rel(s.avg_stress, isotropic_stiffness(mod) * xi.v), 1e-10);
      const StressField f = stress_field(s, m, mat);
      for (const Voigt3& n : f.nodal) EXPECT_LT(rel(n, isotropic_stiffness(mod) * xi.v), 1e-10);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, PatchTest, ::testing::Values(BcMode::periodic, BcMode::dirichlet_affine));

TEST(SolveCell, ConstraintsExact) {
  const Mesh m = generate(paper_cell(), 16);
  const Quasiperiod xi(0.4, -0.2, 0.9);
  const CellSolution s = solve_cell(m, MaterialField(kPaper), xi);
  const auto w = s.fluctuation(m);
  EXPECT_EQ(w[m.pinned_node].x, 0.0);
  EXPECT_EQ(w[m.pinned_node].y, 0.0);
  for (const PeriodicPair& p : m.periodic_pairs) {
    const Vec2 jump = s.displacement(p.slave) - s.displacement(p.master);
    const Vec2 expected = xi.displacement(p.offset);
    EXPECT_NEAR(jump.x, expected.x, 1e-14);
    EXPECT_NEAR(jump.y, expected.y, 1e-14);
  }
  EXPECT_LE(s.residual, 1e-10);
}

TEST(SolveCell, PaperCellStiffnessEntry) {
  // B1* = 0.970 at nu = 0.3 in the published table; 0.33% above it at n = 32.
  const Mesh m = generate(paper_cell(), 64);
  const CellSolution s = solve_cell(m, MaterialField(kPaper), Quasiperiod(1, 0, 0));
  EXPECT_NEAR(s.avg_stress[0], 0.970, 0.02 * 0.970);
  EXPECT_NEAR(s.avg_stress[2], 0.0, 1e-10);
}

TEST(SolveCell, DenseOracleAgreement) {
  const Mesh m = generate(paper_cell(), 8);
  const MaterialField mat(kPaper);
  SolverOptions cg;
  cg.kind = SolverKind::cg;
  cg.rel_tol = 1e-12;
  const CellProblem pcg(m, mat, BcMode::periodic, cg);
  const Quasiperiod xi(1, 0.5, -0.25);
  const CellSolution a = pcg.solve(xi);
  const CellSolution b = pcg.solve_dense(xi);
  CellSolution diff = linear_combination({1.0, -1.0}, {&a, &b});
  const double err = std::sqrt(energy_bilinear(diff, diff, m, mat) / energy_bilinear(b, b, m, mat));
  EXPECT_LT(err, 1e-8);
  const CellSolution direct = solve_cell(m, mat, xi);
  EXPECT_LT(rel(direct.avg_stress, b.avg_stress), 1e-10);
}

TEST(SolveCell, ReducedMatrixSymmetricPositiveDefinite) {
  const Mesh m = generate(paper_cell(), 8);
  const CellProblem p(m, MaterialField(kPaper));
  const Eigen::MatrixXd k = p.reduced_matrix_dense();
  EXPECT_EQ(k.rows(), p.reduced_dofs());
  EXPECT_LT((k - k.transpose()).norm(), 1e-12 * k.norm());
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(k).info(), Eigen::Success);
}

TEST(SolveCell, IterationLimitRaisesWithHistory) {
  const Mesh m = generate(paper_cell(), 16);
  SolverOptions o;
  o.kind = SolverKind::cg;
  o.max_iterations = 3;
  try {
    solve_cell(m, MaterialField(kPaper), Quasiperiod(1, 0, 0), BcMode::periodic, o);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_FALSE(e.residual_history().empty());
  }
}

TEST(SolveCell, Deterministic) {
  const Mesh m = generate(paper_cell(), 16);
  const CellSolution a = solve_cell(m, MaterialField(kPaper), Quasiperiod(0, 1, 0));
  const CellSolution b = solve_cell(m, MaterialField(kPaper), Quasiperiod(0, 1, 0));
  EXPECT_EQ(a.u, b.u);
}

TEST(Energy, HomogeneousAndSymmetric) {
  const Mesh m = generate(square_cell(1.0, 0.0), 8);
  const MaterialField mat(kHalf);
  const CellSolution a = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  EXPECT_NEAR(energy_bilinear(a, a, m, mat), 1.0, 1e-12);
  const Mesh p = generate(paper_cell(), 16);
  const MaterialField pm(kPaper);
  const CellSolution x = solve_cell(p, pm, Quasiperiod(1, 0, 0));
  const CellSolution y = solve_cell(p, pm, Quasiperiod(0, 1, 0));
  EXPECT_NEAR(energy_bilinear(x, y, p, pm), energy_bilinear(y, x, p, pm), 1e-12);
  EXPECT_THROW(energy_bilinear(a, x, p, pm), ValidationError);
}

TEST(Energy, GalerkinIdentity) {
  const Mesh m = generate(paper_cell(), 16);
  const MaterialField mat(kPaper);
  const CellSolution a = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  const CellSolution b = solve_cell(m, mat, Quasiperiod(0, 0, 1));
  const double e11 = energy_bilinear(a, a, m, mat);
  EXPECT_NEAR(e11, a.avg_stress[0], 1e-8 * e11);
  EXPECT_NEAR(energy_bilinear(a, b, m, mat), b.avg_stress[0], 1e-8 * e11);
}

TEST(Energy, DirichletAbovePeriodic) {
  for (const CellGeometry& g : {paper_cell(), square_cell(1.0, 0.25)}) {
    const Mesh m = generate(g, 16);
    const MaterialField mat(kPaper);
    for (const Quasiperiod& xi : {Quasiperiod(1, 0, 0), Quasiperiod(0, 0, 1), Quasiperiod(1, -1, 0.5)}) {
      const CellSolution p = solve_cell(m, mat, xi, BcMode::periodic);
      const CellSolution d = solve_cell(m, mat, xi, BcMode::dirichlet_affine);
      const double ep = energy_bilinear(p, p, m, mat);
      EXPECT_GE(energy_bilinear(d, d, m, mat), ep * (1.0 - 1e-12));
    }
  }
}

TEST(FluxLine, HomogeneousConstantStress) {
  const Mesh m = generate(square_cell(1.0, 0.0), 8);
  const MaterialField mat(kHalf);
  const CellSolution s = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  const auto f = flux_line_integral(s, m, mat, {LineDirection::along_x2, 0.5});
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(f[1], 0.0, 1e-12);
}

TEST(FluxLine, AverageStressIdentityOnPaperCell) {
  const Mesh m = generate(paper_cell(), 32);
  const MaterialField mat(kPaper);
  const double area = 2.0;
  const CellSolution s = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  const auto v = flux_line_integral(s, m, mat, {LineDirection::along_x2, 0.25});
  EXPECT_NEAR(2.0 * v[0], area * s.avg_stress[0], 1e-2 * area * s.avg_stress[0]);
  const CellSolution t = solve_cell(m, mat, Quasiperiod(0, 0, 1));
  const auto h = flux_line_integral(t, m, mat, {LineDirection::along_x1, 0.125});
  EXPECT_NEAR(1.0 * h[0], area * t.avg_stress[2], 1e-2 * area * t.avg_stress[2]);
}

TEST(FluxLine, CrossingHoleThrows) {
  const Mesh m = generate(paper_cell(), 16);
  const MaterialField mat(kPaper);
  const CellSolution s = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  EXPECT_THROW(flux_line_integral(s, m, mat, {LineDirection::along_x1, 0.5}), ValidationError);
}

TEST(MaterialField, RegionOverrides) {
  CellGeometry g = paper_cell();
  g.regions.push_back({"ring", Annulus{{1.0, 0.5}, 0.25, 0.375}});
  const Mesh m = generate(g, 16);
  const MaterialField mat(kPaper, {{"ring", IsotropicModuli(2.0, 1.0)}});
  EXPECT_FALSE(mat.is_uniform());
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const IsotropicModuli here = mat.at(m, static_cast<int>(e));
    EXPECT_EQ(here == IsotropicModuli(2.0, 1.0), m.elements[e].region == 0);
  }
  const MaterialField wrong(kPaper, {{"core", IsotropicModuli(2.0, 1.0)}});
  EXPECT_THROW(wrong.check_regions(m), ValidationError);
}

TEST(SolutionFields, VtkExport) {
  const Mesh m = generate(paper_cell(), 8);
  const MaterialField mat(kPaper);
  const CellSolution s = solve_cell(m, mat, Quasiperiod(1, 0, 0));
  const VtkFields f = solution_fields(s, m, mat, "_a");
  ASSERT_FALSE(f.point_vectors.empty());
  ASSERT_FALSE(f.cell_tensors.empty());
  for (const auto& [name, values] : f.point_vectors) EXPECT_EQ(values.size(), m.nodes.size()) << name;
  for (const auto& [name, values] : f.cell_tensors) EXPECT_EQ(values.size(), m.elements.size()) << name;
  std::ostringstream os;
  write_vtk(os, m, f);
  EXPECT_NE(os.str().find("POINT_DATA " + std::to_string(m.nodes.size())), std::string::npos);
  EXPECT_NE(os.str().find("CELL_DATA " + std::to_string(m.elements.size())), std::string::npos);
}

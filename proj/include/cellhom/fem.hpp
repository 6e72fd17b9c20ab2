#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cellhom/elastic_tensor.hpp"
#include "cellhom/mesh.hpp"

namespace cellhom {

/// Isotropic moduli per element: a base phase plus optional overrides keyed by region tag.
class MaterialField {
 public:
  explicit MaterialField(IsotropicModuli base) : base_(base) {}
  MaterialField(IsotropicModuli base, std::map<std::string, IsotropicModuli> regions)
      : base_(base), regions_(std::move(regions)) {}

  const IsotropicModuli& base() const { return base_; }
  const std::map<std::string, IsotropicModuli>& regions() const { return regions_; }
  bool is_uniform() const;

  /// Moduli of an element; regions without an override use the base phase.
  IsotropicModuli at(const Mesh& m, int element) const;
  /// Throws ValidationError when an override names a region the mesh does not have.
  void check_regions(const Mesh& m) const;

  /// Every phase shifted by clm_shift(., rho).
  MaterialField shifted(double rho) const;

 private:
  IsotropicModuli base_;
  std::map<std::string, IsotropicModuli> regions_;
};

/// Average strain (xi11, xi22, 2 xi12) in the engineering-shear convention.
struct Quasiperiod {
  Voigt3 v{0.0, 0.0, 0.0};

  Quasiperiod() = default;
  Quasiperiod(double xi11, double xi22, double two_xi12) : v{xi11, xi22, two_xi12} {}
  explicit Quasiperiod(const Voigt3& a) : v(a) {}

  double xi11() const { return v[0]; }
  double xi22() const { return v[1]; }
  double xi12() const { return 0.5 * v[2]; }
  /// Affine displacement xi x at a point.
  Vec2 displacement(Vec2 x) const { return {v[0] * x.x + xi12() * x.y, xi12() * x.x + v[1] * x.y}; }
};

enum class BcMode { periodic, dirichlet_affine };
enum class SolverKind { cg, sparse_direct, dense_direct };
/// full: every term at 2x2 Gauss points. selective: on Q4 the volumetric part K (tr e)^2
/// uses the element center, which removes volumetric locking for nearly incompressible
/// moduli. T3 elements are exact either way.
enum class Quadrature { full, selective };

std::string to_string(BcMode m);
std::string to_string(SolverKind k);
std::string to_string(Quadrature q);

struct SolverOptions {
  SolverKind kind = SolverKind::sparse_direct;
  double rel_tol = 1e-10;
  int max_iterations = 0;  // 0 means 50 sqrt(dofs)
  Quadrature quadrature = Quadrature::selective;
};

struct CellSolution {
  Quasiperiod xi;
  BcMode bc_mode = BcMode::periodic;
  Quadrature quadrature = Quadrature::selective;
  std::vector<double> u;  // total nodal displacement, (u1, u2) per node
  Voigt3 avg_stress{0.0, 0.0, 0.0};
  double residual = 0.0;  // relative residual of the reduced system
  int iterations = 0;
  std::vector<double> residual_history;
  std::size_t mesh_nodes = 0;
  std::size_t mesh_elements = 0;

  Vec2 displacement(int node) const {
    return {u[static_cast<std::size_t>(2 * node)], u[static_cast<std::size_t>(2 * node + 1)]};
  }
  /// u - xi x at every node.
  std::vector<Vec2> fluctuation(const Mesh& m) const;
};

/// sum_k c_k s_k; solutions must share mesh, boundary mode and quadrature.
CellSolution linear_combination(const std::vector<double>& coeffs,
                                const std::vector<const CellSolution*>& sols);

/// One quadrature point of an element: physical position, weight (including the
/// Jacobian), and the strain-displacement rows.
struct QuadraturePoint {
  Vec2 x;
  double weight = 0.0;
  Eigen::Matrix<double, 3, Eigen::Dynamic> b;
};

/// Quadrature points of element e (2x2 Gauss for Q4, centroid for T3).
/// Throws AssemblyError for an inverted element.
std::vector<QuadraturePoint> element_quadrature(const Mesh& m, int e);
/// Strain-displacement matrix of element e at a location inside it.
Eigen::Matrix<double, 3, Eigen::Dynamic> strain_matrix(const Mesh& m, const Location& loc);

Eigen::MatrixXd element_stiffness(const Mesh& m, int e, const IsotropicModuli& moduli,
                                  Quadrature q = Quadrature::selective);

/// Assembled cell problem: the reduced operator is built (and, for direct solvers,
/// factorized) once and reused for every average strain. solve() is safe to call
/// concurrently.
class CellProblem {
 public:
  CellProblem(const Mesh& mesh, const MaterialField& material, BcMode bc = BcMode::periodic,
              SolverOptions options = {});
  ~CellProblem();
  CellProblem(const CellProblem&) = delete;
  CellProblem& operator=(const CellProblem&) = delete;

  CellSolution solve(const Quasiperiod& xi) const;
  /// Same system, dense Cholesky factorization. Requires at most 2000 reduced dofs.
  CellSolution solve_dense(const Quasiperiod& xi) const;

  int reduced_dofs() const;
  const Mesh& mesh() const { return mesh_; }
  const MaterialField& material() const { return material_; }
  BcMode bc_mode() const { return bc_; }
  const SolverOptions& options() const { return options_; }
  /// Reduced stiffness as a dense matrix (small meshes only).
  Eigen::MatrixXd reduced_matrix_dense() const;

 private:
  struct Impl;
  const Mesh& mesh_;
  MaterialField material_;
  BcMode bc_;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;

  Eigen::VectorXd rhs(const Quasiperiod& xi) const;
  CellSolution finish(const Quasiperiod& xi, const Eigen::VectorXd& w, double residual,
                      int iterations, std::vector<double> history) const;
};

CellSolution solve_cell(const Mesh& mesh, const MaterialField& material, const Quasiperiod& xi,
                        BcMode bc = BcMode::periodic, const SolverOptions& options = {});

/// (1/|Y|) sum over quadrature points of sigma.
Voigt3 average_stress(const Mesh& m, const MaterialField& material, const std::vector<double>& u,
                      Quadrature q);

/// (1/|Y|) u_i^T K u_j. Throws ValidationError when the solutions belong to different meshes.
double energy_bilinear(const CellSolution& a, const CellSolution& b, const Mesh& m,
                       const MaterialField& material);

struct StressField {
  std::vector<std::vector<Voigt3>> at_quadrature;  // per element, per quadrature point
  std::vector<std::vector<double>> weights;        // matching quadrature weights
  std::vector<Voigt3> element_mean;
  std::vector<Voigt3> nodal;  // area-weighted average of adjacent element means
};

StressField stress_field(const CellSolution& sol, const Mesh& m, const MaterialField& material);

/// Stress of the solution at a point located inside an element.
Voigt3 stress_at(const CellSolution& sol, const Mesh& m, const MaterialField& material,
                 const Location& loc);

struct FieldSample {
  double value = 0.0;
  Vec2 gradient;
};

/// Value and gradient of the elementwise interpolant of a nodal scalar field.
FieldSample interpolate(const Mesh& m, const std::vector<double>& nodal, const Location& loc);

/// Integral of sigma nu along the full periodic straight line, nu the unit normal
/// (0, 1) for a line along x1 and (1, 0) for a line along x2. Throws ValidationError
/// when the line leaves the material.
std::array<double, 2> flux_line_integral(const CellSolution& sol, const Mesh& m,
                                         const MaterialField& material, const Line& line);

/// Legacy VTK with the displacement and fluctuation as point vectors and the element
/// mean stress as cell tensors.
VtkFields solution_fields(const CellSolution& sol, const Mesh& m, const MaterialField& material,
                          const std::string& suffix = "");

}  // namespace cellhom

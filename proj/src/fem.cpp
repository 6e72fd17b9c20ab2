#include "cellhom/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cellhom/errors.hpp"

namespace cellhom {

namespace {

using BMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Matrix3 = Eigen::Matrix3d;

constexpr double kGauss = 0.57735026918962576451;

Matrix3 full_operator(const IsotropicModuli& m) {
  const double k = m.bulk();
  const double g = m.shear();
  Matrix3 d;
  d << k + g, k - g, 0, k - g, k + g, 0, 0, 0, g;
  return d;
}

Matrix3 volumetric_operator(const IsotropicModuli& m) {
  Matrix3 d = Matrix3::Zero();
  d.topLeftCorner<2, 2>().setConstant(m.bulk());
  return d;
}

Matrix3 deviatoric_operator(const IsotropicModuli& m) {
  const double g = m.shear();
  Matrix3 d;
  d << g, -g, 0, -g, g, 0, 0, 0, g;
  return d;
}

bool selective(const Mesh& m, int e, Quadrature q) {
  return q == Quadrature::selective && m.elements[static_cast<std::size_t>(e)].type == ElementType::q4;
}

Eigen::VectorXd element_dofs(const Mesh& m, int e, const std::vector<double>& u) {
  const Element& el = m.elements[static_cast<std::size_t>(e)];
  Eigen::VectorXd ue(2 * el.size());
  for (int k = 0; k < el.size(); ++k) {
    const auto node = static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(k)]);
    ue(2 * k) = u[2 * node];
    ue(2 * k + 1) = u[2 * node + 1];
  }
  return ue;
}

BMatrix b_from_gradients(const Eigen::Matrix<double, 2, Eigen::Dynamic>& dn) {
  const Eigen::Index nv = dn.cols();
  BMatrix b = BMatrix::Zero(3, 2 * nv);
  for (Eigen::Index a = 0; a < nv; ++a) {
    b(0, 2 * a) = dn(0, a);
    b(1, 2 * a + 1) = dn(1, a);
    b(2, 2 * a) = dn(1, a);
    b(2, 2 * a + 1) = dn(0, a);
  }
  return b;
}

// Physical shape-function gradients and Jacobian determinant.
std::pair<Eigen::Matrix<double, 2, Eigen::Dynamic>, double> shape_gradients(const Mesh& m, int e,
                                                                            double r, double s) {
  const Element& el = m.elements[static_cast<std::size_t>(e)];
  if (el.type == ElementType::t3) {
    const Vec2 x0 = m.nodes[static_cast<std::size_t>(el.nodes[0])];
    const Vec2 x1 = m.nodes[static_cast<std::size_t>(el.nodes[1])];
    const Vec2 x2 = m.nodes[static_cast<std::size_t>(el.nodes[2])];
    const double det = cross(x1 - x0, x2 - x0);
    Eigen::Matrix<double, 2, Eigen::Dynamic> dn(2, 3);
    dn << x1.y - x2.y, x2.y - x0.y, x0.y - x1.y, x2.x - x1.x, x0.x - x2.x, x1.x - x0.x;
    return {dn / det, det};
  }
  const auto d = q4_shape_derivatives(r, s);
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec2 x = m.nodes[static_cast<std::size_t>(el.nodes[k])];
    j11 += d[0][k] * x.x;
    j12 += d[1][k] * x.x;
    j21 += d[0][k] * x.y;
    j22 += d[1][k] * x.y;
  }
  const double det = j11 * j22 - j12 * j21;
  Eigen::Matrix<double, 2, Eigen::Dynamic> dn(2, 4);
  for (int k = 0; k < 4; ++k) {
    dn(0, k) = (j22 * d[0][static_cast<std::size_t>(k)] - j21 * d[1][static_cast<std::size_t>(k)]) / det;
    dn(1, k) = (-j12 * d[0][static_cast<std::size_t>(k)] + j11 * d[1][static_cast<std::size_t>(k)]) / det;
  }
  return {dn, det};
}

Voigt3 to_voigt(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

void check_same_mesh(const CellSolution& s, const Mesh& m) {
  if (s.mesh_nodes != m.nodes.size() || s.mesh_elements != m.elements.size() ||
      s.u.size() != 2 * m.nodes.size()) {
    throw ValidationError("solution does not belong to this mesh");
  }
}

// Quadrature stresses of one element.
std::vector<Voigt3> element_stresses(const Mesh& m, int e, const IsotropicModuli& mod,
                                     const std::vector<QuadraturePoint>& qp,
                                     const Eigen::VectorXd& ue, Quadrature q) {
  std::vector<Voigt3> out;
  out.reserve(qp.size());
  if (selective(m, e, q)) {
    const Eigen::Vector3d vol = volumetric_operator(mod) * (strain_matrix(m, {e, 0.0, 0.0}) * ue);
    const Matrix3 dev = deviatoric_operator(mod);
    for (const auto& p : qp) out.push_back(to_voigt(dev * (p.b * ue) + vol));
  } else {
    const Matrix3 d = full_operator(mod);
    for (const auto& p : qp) out.push_back(to_voigt(d * (p.b * ue)));
  }
  return out;
}

}  // namespace

std::string to_string(BcMode m) { return m == BcMode::periodic ? "periodic" : "dirichlet_affine"; }

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::cg: return "cg";
    case SolverKind::sparse_direct: return "sparse_direct";
    case SolverKind::dense_direct: return "dense_direct";
  }
  return "unknown";
}

std::string to_string(Quadrature q) { return q == Quadrature::full ? "full" : "selective"; }

bool MaterialField::is_uniform() const {
  return std::all_of(regions_.begin(), regions_.end(), [&](const auto& kv) { return kv.second == base_; });
}

IsotropicModuli MaterialField::at(const Mesh& m, int element) const {
  const int region = m.elements[static_cast<std::size_t>(element)].region;
  if (region < 0) return base_;
  const auto it = regions_.find(m.region_tags.at(static_cast<std::size_t>(region)));
  return it == regions_.end() ? base_ : it->second;
}

void MaterialField::check_regions(const Mesh& m) const {
  for (const auto& [tag, moduli] : regions_) {
    if (std::find(m.region_tags.begin(), m.region_tags.end(), tag) == m.region_tags.end()) {
      throw ValidationError("material override for unknown region '" + tag + "'");
    }
  }
}

MaterialField MaterialField::shifted(double rho) const {
  std::map<std::string, IsotropicModuli> r;
  for (const auto& [tag, moduli] : regions_) r.emplace(tag, clm_shift(moduli, rho));
  return MaterialField(clm_shift(base_, rho), std::move(r));
}

std::vector<Vec2> CellSolution::fluctuation(const Mesh& m) const {
  check_same_mesh(*this, m);
  std::vector<Vec2> out(m.nodes.size());
  for (std::size_t k = 0; k < m.nodes.size(); ++k) {
    out[k] = displacement(static_cast<int>(k)) - xi.displacement(m.nodes[k]);
  }
  return out;
}

CellSolution linear_combination(const std::vector<double>& coeffs,
                                const std::vector<const CellSolution*>& sols) {
  if (coeffs.size() != sols.size() || sols.empty()) {
    throw ValidationError("linear_combination needs one coefficient per solution");
  }
  CellSolution out = *sols.front();
  std::fill(out.u.begin(), out.u.end(), 0.0);
  out.xi = Quasiperiod();
  out.avg_stress = {0.0, 0.0, 0.0};
  out.residual = 0.0;
  out.iterations = 0;
  out.residual_history.clear();
  for (std::size_t k = 0; k < sols.size(); ++k) {
    const CellSolution& s = *sols[k];
    if (s.u.size() != out.u.size() || s.mesh_elements != out.mesh_elements ||
        s.bc_mode != out.bc_mode || s.quadrature != out.quadrature) {
      throw ValidationError("cannot combine solutions from different problems");
    }
    const double c = coeffs[k];
    for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] += c * s.u[i];
    for (std::size_t i = 0; i < 3; ++i) {
      out.xi.v[i] += c * s.xi.v[i];
      out.avg_stress[i] += c * s.avg_stress[i];
    }
    out.residual = std::max(out.residual, s.residual);
  }
  return out;
}

BMatrix strain_matrix(const Mesh& m, const Location& loc) {
  return b_from_gradients(shape_gradients(m, loc.element, loc.r, loc.s).first);
}

std::vector<QuadraturePoint> element_quadrature(const Mesh& m, int e) {
  const Element& el = m.elements.at(static_cast<std::size_t>(e));
  std::vector<QuadraturePoint> out;
  if (el.type == ElementType::t3) {
    auto [dn, det] = shape_gradients(m, e, 0.0, 0.0);
    if (det <= 0.0) throw AssemblyError("element " + std::to_string(e) + " is inverted", e);
    out.push_back({m.centroid(e), 0.5 * det, b_from_gradients(dn)});
    return out;
  }
  for (double s : {-kGauss, kGauss}) {
    for (double r : {-kGauss, kGauss}) {
      auto [dn, det] = shape_gradients(m, e, r, s);
      if (det <= 0.0) throw AssemblyError("element " + std::to_string(e) + " is inverted", e);
      const auto n = q4_shape(r, s);
      Vec2 x{0.0, 0.0};
      for (std::size_t k = 0; k < 4; ++k) x += n[k] * m.nodes[static_cast<std::size_t>(el.nodes[k])];
      out.push_back({x, det, b_from_gradients(dn)});
    }
  }
  return out;
}

Eigen::MatrixXd element_stiffness(const Mesh& m, int e, const IsotropicModuli& moduli, Quadrature q) {
  const auto qp = element_quadrature(m, e);
  const Eigen::Index n = qp.front().b.cols();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  if (selective(m, e, q)) {
    const Matrix3 dev = deviatoric_operator(moduli);
    double area = 0.0;
    for (const auto& p : qp) {
      k.noalias() += p.weight * p.b.transpose() * dev * p.b;
      area += p.weight;
    }
    const BMatrix b0 = strain_matrix(m, {e, 0.0, 0.0});
    k.noalias() += area * b0.transpose() * volumetric_operator(moduli) * b0;
  } else {
    const Matrix3 d = full_operator(moduli);
    for (const auto& p : qp) k.noalias() += p.weight * p.b.transpose() * d * p.b;
  }
  return k;
}

struct CellProblem::Impl {
  std::vector<int> dof_map;  // full dof -> reduced index, -1 when prescribed
  int reduced = 0;
  Eigen::SparseMatrix<double> full;
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd inv_diag;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

CellProblem::CellProblem(const Mesh& mesh, const MaterialField& material, BcMode bc,
                         SolverOptions options)
    : mesh_(mesh), material_(material), bc_(bc), options_(options), impl_(std::make_unique<Impl>()) {
  material_.check_regions(mesh_);
  const std::size_t nn = mesh_.nodes.size();
  std::vector<int> rep(nn);
  std::iota(rep.begin(), rep.end(), 0);
  std::vector<char> fixed(nn, 0);
  if (bc_ == BcMode::periodic) {
    if (mesh_.periodic_pairs.empty()) throw ValidationError("periodic mode needs periodic pairs");
    for (const PeriodicPair& p : mesh_.periodic_pairs) rep[static_cast<std::size_t>(p.slave)] = p.master;
    fixed[static_cast<std::size_t>(mesh_.pinned_node)] = 1;
  } else {
    for (std::size_t k = 0; k < nn; ++k) fixed[k] = mesh_.on_outer_boundary(static_cast<int>(k)) ? 1 : 0;
  }
  std::vector<int> node_index(nn, -1);
  int next = 0;
  for (std::size_t k = 0; k < nn; ++k) {
    if (rep[k] == static_cast<int>(k) && !fixed[k]) node_index[k] = next++;
  }
  impl_->dof_map.assign(2 * nn, -1);
  for (std::size_t k = 0; k < nn; ++k) {
    const int base = node_index[static_cast<std::size_t>(rep[k])];
    if (base < 0) continue;
    impl_->dof_map[2 * k] = 2 * base;
    impl_->dof_map[2 * k + 1] = 2 * base + 1;
  }
  impl_->reduced = 2 * next;
  if (impl_->reduced == 0) throw ValidationError("cell problem has no free degrees of freedom");

  std::vector<Eigen::Triplet<double>> full_t;
  std::vector<Eigen::Triplet<double>> red_t;
  full_t.reserve(mesh_.elements.size() * 64);
  red_t.reserve(mesh_.elements.size() * 64);
  for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
    const Element& el = mesh_.elements[e];
    const Eigen::MatrixXd ke =
        element_stiffness(mesh_, static_cast<int>(e), material_.at(mesh_, static_cast<int>(e)), options_.quadrature);
    std::vector<int> gd(static_cast<std::size_t>(2 * el.size()));
    for (int k = 0; k < el.size(); ++k) {
      gd[static_cast<std::size_t>(2 * k)] = 2 * el.nodes[static_cast<std::size_t>(k)];
      gd[static_cast<std::size_t>(2 * k + 1)] = 2 * el.nodes[static_cast<std::size_t>(k)] + 1;
    }
    for (std::size_t i = 0; i < gd.size(); ++i) {
      const int ri = impl_->dof_map[static_cast<std::size_t>(gd[i])];
      for (std::size_t j = 0; j < gd.size(); ++j) {
        const double v = ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        full_t.emplace_back(gd[i], gd[j], v);
        const int rj = impl_->dof_map[static_cast<std::size_t>(gd[j])];
        if (ri >= 0 && rj >= 0) red_t.emplace_back(ri, rj, v);
      }
    }
  }
  const auto nfull = static_cast<Eigen::Index>(2 * nn);
  impl_->full.resize(nfull, nfull);
  impl_->full.setFromTriplets(full_t.begin(), full_t.end());
  impl_->a.resize(impl_->reduced, impl_->reduced);
  impl_->a.setFromTriplets(red_t.begin(), red_t.end());
  impl_->inv_diag = impl_->a.diagonal().cwiseInverse();

  if (options_.kind == SolverKind::sparse_direct) {
    impl_->ldlt.compute(impl_->a);
    if (impl_->ldlt.info() != Eigen::Success) {
      throw SolverError("sparse factorization failed; constraint setup leaves the system singular", {});
    }
    if ((impl_->ldlt.vectorD().array() <= 0.0).any()) {
      throw SolverError("reduced stiffness is not positive definite; check constraints", {});
    }
  }
}

CellProblem::~CellProblem() = default;

int CellProblem::reduced_dofs() const { return impl_->reduced; }

Eigen::MatrixXd CellProblem::reduced_matrix_dense() const { return Eigen::MatrixXd(impl_->a); }

Eigen::VectorXd CellProblem::rhs(const Quasiperiod& xi) const {
  const std::size_t nn = mesh_.nodes.size();
  Eigen::VectorXd ua(static_cast<Eigen::Index>(2 * nn));
  for (std::size_t k = 0; k < nn; ++k) {
    const Vec2 d = xi.displacement(mesh_.nodes[k]);
    ua(static_cast<Eigen::Index>(2 * k)) = d.x;
    ua(static_cast<Eigen::Index>(2 * k + 1)) = d.y;
  }
  const Eigen::VectorXd f = impl_->full * ua;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(impl_->reduced);
  for (std::size_t i = 0; i < impl_->dof_map.size(); ++i) {
    const int r = impl_->dof_map[i];
    if (r >= 0) b(r) -= f(static_cast<Eigen::Index>(i));
  }
  return b;
}

CellSolution CellProblem::finish(const Quasiperiod& xi, const Eigen::VectorXd& w, double residual,
                                 int iterations, std::vector<double> history) const {
  CellSolution s;
  s.xi = xi;
  s.bc_mode = bc_;
  s.quadrature = options_.quadrature;
  s.mesh_nodes = mesh_.nodes.size();
  s.mesh_elements = mesh_.elements.size();
  s.u.assign(2 * mesh_.nodes.size(), 0.0);
  for (std::size_t k = 0; k < mesh_.nodes.size(); ++k) {
    const Vec2 d = xi.displacement(mesh_.nodes[k]);
    const int r0 = impl_->dof_map[2 * k];
    const int r1 = impl_->dof_map[2 * k + 1];
    s.u[2 * k] = d.x + (r0 >= 0 ? w(r0) : 0.0);
    s.u[2 * k + 1] = d.y + (r1 >= 0 ? w(r1) : 0.0);
  }
  s.avg_stress = average_stress(mesh_, material_, s.u, options_.quadrature);
  s.residual = residual;
  s.iterations = iterations;
  s.residual_history = std::move(history);
  return s;
}

namespace {

// Residual relative to the load; loads that cancel to roundoff are measured against
// the unreduced load instead.
double relative_residual(double r, double bnorm, double scale) {
  if (bnorm > 1e-12 * scale) return r / bnorm;
  return scale > 0.0 ? r / scale : r;
}

}  // namespace

CellSolution CellProblem::solve(const Quasiperiod& xi) const {
  for (double v : xi.v) {
    if (!std::isfinite(v)) throw ValidationError("quasiperiod entries must be finite");
  }
  if (options_.kind == SolverKind::dense_direct) return solve_dense(xi);
  const Eigen::VectorXd b = rhs(xi);
  const double bnorm = b.norm();
  Eigen::VectorXd ua(static_cast<Eigen::Index>(2 * mesh_.nodes.size()));
  for (std::size_t k = 0; k < mesh_.nodes.size(); ++k) {
    const Vec2 d = xi.displacement(mesh_.nodes[k]);
    ua(static_cast<Eigen::Index>(2 * k)) = d.x;
    ua(static_cast<Eigen::Index>(2 * k + 1)) = d.y;
  }
  const double scale = (impl_->full * ua).norm();

  if (options_.kind == SolverKind::sparse_direct) {
    const Eigen::VectorXd w = impl_->ldlt.solve(b);
    const double res = relative_residual((impl_->a * w - b).norm(), bnorm, scale);
    return finish(xi, w, res, 1, {res});
  }

  // Jacobi-preconditioned conjugate gradients.
  const int n = impl_->reduced;
  const int max_it = options_.max_iterations > 0
                         ? options_.max_iterations
                         : static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n))));
  const double target = std::max(options_.rel_tol * bnorm, 1e-14 * scale);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  std::vector<double> history{relative_residual(r.norm(), bnorm, scale)};
  if (r.norm() <= target) return finish(xi, x, history.back(), 0, history);
  Eigen::VectorXd z = impl_->inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  for (int it = 1; it <= max_it; ++it) {
    ap.noalias() = impl_->a * p;
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rn = r.norm();
    history.push_back(relative_residual(rn, bnorm, scale));
    if (rn <= target) return finish(xi, x, history.back(), it, history);
    z = impl_->inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("conjugate gradients did not converge in " + std::to_string(max_it) +
                        " iterations (relative residual " + std::to_string(history.back()) + ")",
                    history);
}

CellSolution CellProblem::solve_dense(const Quasiperiod& xi) const {
  if (impl_->reduced > 2000) {
    throw ValidationError("dense solver limited to 2000 dofs, problem has " +
                          std::to_string(impl_->reduced));
  }
  const Eigen::MatrixXd a(impl_->a);
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SolverError("reduced stiffness is not positive definite; check constraints", {});
  }
  const Eigen::VectorXd b = rhs(xi);
  const Eigen::VectorXd w = llt.solve(b);
  const double bnorm = b.norm();
  const double res = bnorm > 0.0 ? (a * w - b).norm() / bnorm : 0.0;
  return finish(xi, w, res, 1, {res});
}

CellSolution solve_cell(const Mesh& mesh, const MaterialField& material, const Quasiperiod& xi,
                        BcMode bc, const SolverOptions& options) {
  return CellProblem(mesh, material, bc, options).solve(xi);
}

Voigt3 average_stress(const Mesh& m, const MaterialField& material, const std::vector<double>& u,
                      Quadrature q) {
  Voigt3 sum{0.0, 0.0, 0.0};
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    const auto qp = element_quadrature(m, ei);
    const auto s = element_stresses(m, ei, material.at(m, ei), qp, element_dofs(m, ei, u), q);
    for (std::size_t k = 0; k < qp.size(); ++k) {
      for (std::size_t i = 0; i < 3; ++i) sum[i] += qp[k].weight * s[k][i];
    }
  }
  const double area = m.l1 * m.l2;
  return {sum[0] / area, sum[1] / area, sum[2] / area};
}

double energy_bilinear(const CellSolution& a, const CellSolution& b, const Mesh& m,
                       const MaterialField& material) {
  check_same_mesh(a, m);
  check_same_mesh(b, m);
  if (a.quadrature != b.quadrature) throw ValidationError("solutions use different quadrature rules");
  double sum = 0.0;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    const Eigen::MatrixXd ke = element_stiffness(m, ei, material.at(m, ei), a.quadrature);
    sum += element_dofs(m, ei, a.u).dot(ke * element_dofs(m, ei, b.u));
  }
  return sum / (m.l1 * m.l2);
}

StressField stress_field(const CellSolution& sol, const Mesh& m, const MaterialField& material) {
  check_same_mesh(sol, m);
  StressField f;
  const std::size_t ne = m.elements.size();
  f.at_quadrature.resize(ne);
  f.weights.resize(ne);
  f.element_mean.resize(ne);
  f.nodal.assign(m.nodes.size(), {0.0, 0.0, 0.0});
  std::vector<double> node_weight(m.nodes.size(), 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const int ei = static_cast<int>(e);
    const auto qp = element_quadrature(m, ei);
    f.at_quadrature[e] = element_stresses(m, ei, material.at(m, ei), qp, element_dofs(m, ei, sol.u), sol.quadrature);
    Voigt3 mean{0.0, 0.0, 0.0};
    double area = 0.0;
    for (std::size_t k = 0; k < qp.size(); ++k) {
      f.weights[e].push_back(qp[k].weight);
      area += qp[k].weight;
      for (std::size_t i = 0; i < 3; ++i) mean[i] += qp[k].weight * f.at_quadrature[e][k][i];
    }
    for (double& v : mean) v /= area;
    f.element_mean[e] = mean;
    const Element& el = m.elements[e];
    for (int k = 0; k < el.size(); ++k) {
      const auto node = static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(k)]);
      node_weight[node] += area;
      for (std::size_t i = 0; i < 3; ++i) f.nodal[node][i] += area * mean[i];
    }
  }
  for (std::size_t k = 0; k < f.nodal.size(); ++k) {
    if (node_weight[k] > 0.0) {
      for (double& v : f.nodal[k]) v /= node_weight[k];
    }
  }
  return f;
}

Voigt3 stress_at(const CellSolution& sol, const Mesh& m, const MaterialField& material,
                 const Location& loc) {
  const int e = loc.element;
  const IsotropicModuli mod = material.at(m, e);
  const Eigen::VectorXd ue = element_dofs(m, e, sol.u);
  const BMatrix b = strain_matrix(m, loc);
  if (selective(m, e, sol.quadrature)) {
    return to_voigt(deviatoric_operator(mod) * (b * ue) +
                    volumetric_operator(mod) * (strain_matrix(m, {e, 0.0, 0.0}) * ue));
  }
  return to_voigt(full_operator(mod) * (b * ue));
}

FieldSample interpolate(const Mesh& m, const std::vector<double>& nodal, const Location& loc) {
  const Element& el = m.elements.at(static_cast<std::size_t>(loc.element));
  auto [dn, det] = shape_gradients(m, loc.element, loc.r, loc.s);
  FieldSample out;
  std::array<double, 4> n{};
  if (el.type == ElementType::t3) {
    n = {1.0 - loc.r - loc.s, loc.r, loc.s, 0.0};
  } else {
    n = q4_shape(loc.r, loc.s);
  }
  for (int k = 0; k < el.size(); ++k) {
    const double v = nodal[static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(k)])];
    out.value += n[static_cast<std::size_t>(k)] * v;
    out.gradient += Vec2{dn(0, k) * v, dn(1, k) * v};
  }
  return out;
}

std::array<double, 2> flux_line_integral(const CellSolution& sol, const Mesh& m,
                                         const MaterialField& material, const Line& line) {
  check_same_mesh(sol, m);
  const bool along_x1 = line.direction == LineDirection::along_x1;
  const double extent = along_x1 ? m.l1 : m.l2;
  const double across = along_x1 ? m.l2 : m.l1;
  const int cells = along_x1 ? m.nx : m.ny;
  const int rows = along_x1 ? m.ny : m.nx;
  const double c = line.coordinate;
  if (!(c >= 0.0 && c <= across)) throw ValidationError("line lies outside the cell");

  // A line on a grid line is evaluated as the mean of both sides.
  std::vector<double> offsets{c};
  const double grid = c / across * rows;
  if (std::abs(grid - std::round(grid)) < 1e-9) {
    const double delta = 1e-9 * m.h;
    offsets.clear();
    if (c - delta > 0.0) offsets.push_back(c - delta);
    if (c + delta < across) offsets.push_back(c + delta);
    if (offsets.empty()) offsets.push_back(c);
  }

  std::array<double, 2> total{0.0, 0.0};
  const double step = extent / cells;
  for (double off : offsets) {
    const int row = std::clamp(static_cast<int>(std::floor(off / across * rows)), 0, rows - 1);
    for (int k = 0; k < cells; ++k) {
      const int cell = along_x1 ? row * m.nx + k : k * m.nx + row;
      const auto& els = m.cell_elements[static_cast<std::size_t>(cell)];
      const bool plain = els.size() == 1 && m.elements[static_cast<std::size_t>(els[0])].type == ElementType::q4;
      const int pieces = plain ? 1 : 16;
      const double len = step / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double a = k * step + p * len;
        for (double g : {-kGauss, kGauss}) {
          const double t = a + 0.5 * len * (1.0 + g);
          const Vec2 x = along_x1 ? Vec2{t, off} : Vec2{off, t};
          const Location loc = m.locate(x);
          if (loc.element < 0) {
            throw ValidationError("line crosses a hole near (" + std::to_string(x.x) + ", " +
                                  std::to_string(x.y) + ")");
          }
          const Voigt3 s = stress_at(sol, m, material, loc);
          const double w = 0.5 * len / static_cast<double>(offsets.size());
          if (along_x1) {
            total[0] += w * s[2];
            total[1] += w * s[1];
          } else {
            total[0] += w * s[0];
            total[1] += w * s[2];
          }
        }
      }
    }
  }
  return total;
}

VtkFields solution_fields(const CellSolution& sol, const Mesh& m, const MaterialField& material,
                          const std::string& suffix) {
  VtkFields f;
  std::vector<Vec2> disp(m.nodes.size());
  for (std::size_t k = 0; k < m.nodes.size(); ++k) disp[k] = sol.displacement(static_cast<int>(k));
  f.point_vectors["displacement" + suffix] = std::move(disp);
  f.point_vectors["fluctuation" + suffix] = sol.fluctuation(m);
  const StressField s = stress_field(sol, m, material);
  f.cell_tensors["stress" + suffix] = s.element_mean;
  return f;
}

}  // namespace cellhom

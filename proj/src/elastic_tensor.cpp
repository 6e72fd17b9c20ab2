#include "cellhom/elastic_tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "cellhom/errors.hpp"

namespace cellhom {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

IsotropicModuli::IsotropicModuli(double bulk, double shear) : bulk_(bulk), shear_(shear) {
  if (!(std::isfinite(bulk) && bulk > 0.0)) {
    throw DomainError("planar bulk modulus K must be positive, got " + fmt(bulk));
  }
  if (!(std::isfinite(shear) && shear > 0.0)) {
    throw DomainError("shear modulus G must be positive, got " + fmt(shear));
  }
}

IsotropicModuli moduli_from_engineering(double young, double poisson, PlanarModel model) {
  if (!(std::isfinite(young) && young > 0.0)) {
    throw DomainError("Young's modulus E must be positive, got " + fmt(young));
  }
  if (!(std::isfinite(poisson) && poisson > -1.0)) {
    throw DomainError("Poisson's ratio must exceed -1, got " + fmt(poisson));
  }
  double bulk = 0.0;
  if (model == PlanarModel::plane_strain) {
    if (!(poisson < 0.5)) {
      throw DomainError("Poisson's ratio must be below 1/2 for plane strain, got " + fmt(poisson));
    }
    bulk = young / (2.0 * (1.0 + poisson) * (1.0 - 2.0 * poisson));
  } else {
    if (!(poisson < 1.0)) {
      throw DomainError("Poisson's ratio must be below 1 for plane stress, got " + fmt(poisson));
    }
    bulk = young / (2.0 * (1.0 - poisson));
  }
  return {bulk, young / (2.0 * (1.0 + poisson))};
}

VoigtMatrix VoigtMatrix::from_full(const std::array<std::array<double, 3>, 3>& a) {
  auto sym = [&](int i, int j) { return 0.5 * (a[i][j] + a[j][i]); };
  return {a[0][0], sym(0, 1), sym(0, 2), a[1][1], sym(1, 2), a[2][2]};
}

double VoigtMatrix::operator()(int i, int j) const {
  static constexpr int index[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return m_[static_cast<std::size_t>(index[i][j])];
}

std::array<std::array<double, 3>, 3> VoigtMatrix::full() const {
  std::array<std::array<double, 3>, 3> a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = (*this)(i, j);
  }
  return a;
}

double VoigtMatrix::determinant() const {
  const auto& [a, b, c, d, e, f] = m_;
  return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

double VoigtMatrix::norm() const {
  const auto& [a, b, c, d, e, f] = m_;
  return std::sqrt(a * a + d * d + f * f + 2.0 * (b * b + c * c + e * e));
}

double VoigtMatrix::max_abs() const {
  double r = 0.0;
  for (double v : m_) r = std::max(r, std::abs(v));
  return r;
}

Voigt3 VoigtMatrix::operator*(const Voigt3& v) const {
  Voigt3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r[i] += (*this)(i, j) * v[j];
  }
  return r;
}

VoigtMatrix& VoigtMatrix::operator+=(const VoigtMatrix& o) {
  for (std::size_t k = 0; k < 6; ++k) m_[k] += o.m_[k];
  return *this;
}

VoigtMatrix& VoigtMatrix::operator-=(const VoigtMatrix& o) {
  for (std::size_t k = 0; k < 6; ++k) m_[k] -= o.m_[k];
  return *this;
}

VoigtMatrix& VoigtMatrix::operator*=(double s) {
  for (double& v : m_) v *= s;
  return *this;
}

VoigtMatrix isotropic_stiffness(const IsotropicModuli& m) {
  const double k = m.bulk();
  const double g = m.shear();
  return {k + g, k - g, 0.0, k + g, 0.0, g};
}

VoigtMatrix isotropic_compliance(const IsotropicModuli& m) {
  const double diag = 0.25 * m.compliance_sum();
  const double off = diag - 0.5 / m.shear();
  return {diag, off, 0.0, diag, 0.0, 1.0 / m.shear()};
}

VoigtMatrix invert(const VoigtMatrix& m, double rel_tol) {
  const double det = m.determinant();
  const double scale = m.norm();
  if (!(std::abs(det) > rel_tol * scale * scale * scale)) {
    throw SingularMatrixError("matrix is singular (det = " + fmt(det) + ")", det);
  }
  const auto& [a, b, c, d, e, f] = m.entries();
  const double inv = 1.0 / det;
  return {(d * f - e * e) * inv, (c * e - b * f) * inv, (b * e - c * d) * inv,
          (a * f - c * c) * inv, (b * c - a * e) * inv, (a * d - b * b) * inv};
}

bool is_positive_definite(const VoigtMatrix& m, double tol) {
  const double s = m.norm();
  const double m1 = m.entry(1);
  const double m2 = m.entry(1) * m.entry(4) - m.entry(2) * m.entry(2);
  const double m3 = m.determinant();
  return m1 > tol * s && m2 > tol * s * s && m3 > tol * s * s * s;
}

std::array<double, 3> eigenvalues(const VoigtMatrix& m) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = m(i, j);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  return {ev(0), ev(1), ev(2)};
}

std::string to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::isotropic: return "isotropic";
    case SymmetryClass::square: return "square";
    case SymmetryClass::orthotropic: return "orthotropic";
    case SymmetryClass::triclinic: return "triclinic";
  }
  return "unknown";
}

SymmetryClass classify_symmetry(const VoigtMatrix& m, double tol, VoigtForm form) {
  const double eps = tol * m.max_abs();
  const bool no_coupling = std::abs(m.entry(3)) <= eps && std::abs(m.entry(5)) <= eps;
  if (!no_coupling) return SymmetryClass::triclinic;
  if (std::abs(m.entry(1) - m.entry(4)) > eps) return SymmetryClass::orthotropic;
  const double shear_term = form == VoigtForm::stiffness ? 2.0 * m.entry(6) : 0.5 * m.entry(6);
  if (std::abs(m.entry(1) - m.entry(2) - shear_term) <= eps) return SymmetryClass::isotropic;
  return SymmetryClass::square;
}

GeometricModulus homogeneous_geometric_modulus() {
  return {VoigtMatrix(0.25, 0.25, 0.0, 0.25, 0.0, 0.0)};
}

GeometricModulus extract_D(const VoigtMatrix& compliance, const IsotropicModuli& m,
                           const VoigtMatrix& shift) {
  const double k = m.bulk();
  const double g = m.shear();
  return {(k * g / (k + g)) * (compliance - (1.0 / g) * shift)};
}

VoigtMatrix reconstruct_compliance(const GeometricModulus& d, const IsotropicModuli& m) {
  return m.compliance_sum() * d.D + (1.0 / m.shear()) * shift_matrix();
}

bool DInequalityReport::all_hold() const {
  return d_psd && d_plus_e_psd &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.holds; });
}

DInequalityReport check_d_inequalities(const GeometricModulus& d, double tol) {
  const double d1111 = d.d1111();
  const double d2222 = d.d2222();
  const double d1122 = d.d1122();
  const double d1112 = d.d1112();
  const double d2212 = d.d2212();
  const double d1212 = d.d1212();

  DInequalityReport report;
  auto add = [&](std::string expr, double margin, bool strict) {
    const bool ok = strict ? margin > 0.0 : margin >= -tol;
    report.checks.push_back({std::move(expr), margin, strict, ok});
  };
  add("d1111 > 0", d1111, true);
  add("d2222 > 0", d2222, true);
  add("d1212 >= 0", d1212, false);
  add("d1111 + 2 d1122 + d2222 > 0", d1111 + 2.0 * d1122 + d2222, true);
  add("d1111 - 2 d1122 + d2222 >= 0", d1111 - 2.0 * d1122 + d2222, false);
  add("d2222 + 4 d2212 + 4 d1212 >= 0", d2222 + 4.0 * d2212 + 4.0 * d1212, false);
  add("d2222 - 4 d2212 + 4 d1212 >= 0", d2222 - 4.0 * d2212 + 4.0 * d1212, false);
  add("d1111 + 4 d1112 + 4 d1212 >= 0", d1111 + 4.0 * d1112 + 4.0 * d1212, false);
  add("d1111 - 4 d1112 + 4 d1212 >= 0", d1111 - 4.0 * d1112 + 4.0 * d1212, false);

  report.d_eigenvalues = eigenvalues(d.D);
  report.d_plus_e_eigenvalues = eigenvalues(d.D + shift_matrix());
  const double scale = std::max(1.0, d.D.max_abs());
  report.d_psd = report.d_eigenvalues[0] >= -tol * scale;
  report.d_plus_e_psd = report.d_plus_e_eigenvalues[0] >= -tol * scale;
  return report;
}

VigdergauzConstants vigdergauz_constants(const VoigtMatrix& compliance, const IsotropicModuli& m,
                                         double tol) {
  const SymmetryClass cls = classify_symmetry(compliance, tol, VoigtForm::compliance);
  if (cls != SymmetryClass::square && cls != SymmetryClass::isotropic) {
    throw ClassificationError("effective compliance is " + to_string(cls) +
                              ", square symmetry required");
  }
  const double c1 = 0.5 * (compliance.entry(1) + compliance.entry(4));
  const double c2 = compliance.entry(2);
  const double c6 = compliance.entry(6);
  const double inv_bulk = 2.0 * (c1 + c2);
  const double inv_shear = 2.0 * (c1 - c2);
  if (!(inv_bulk > 0.0 && inv_shear > 0.0 && c6 > 0.0)) {
    throw DefinitenessError("effective moduli K*, G*, G*45 must be positive (1/K* = " +
                            fmt(inv_bulk) + ", 1/G* = " + fmt(inv_shear) +
                            ", 1/G*45 = " + fmt(c6) + ")");
  }
  const double s = m.compliance_sum();
  VigdergauzConstants a;
  a.bulk_eff = 1.0 / inv_bulk;
  a.shear_eff = 1.0 / inv_shear;
  a.shear45_eff = 1.0 / c6;
  a.a1 = (inv_bulk - 1.0 / m.bulk()) / s;
  a.a2 = (inv_shear - 1.0 / m.shear()) / s;
  a.a3 = (c6 - 1.0 / m.shear()) / s;
  return a;
}

GeometricModulus dna_relations(double a1, double a2, double a3) {
  const double d1 = (1.0 + a1 + a2) / 4.0;
  const double d2 = (1.0 + a1 - a2) / 4.0;
  return {VoigtMatrix(d1, d2, 0.0, d1, 0.0, a3)};
}

IsotropicModuli clm_shift(const IsotropicModuli& m, double rho) {
  const double inv_k = 1.0 / m.bulk();
  const double inv_g = 1.0 / m.shear();
  if (!(rho > -inv_k && rho < inv_g)) {
    throw DomainError("shift rho = " + fmt(rho) + " outside the admissible interval (" +
                      fmt(-inv_k) + ", " + fmt(inv_g) + ")");
  }
  return {1.0 / (inv_k + rho), 1.0 / (inv_g - rho)};
}

EffectiveGradients effective_gradients(double a1, double a2, double a3, const IsotropicModuli& m) {
  const double k = m.bulk();
  const double g = m.shear();
  auto grad = [&](double p, double q) -> std::array<double, 2> {
    const double w = q * k + p * g;
    return {p * g * g / (w * w), q * k * k / (w * w)};
  };
  return {grad(1.0 + a1, a1), grad(a2, 1.0 + a2), grad(a3, 1.0 + a3)};
}

std::array<double, 3> effective_moduli_from_constants(double a1, double a2, double a3,
                                                      const IsotropicModuli& m) {
  const double s = m.compliance_sum();
  return {1.0 / (1.0 / m.bulk() + a1 * s), 1.0 / (1.0 / m.shear() + a2 * s),
          1.0 / (1.0 / m.shear() + a3 * s)};
}

}  // namespace cellhom

#pragma once

// Planar elasticity tensors in contracted (Voigt) notation.
//
// Convention used everywhere in cellhom:
//   stress vector  (s11, s22, s12)
//   strain vector  (e11, e22, 2 e12)      (engineering shear)
//   compliance maps stress -> strain, stiffness is its inverse.
// Contracted entries of a fourth-order tensor c:
//   M1 = c1111, M2 = c1122, M3 = 2 c1112, M4 = c2222, M5 = 2 c2212, M6 = 4 c1212.
//
// The geometric modulus D is defined through
//   C* = (1/K + 1/G) D + (1/G) E,   E = [[0, -1/2, 0], [-1/2, 0, 0], [0, 0, 1]].
// In tensor form this is c* = c1111 d + c1212 e with e1122 = -2, e1212 = 1.
// (The normalization "e1212 = -2 e1122 = 1" would give e1122 = -1/2, which is
// not consistent with E under the contraction above; see docs/conventions.md.)

#include <array>
#include <string>
#include <vector>

namespace cellhom {

enum class PlanarModel { plane_stress, plane_strain };

/// Isotropic planar moduli: planar bulk modulus K and shear modulus G.
class IsotropicModuli {
 public:
  /// Throws DomainError unless both moduli are positive and finite.
  IsotropicModuli(double bulk, double shear);

  double bulk() const { return bulk_; }
  double shear() const { return shear_; }

  /// Three-dimensional bulk modulus k = K - G/3.
  double bulk_3d() const { return bulk_ - shear_ / 3.0; }
  double lame_mu() const { return shear_; }
  double lame_lambda() const { return bulk_ - shear_; }

  /// 1/K + 1/G, the factor multiplying D.
  double compliance_sum() const { return 1.0 / bulk_ + 1.0 / shear_; }

  friend bool operator==(const IsotropicModuli&, const IsotropicModuli&) = default;

 private:
  double bulk_;
  double shear_;
};

/// K and G from Young's modulus and Poisson's ratio under the given planar model.
IsotropicModuli moduli_from_engineering(double young, double poisson, PlanarModel model);

using Voigt3 = std::array<double, 3>;

/// Symmetric 3x3 matrix stored as its six contracted entries
/// [[M1, M2, M3], [M2, M4, M5], [M3, M5, M6]].
class VoigtMatrix {
 public:
  constexpr VoigtMatrix() = default;
  constexpr VoigtMatrix(double m1, double m2, double m3, double m4, double m5, double m6)
      : m_{m1, m2, m3, m4, m5, m6} {}

  /// Symmetric part of a full 3x3 matrix.
  static VoigtMatrix from_full(const std::array<std::array<double, 3>, 3>& a);
  static constexpr VoigtMatrix identity() { return {1, 0, 0, 1, 0, 1}; }

  /// Contracted entry M_k, k in 1..6.
  double entry(int k) const { return m_.at(static_cast<std::size_t>(k - 1)); }
  double& entry(int k) { return m_.at(static_cast<std::size_t>(k - 1)); }
  /// Row/column access, 0-based.
  double operator()(int i, int j) const;
  const std::array<double, 6>& entries() const { return m_; }
  std::array<std::array<double, 3>, 3> full() const;

  double determinant() const;
  /// Frobenius norm of the full 3x3 matrix.
  double norm() const;
  double max_abs() const;

  Voigt3 operator*(const Voigt3& v) const;
  VoigtMatrix& operator+=(const VoigtMatrix& o);
  VoigtMatrix& operator-=(const VoigtMatrix& o);
  VoigtMatrix& operator*=(double s);

  friend VoigtMatrix operator+(VoigtMatrix a, const VoigtMatrix& b) { return a += b; }
  friend VoigtMatrix operator-(VoigtMatrix a, const VoigtMatrix& b) { return a -= b; }
  friend VoigtMatrix operator*(VoigtMatrix a, double s) { return a *= s; }
  friend VoigtMatrix operator*(double s, VoigtMatrix a) { return a *= s; }
  friend bool operator==(const VoigtMatrix&, const VoigtMatrix&) = default;

 private:
  std::array<double, 6> m_{};
};

/// The constant matrix E = [[0, -1/2, 0], [-1/2, 0, 0], [0, 0, 1]].
constexpr VoigtMatrix shift_matrix() { return {0.0, -0.5, 0.0, 0.0, 0.0, 1.0}; }

/// [[K+G, K-G, 0], [K-G, K+G, 0], [0, 0, G]].
VoigtMatrix isotropic_stiffness(const IsotropicModuli& m);
/// Closed-form inverse of isotropic_stiffness.
VoigtMatrix isotropic_compliance(const IsotropicModuli& m);

/// Exact inverse. Throws SingularMatrixError when |det| <= rel_tol * ||M||^3.
VoigtMatrix invert(const VoigtMatrix& m, double rel_tol = 1e-12);

/// All leading principal minors exceed tol * ||M||^k.
bool is_positive_definite(const VoigtMatrix& m, double tol = 1e-12);

/// Eigenvalues of the symmetric matrix, ascending.
std::array<double, 3> eigenvalues(const VoigtMatrix& m);

enum class SymmetryClass { isotropic, square, orthotropic, triclinic };
enum class VoigtForm { stiffness, compliance };

std::string to_string(SymmetryClass c);

/// Most specific class whose defining equalities hold within tol * max|M|.
/// Isotropy is M1 = M2 + 2 M6 for stiffness and M1 = M2 + M6 / 2 for compliance.
SymmetryClass classify_symmetry(const VoigtMatrix& m, double tol = 1e-8,
                                VoigtForm form = VoigtForm::stiffness);

/// Geometric modulus D; dimensionless and independent of K, G.
struct GeometricModulus {
  VoigtMatrix D;

  double d1111() const { return 4.0 * D.entry(1); }
  double d2222() const { return 4.0 * D.entry(4); }
  double d1122() const { return 4.0 * D.entry(2); }
  double d1112() const { return 2.0 * D.entry(3); }
  double d2212() const { return 2.0 * D.entry(5); }
  double d1212() const { return D.entry(6); }
};

/// D of a perforated-cell-free (homogeneous) material: [[1/4,1/4,0],[1/4,1/4,0],[0,0,0]].
GeometricModulus homogeneous_geometric_modulus();

/// D = KG/(K+G) (C* - E/G). `shift` replaces E (used by mutation tests only).
GeometricModulus extract_D(const VoigtMatrix& compliance, const IsotropicModuli& m,
                           const VoigtMatrix& shift = shift_matrix());

/// C* = (1/K + 1/G) D + E/G.
VoigtMatrix reconstruct_compliance(const GeometricModulus& d, const IsotropicModuli& m);

struct InequalityCheck {
  std::string expression;
  double margin;
  bool strict;
  bool holds;
};

struct DInequalityReport {
  std::vector<InequalityCheck> checks;
  std::array<double, 3> d_eigenvalues{};
  std::array<double, 3> d_plus_e_eigenvalues{};
  bool d_psd = false;
  bool d_plus_e_psd = false;

  bool all_hold() const;
};

/// Sign conditions on d implied by positive definiteness of the effective tensor.
DInequalityReport check_d_inequalities(const GeometricModulus& d, double tol = 1e-10);

struct VigdergauzConstants {
  double a1 = 0, a2 = 0, a3 = 0;
  double bulk_eff = 0;      // K*
  double shear_eff = 0;     // G*
  double shear45_eff = 0;   // G*_45
};

/// Solves 1/K* = 1/K + A1 s, 1/G* = 1/G + A2 s, 1/G*45 = 1/G + A3 s with s = 1/K + 1/G.
/// Requires a square-symmetric compliance (ClassificationError) with positive
/// effective moduli (DefinitenessError).
VigdergauzConstants vigdergauz_constants(const VoigtMatrix& compliance, const IsotropicModuli& m,
                                         double tol = 1e-8);

/// D1 = D4 = (1+A1+A2)/4, D2 = (1+A1-A2)/4, D3 = D5 = 0, D6 = A3.
GeometricModulus dna_relations(double a1, double a2, double a3);

/// (1/K, 1/G) -> (1/K + rho, 1/G - rho); requires -1/K < rho < 1/G.
IsotropicModuli clm_shift(const IsotropicModuli& m, double rho);

struct EffectiveGradients {
  std::array<double, 2> bulk;     // d K* / d(K, G)
  std::array<double, 2> shear;    // d G* / d(K, G)
  std::array<double, 2> shear45;  // d G*45 / d(K, G)
};

/// Gradients of the square-symmetric effective moduli with respect to (K, G),
/// g(p, q) = (qK + pG)^-2 (p G^2, q K^2).
EffectiveGradients effective_gradients(double a1, double a2, double a3, const IsotropicModuli& m);

/// Effective moduli (K*, G*, G*45) given the constants; inverse of vigdergauz_constants.
std::array<double, 3> effective_moduli_from_constants(double a1, double a2, double a3,
                                                      const IsotropicModuli& m);

}  // namespace cellhom

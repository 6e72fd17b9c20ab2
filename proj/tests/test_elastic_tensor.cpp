#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cellhom/elastic_tensor.hpp"
#include "cellhom/errors.hpp"

using namespace cellhom;

namespace {

void expect_matrix_near(const VoigtMatrix& a, const VoigtMatrix& b, double tol) {
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(a.entry(k), b.entry(k), tol) << "entry " << k;
}

// Compliance of the published stiffness column nu = 0.3, E = 1, plane strain.
VoigtMatrix table_column_compliance() { return invert(VoigtMatrix(0.970, 0.382, 0.0, 1.034, 0.0, 0.268)); }

}  // namespace

TEST(IsotropicModuli, RejectsNonPositive) {
  EXPECT_THROW(IsotropicModuli(0.0, 1.0), DomainError);
  EXPECT_THROW(IsotropicModuli(1.0, -1.0), DomainError);
  EXPECT_THROW(IsotropicModuli(std::nan(""), 1.0), DomainError);
}

TEST(IsotropicModuli, EngineeringConversion) {
  // plane strain: K = E / (2 (1 + nu)(1 - 2 nu)), G = E / (2 (1 + nu))
  const IsotropicModuli ps = moduli_from_engineering(1.0, 0.3, PlanarModel::plane_strain);
  EXPECT_NEAR(ps.bulk(), 1.0 / (2.0 * 1.3 * 0.4), 1e-15);
  EXPECT_NEAR(ps.shear(), 1.0 / 2.6, 1e-15);
  // plane stress: K = E / (2 (1 - nu))
  const IsotropicModuli pst = moduli_from_engineering(1.0, 0.3, PlanarModel::plane_stress);
  EXPECT_NEAR(pst.bulk(), 1.0 / 1.4, 1e-15);
  EXPECT_NEAR(pst.shear(), 1.0 / 2.6, 1e-15);
  EXPECT_THROW(moduli_from_engineering(1.0, 0.5, PlanarModel::plane_strain), DomainError);
  EXPECT_THROW(moduli_from_engineering(-1.0, 0.3, PlanarModel::plane_stress), DomainError);
}

TEST(IsotropicStiffness, ClosedForms) {
  expect_matrix_near(isotropic_stiffness(IsotropicModuli(1.0, 0.5)), VoigtMatrix(1.5, 0.5, 0, 1.5, 0, 0.5), 1e-15);
  expect_matrix_near(invert(isotropic_stiffness(IsotropicModuli(0.5, 0.5))), VoigtMatrix(1, 0, 0, 1, 0, 2), 1e-15);
}

TEST(Invert, Examples) {
  expect_matrix_near(invert(VoigtMatrix::identity()), VoigtMatrix::identity(), 1e-15);
  expect_matrix_near(invert(VoigtMatrix(2, 0, 0, 2, 0, 4)), VoigtMatrix(0.5, 0, 0, 0.5, 0, 0.25), 1e-15);
  const IsotropicModuli m(1.0, 0.5);
  expect_matrix_near(invert(isotropic_stiffness(m)), isotropic_compliance(m), 1e-14);
}

TEST(Invert, SingularCarriesDeterminant) {
  try {
    invert(VoigtMatrix(1, 1, 0, 1, 0, 1));
    FAIL() << "expected SingularMatrixError";
  } catch (const SingularMatrixError& e) {
    EXPECT_NEAR(e.determinant(), 0.0, 1e-15);
  }
}

TEST(Invert, RoundTripRandom) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 20.0);
  for (int i = 0; i < 50; ++i) {
    const IsotropicModuli m(u(rng), u(rng));
    const VoigtMatrix b = isotropic_stiffness(m);
    const VoigtMatrix c = invert(b);
    const VoigtMatrix closed = isotropic_compliance(m);
    for (int k = 1; k <= 6; ++k) {
      EXPECT_NEAR(c.entry(k), closed.entry(k), 1e-12 * closed.max_abs());
    }
    expect_matrix_near(invert(c), b, 1e-12 * b.max_abs());
  }
}

TEST(PositiveDefinite, Examples) {
  EXPECT_TRUE(is_positive_definite(VoigtMatrix::identity()));
  EXPECT_FALSE(is_positive_definite(VoigtMatrix(1, 2, 0, 1, 0, 1)));
  EXPECT_FALSE(is_positive_definite(shift_matrix()));
}

TEST(ClassifySymmetry, Examples) {
  EXPECT_EQ(classify_symmetry(isotropic_stiffness(IsotropicModuli(1.0, 0.5))), SymmetryClass::isotropic);
  EXPECT_EQ(classify_symmetry(VoigtMatrix(2, 1, 0, 2, 0, 0.3)), SymmetryClass::square);
  EXPECT_EQ(classify_symmetry(VoigtMatrix(2, 1, 0.1, 2, 0, 0.3), 1e-6), SymmetryClass::triclinic);
  EXPECT_EQ(classify_symmetry(VoigtMatrix(2, 1, 0, 3, 0, 0.3)), SymmetryClass::orthotropic);
  const IsotropicModuli m(1.3, 0.4);
  EXPECT_EQ(classify_symmetry(isotropic_compliance(m), 1e-8, VoigtForm::compliance), SymmetryClass::isotropic);
}

TEST(GeometricModulus, HomogeneousFromAnyModuli) {
  for (const auto& m : {IsotropicModuli(1.0, 1.0), IsotropicModuli(0.2, 7.0), IsotropicModuli(5.0, 0.3)}) {
    const GeometricModulus d = extract_D(isotropic_compliance(m), m);
    expect_matrix_near(d.D, homogeneous_geometric_modulus().D, 1e-14);
  }
}

TEST(GeometricModulus, FromPublishedStiffnessColumn) {
  const IsotropicModuli m = moduli_from_engineering(1.0, 0.3, PlanarModel::plane_strain);
  const GeometricModulus d = extract_D(table_column_compliance(), m);
  // The stiffness entries carry three truncated decimals, enough for 1% in D.
  EXPECT_NEAR(d.D.entry(1), 0.33123, 0.01 * 0.33123);
  EXPECT_NEAR(d.D.entry(2), 0.23466, 0.01 * 0.23466);
  EXPECT_NEAR(d.D.entry(4), 0.31078, 0.01 * 0.31078);
  EXPECT_NEAR(d.D.entry(6), 0.30835, 0.01 * 0.30835);
}

TEST(GeometricModulus, ReconstructRoundTrip) {
  const IsotropicModuli m(0.7, 2.1);
  const VoigtMatrix c = table_column_compliance();
  expect_matrix_near(reconstruct_compliance(extract_D(c, m), m), c, 1e-12);
  const GeometricModulus d{VoigtMatrix(0.33, 0.23, 0.01, 0.31, -0.02, 0.3)};
  expect_matrix_near(extract_D(reconstruct_compliance(d, m), m).D, d.D, 1e-12);
}

TEST(GeometricModulus, TensorComponents) {
  const GeometricModulus h = homogeneous_geometric_modulus();
  EXPECT_DOUBLE_EQ(h.d1111(), 1.0);
  EXPECT_DOUBLE_EQ(h.d1122(), 1.0);
  EXPECT_DOUBLE_EQ(h.d2222(), 1.0);
  EXPECT_DOUBLE_EQ(h.d1212(), 0.0);
}

TEST(DInequalities, HomogeneousHoldsOnBoundary) {
  const DInequalityReport r = check_d_inequalities(homogeneous_geometric_modulus());
  EXPECT_TRUE(r.all_hold());
  EXPECT_EQ(r.checks.size(), 9u);  // d1111 > 0 and d2222 > 0 are listed together
  EXPECT_TRUE(r.d_psd);
  EXPECT_TRUE(r.d_plus_e_psd);
  for (const auto& c : r.checks) {
    if (c.expression == "d1111 - 2 d1122 + d2222 >= 0" || c.expression == "d1212 >= 0") {
      EXPECT_NEAR(c.margin, 0.0, 1e-15) << c.expression;
    }
  }
}

TEST(DInequalities, PublishedValuesStrict) {
  const GeometricModulus d{VoigtMatrix(0.33123, 0.23466, 0.0, 0.31078, 0.0, 0.30835)};
  const DInequalityReport r = check_d_inequalities(d);
  EXPECT_TRUE(r.all_hold());
  for (const auto& c : r.checks) {
    if (c.strict) {
      EXPECT_GT(c.margin, 0.0) << c.expression;
    }
  }
}

TEST(DInequalities, NegativeD1Reported) {
  const GeometricModulus d{VoigtMatrix(-0.1, 0.0, 0.0, 0.3, 0.0, 0.3)};
  const DInequalityReport r = check_d_inequalities(d);
  EXPECT_FALSE(r.all_hold());
  bool found = false;
  for (const auto& c : r.checks) {
    if (c.expression == "d1111 > 0") {
      found = true;
      EXPECT_FALSE(c.holds);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Vigdergauz, LocalComplianceGivesZero) {
  const IsotropicModuli m(1.4, 0.6);
  const VigdergauzConstants a = vigdergauz_constants(isotropic_compliance(m), m);
  EXPECT_NEAR(a.a1, 0.0, 1e-14);
  EXPECT_NEAR(a.a2, 0.0, 1e-14);
  EXPECT_NEAR(a.a3, 0.0, 1e-14);
  EXPECT_NEAR(a.bulk_eff, 1.4, 1e-14);
  EXPECT_NEAR(a.shear_eff, 0.6, 1e-14);
}

TEST(Vigdergauz, SquareExampleRecoversConstants) {
  // C* = 4 D + 2 E = [[1.2, -0.2, 0], [-0.2, 1.2, 0], [0, 0, 3]]:
  // 1/K* = 2 (C1 + C2) = 2 = 2 + 4 A1, 1/G* = 2 (C1 - C2) = 2.8 = 2 + 4 A2, 1/G*45 = C6 = 3 = 2 + 4 A3.
  const IsotropicModuli m(0.5, 0.5);
  const GeometricModulus d{VoigtMatrix(0.3, 0.2, 0.0, 0.3, 0.0, 0.25)};
  const VoigtMatrix c = reconstruct_compliance(d, m);
  expect_matrix_near(c, VoigtMatrix(1.2, -0.2, 0, 1.2, 0, 3), 1e-14);
  const VigdergauzConstants a = vigdergauz_constants(c, m);
  EXPECT_NEAR(a.a1, 0.0, 1e-14);
  EXPECT_NEAR(a.a2, 0.2, 1e-14);
  EXPECT_NEAR(a.a3, 0.25, 1e-14);
  expect_matrix_near(dna_relations(a.a1, a.a2, a.a3).D, d.D, 1e-12);
}

TEST(Vigdergauz, Errors) {
  const IsotropicModuli m(1.0, 1.0);
  EXPECT_THROW(vigdergauz_constants(VoigtMatrix(1, 0, 0, 2, 0, 1), m), ClassificationError);
  EXPECT_THROW(vigdergauz_constants(VoigtMatrix(1, -1.5, 0, 1, 0, 1), m), DefinitenessError);
}

TEST(Vigdergauz, IsotropicEffectiveMakesA3EqualA2) {
  // D6 = 2 (D1 - D2) is the isotropy condition; dna then gives A3 = A2.
  const double a1 = 0.15, a2 = 0.35;
  GeometricModulus d = dna_relations(a1, a2, 0.0);
  d.D.entry(6) = 2.0 * (d.D.entry(1) - d.D.entry(2));
  const IsotropicModuli m(1.0, 0.8);
  const VigdergauzConstants a = vigdergauz_constants(reconstruct_compliance(d, m), m);
  EXPECT_NEAR(a.a3, a.a2, 1e-12);
  EXPECT_EQ(classify_symmetry(reconstruct_compliance(d, m), 1e-8, VoigtForm::compliance), SymmetryClass::isotropic);
}

TEST(Dna, Examples) {
  expect_matrix_near(dna_relations(0, 0, 0).D, homogeneous_geometric_modulus().D, 1e-15);
  expect_matrix_near(dna_relations(0.2, 0.2, 0.25).D, VoigtMatrix(0.35, 0.25, 0, 0.35, 0, 0.25), 1e-15);
}

TEST(Dna, PublishedValuesRoundTrip) {
  // Square-symmetrized published D: D1 = D4 imposed by averaging.
  const double d1 = 0.5 * (0.33123 + 0.31078);
  const GeometricModulus d{VoigtMatrix(d1, 0.23466, 0.0, d1, 0.0, 0.30835)};
  const IsotropicModuli m(1.0, 1.0);
  const VigdergauzConstants a = vigdergauz_constants(reconstruct_compliance(d, m), m);
  expect_matrix_near(dna_relations(a.a1, a.a2, a.a3).D, d.D, 1e-12);
}

TEST(ClmShift, Examples) {
  const IsotropicModuli same = clm_shift(IsotropicModuli(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(same.bulk(), 1.0);
  EXPECT_DOUBLE_EQ(same.shear(), 1.0);
  const IsotropicModuli s = clm_shift(IsotropicModuli(1.0, 1.0), 0.5);
  EXPECT_NEAR(s.bulk(), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.shear(), 2.0, 1e-15);
  EXPECT_THROW(clm_shift(IsotropicModuli(1.0, 1.0), 1.0), DomainError);
  EXPECT_THROW(clm_shift(IsotropicModuli(1.0, 1.0), -1.0), DomainError);
}

TEST(ClmShift, PreservesComplianceSum) {
  const IsotropicModuli m(0.8, 1.7);
  for (double rho : {-1.2, -0.3, 0.1, 0.55}) {
    EXPECT_NEAR(clm_shift(m, rho).compliance_sum(), m.compliance_sum(), 1e-14);
  }
}

TEST(EffectiveGradients, HomogeneousExamples) {
  const IsotropicModuli m(1.3, 0.7);
  const EffectiveGradients g = effective_gradients(0, 0, 0, m);
  EXPECT_NEAR(g.bulk[0], 1.0, 1e-15);
  EXPECT_NEAR(g.bulk[1], 0.0, 1e-15);
  EXPECT_NEAR(g.shear[0], 0.0, 1e-15);
  EXPECT_NEAR(g.shear[1], 1.0, 1e-15);
}

TEST(EffectiveGradients, FrozenValueAtA1) {
  // 1/K* = 1.2/K + 0.2/G at K = G = 1 gives K* = 1/1.4 and
  // dK*/dK = 1.2 K*^2 = 0.6122449, dK*/dG = 0.2 K*^2 = 0.1020408 (finite differences agree).
  const EffectiveGradients g = effective_gradients(0.2, 0.0, 0.0, IsotropicModuli(1.0, 1.0));
  EXPECT_NEAR(g.bulk[0], 1.2 / 1.96, 1e-14);
  EXPECT_NEAR(g.bulk[1], 0.2 / 1.96, 1e-14);
}

TEST(EffectiveGradients, MatchFiniteDifferences) {
  const double a1 = 0.31, a2 = 0.52, a3 = 0.27;
  const double step = 1e-5;
  for (const auto& m : {IsotropicModuli(1.0, 1.0), IsotropicModuli(2.5, 0.4), IsotropicModuli(0.3, 3.0)}) {
    const EffectiveGradients g = effective_gradients(a1, a2, a3, m);
    const std::array<std::array<double, 2>, 3> analytic{g.bulk, g.shear, g.shear45};
    for (int p = 0; p < 2; ++p) {
      const double hk = p == 0 ? step * m.bulk() : 0.0;
      const double hg = p == 1 ? step * m.shear() : 0.0;
      const auto plus = effective_moduli_from_constants(a1, a2, a3, IsotropicModuli(m.bulk() + hk, m.shear() + hg));
      const auto minus = effective_moduli_from_constants(a1, a2, a3, IsotropicModuli(m.bulk() - hk, m.shear() - hg));
      for (int q = 0; q < 3; ++q) {
        const double fd = (plus[q] - minus[q]) / (2.0 * (hk + hg));
        EXPECT_NEAR(analytic[q][p], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        EXPECT_GE(analytic[q][p], 0.0);
      }
    }
  }
}

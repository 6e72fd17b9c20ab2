#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cellhom/elastic_tensor.hpp"
#include "cellhom/fem.hpp"
#include "cellhom/geometry.hpp"
#include "cellhom/mesh.hpp"

namespace cellhom {

/// Concurrent solves allowed: CELLHOM_THREADS when set to a positive integer,
/// otherwise the hardware concurrency.
int worker_threads();

struct HomogOptions {
  BcMode bc = BcMode::periodic;
  SolverOptions solver;
  /// Also run the K = G = 1/2 problems and evaluate the closed-form D.
  bool geomrepr = false;
  /// Keep the three basis solutions in the result.
  bool keep_solutions = true;
};

struct HomogDiagnostics {
  double asymmetry = 0.0;           // max |B_ij - B_ji| / max |B|
  double energy_discrepancy = 0.0;  // max |B_energy - B| / max |B|
  double galerkin_residual = 0.0;   // max |E_ij - xi_i . sigma_j| / max |B|
  double max_solver_residual = 0.0;
  int max_iterations = 0;
  int reduced_dofs = 0;
  double seconds = 0.0;
  QualityReport mesh;
};

/// Closed-form D from the averages of the three basis solutions at K = G = 1/2.
struct GeomreprResult {
  double mu = 0.0;
  GeometricModulus d;        // resolved D6
  double d6_printed = 0.0;   // D6 with the sign pattern as usually stated
  GeometricModulus direct;   // extract_D of the same solutions
  std::array<double, 6> discrepancy{};  // per entry, relative with absolute fallback below 1e-6
  double max_discrepancy = 0.0;
};

/// a, b, c are the average stresses of the solutions with average strain (1,0,0),
/// (0,1,0), (0,0,1). Throws SingularMatrixError when |mu| < 1e-12.
GeomreprResult geomrepr_from_averages(const Voigt3& a, const Voigt3& b, const Voigt3& c);

struct EffectiveResult {
  std::array<std::array<double, 3>, 3> stiffness_raw{};  // column j = average stress of basis j
  VoigtMatrix stiffness;         // symmetric part of stiffness_raw
  VoigtMatrix stiffness_energy;  // from the six average energies
  VoigtMatrix compliance;
  bool positive_definite = false;
  SymmetryClass symmetry = SymmetryClass::triclinic;
  std::optional<IsotropicModuli> moduli;  // set for uniform materials
  std::optional<GeometricModulus> d;         // from the stress-route compliance
  std::optional<GeometricModulus> d_energy;  // from the energy-route compliance
  std::optional<GeomreprResult> geomrepr;
  std::optional<DInequalityReport> inequalities;
  std::optional<VigdergauzConstants> vigdergauz;
  std::vector<std::string> warnings;
  HomogDiagnostics diagnostics;
  std::vector<CellSolution> basis;  // empty unless keep_solutions
};

EffectiveResult effective_stiffness(const Mesh& mesh, const MaterialField& material,
                                    const HomogOptions& options = {});
EffectiveResult effective_stiffness(const CellGeometry& g, const MaterialField& material, int n,
                                    const HomogOptions& options = {});

GeomreprResult extract_D_geomrepr(const Mesh& mesh, const HomogOptions& options = {});

/// (max - min) / |mean|, or max - min when |mean| < 1e-6.
double spread(const std::vector<double>& values);

struct SweepEntry {
  IsotropicModuli moduli;
  VoigtMatrix stiffness;
  VoigtMatrix compliance;
  std::optional<GeometricModulus> d;
  bool positive_definite = false;
  std::vector<std::string> warnings;
  HomogDiagnostics diagnostics;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::array<double, 6> d_spread{};
  double max_spread = 0.0;
};

/// One effective_stiffness run per moduli entry on a shared mesh. `shift` replaces E
/// in the D extraction (mutation testing).
SweepResult moduli_sweep(const Mesh& mesh, const std::vector<IsotropicModuli>& moduli,
                         const HomogOptions& options = {},
                         const VoigtMatrix& shift = shift_matrix());

struct ClmShiftReport {
  double rho = 0.0;
  VoigtMatrix compliance_before;
  VoigtMatrix compliance_after;
  VoigtMatrix delta;
  double deviation = 0.0;  // ||delta + rho E||_F / ||C*||_F
};

/// Throws DomainError when rho is inadmissible for some phase.
ClmShiftReport clm_shift_check(const Mesh& mesh, const MaterialField& material, double rho,
                               const HomogOptions& options = {});

struct MichellReport {
  std::array<double, 3> deviation{};  // per unit average stress f_i
  double max_deviation = 0.0;
};

/// Stress fields at fixed average stress for two uniform moduli, compared in relative L2.
MichellReport michell_invariance_check(const Mesh& mesh, const IsotropicModuli& a,
                                       const IsotropicModuli& b, const HomogOptions& options = {});

struct LineIdentityPairing {
  std::string name;     // e.g. "s11/vertical"
  Line line;
  double volume = 0.0;  // integral of the stress component over the cell
  double along_line = 0.0;  // length factor times the line integral
  double relative_error = 0.0;
};

struct LineIdentityReport {
  std::vector<LineIdentityPairing> pairings;
  double max_error = 0.0;
};

/// Compares cell integrals of s11, s22, s12 with the matching line integrals along
/// clear lines. Each pairing uses the basis state whose average stress it measures.
LineIdentityReport line_identity_check(const CellGeometry& g, const Mesh& mesh,
                                       const MaterialField& material,
                                       const HomogOptions& options = {});
LineIdentityReport line_identity_check(const CellGeometry& g, const Mesh& mesh,
                                       const MaterialField& material, const Line& horizontal,
                                       const Line& vertical, const HomogOptions& options = {});

struct QuasiperiodReport {
  Quasiperiod prescribed;
  Line gamma1;  // along x1
  Line gamma2;  // along x2
  double xi11 = 0.0;
  double xi22 = 0.0;
  double xi12 = 0.0;
  double xi12_alt = 0.0;  // variant with the extra trace terms on the shifted paths
  std::array<double, 3> error{};  // (xi11, xi22, xi12) vs prescribed, scaled by max |xi|
  double max_error = 0.0;
};

/// Recovers the average strain from the stress field alone: cell averages plus
/// integrals of Tr s and its normal derivative along straight lines.
QuasiperiodReport quasiperiod_path_diagnostic(const CellGeometry& g, const Mesh& mesh,
                                              const IsotropicModuli& moduli, const Quasiperiod& xi,
                                              const HomogOptions& options = {});

struct SquareSymmetryReport {
  VigdergauzConstants constants;
  GeometricModulus from_constants;
  double dna_residual = 0.0;  // max |D(A) - D|
  bool isotropic = false;     // D6 = 2 (D1 - D2)
  double isotropy_gap = 0.0;
  EffectiveGradients gradients;
};

/// Throws ClassificationError when the compliance is not square-symmetric and
/// ValidationError when the result carries no uniform moduli.
SquareSymmetryReport square_symmetry_report(const EffectiveResult& result, double tol = 1e-6);

struct LoewnerReport {
  VoigtMatrix periodic;
  VoigtMatrix dirichlet;
  std::array<double, 3> difference_eigenvalues{};  // of dirichlet - periodic, ascending
  double min_relative = 0.0;  // smallest eigenvalue / ||periodic||
  double relative_gap = 0.0;  // ||dirichlet - periodic|| / ||periodic||
};

LoewnerReport loewner_check(const Mesh& mesh, const MaterialField& material,
                            const SolverOptions& solver = {});

}  // namespace cellhom

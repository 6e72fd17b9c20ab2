#include "cellhom/homog.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>

#include "cellhom/errors.hpp"

namespace cellhom {

namespace {

const std::array<Quasiperiod, 3> kBasis{Quasiperiod(1, 0, 0), Quasiperiod(0, 1, 0),
                                        Quasiperiod(0, 0, 1)};

// Runs fn(0..count-1) on up to worker_threads() threads; the first failure by index is rethrown.
void parallel_for(int count, const std::function<void(int)>& fn) {
  const int threads = std::min(worker_threads(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<CellSolution> solve_basis(const CellProblem& problem) {
  std::vector<CellSolution> out(3);
  parallel_for(3, [&](int i) { out[static_cast<std::size_t>(i)] = problem.solve(kBasis[static_cast<std::size_t>(i)]); });
  return out;
}

double relative_or_absolute(double value, double reference) {
  const double diff = std::abs(value - reference);
  return std::abs(reference) < 1e-6 ? diff : diff / std::abs(reference);
}

VoigtMatrix from_columns(const std::array<std::array<double, 3>, 3>& raw) {
  return VoigtMatrix::from_full(raw);
}

double weighted_norm2(const Voigt3& s) { return s[0] * s[0] + s[1] * s[1] + 2.0 * s[2] * s[2]; }

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("CELLHOM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

GeomreprResult geomrepr_from_averages(const Voigt3& a, const Voigt3& b, const Voigt3& c) {
  const double a11 = a[0], a22 = a[1], a12 = a[2];
  const double b22 = b[1], b12 = b[2];
  const double c12 = c[2];

  GeomreprResult r;
  const double quarter_mu = a11 * b12 * b12 - a11 * c12 * b22 + a22 * a22 * c12 + b22 * a12 * a12 -
                            2.0 * a12 * a22 * b12;
  r.mu = 4.0 * quarter_mu;
  if (std::abs(r.mu) < 1e-12) {
    throw SingularMatrixError("degenerate geometry: mu = " + std::to_string(r.mu), r.mu);
  }
  const double mu = r.mu;
  // Common tail: a11 c12 b22 - a11 b12^2 - a22^2 c12 - b22 a12^2 + 2 a12 a22 b12 = -mu / 4.
  const double d1 = (b12 * b12 - c12 * b22) / mu;
  const double d2 = (a22 * c12 - a12 * b12 - a11 * c12 * b22 + a11 * b12 * b12 + a22 * a22 * c12 +
                     b22 * a12 * a12 - 2.0 * a12 * a22 * b12) / mu;
  const double d3 = (a12 * b22 - b12 * a22) / mu;
  const double d4 = (a12 * a12 - c12 * a11) / mu;
  const double d5 = (b12 * a11 - a12 * a22) / mu;
  const double tail = -2.0 * a11 * b12 * b12 - 2.0 * a22 * a22 * c12 - 2.0 * b22 * a12 * a12 +
                      4.0 * a12 * a22 * b12;
  const double d6 = (a22 * a22 - b22 * a11 + 2.0 * a11 * c12 * b22 + tail) / mu;
  r.d6_printed = (a22 * a22 - b22 * a11 - 2.0 * a11 * c12 * b22 + tail) / mu;
  r.d.D = VoigtMatrix(d1, d2, d3, d4, d5, d6);

  const std::array<std::array<double, 3>, 3> raw{{{a[0], b[0], c[0]}, {a[1], b[1], c[1]},
                                                   {a[2], b[2], c[2]}}};
  r.direct = extract_D(invert(from_columns(raw)), IsotropicModuli(0.5, 0.5));
  for (int k = 1; k <= 6; ++k) {
    const double e = relative_or_absolute(r.d.D.entry(k), r.direct.D.entry(k));
    r.discrepancy[static_cast<std::size_t>(k - 1)] = e;
    r.max_discrepancy = std::max(r.max_discrepancy, e);
  }
  return r;
}

EffectiveResult effective_stiffness(const Mesh& mesh, const MaterialField& material,
                                    const HomogOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  material.check_regions(mesh);
  const CellProblem problem(mesh, material, options.bc, options.solver);
  std::vector<CellSolution> basis = solve_basis(problem);

  EffectiveResult r;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 3; ++i) r.stiffness_raw[i][j] = basis[j].avg_stress[i];
  }
  r.stiffness = from_columns(r.stiffness_raw);
  const double scale = r.stiffness.max_abs();

  auto& diag = r.diagnostics;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      diag.asymmetry = std::max(diag.asymmetry, std::abs(r.stiffness_raw[i][j] - r.stiffness_raw[j][i]));
    }
  }
  diag.asymmetry /= scale;

  // Average energies of the basis states and of the pairwise sums.
  std::array<std::array<double, 3>, 3> pair{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i; j < 3; ++j) {
      pair[i][j] = pair[j][i] = energy_bilinear(basis[i], basis[j], mesh, material);
      diag.galerkin_residual = std::max({diag.galerkin_residual, std::abs(pair[i][j] - r.stiffness_raw[i][j]),
                                         std::abs(pair[i][j] - r.stiffness_raw[j][i])});
    }
  }
  diag.galerkin_residual /= scale;
  auto energy = [&](std::size_t i, std::size_t j) {
    const CellSolution s = linear_combination({1.0, 1.0}, {&basis[i], &basis[j]});
    return energy_bilinear(s, s, mesh, material);
  };
  const double e11 = pair[0][0], e22 = pair[1][1], e33 = pair[2][2];
  const double e44 = energy(0, 1), e55 = energy(1, 2), e66 = energy(0, 2);
  r.stiffness_energy = VoigtMatrix(e11, 0.5 * (e44 - e11 - e22), 0.5 * (e66 - e11 - e33), e22,
                                   0.5 * (e55 - e22 - e33), e33);
  for (int k = 1; k <= 6; ++k) {
    diag.energy_discrepancy =
        std::max(diag.energy_discrepancy, std::abs(r.stiffness_energy.entry(k) - r.stiffness.entry(k)));
  }
  diag.energy_discrepancy /= scale;

  for (const auto& s : basis) {
    diag.max_solver_residual = std::max(diag.max_solver_residual, s.residual);
    diag.max_iterations = std::max(diag.max_iterations, s.iterations);
  }
  diag.reduced_dofs = problem.reduced_dofs();
  diag.mesh = quality_report(mesh);

  r.compliance = invert(r.stiffness);
  r.positive_definite = is_positive_definite(r.stiffness);
  r.symmetry = classify_symmetry(r.stiffness, 1e-6);
  if (!r.positive_definite) {
    r.warnings.push_back("effective stiffness is not positive definite; D is reported without that hypothesis");
  }

  if (material.is_uniform()) {
    const IsotropicModuli m = material.base();
    r.moduli = m;
    r.d = extract_D(r.compliance, m);
    r.d_energy = extract_D(invert(r.stiffness_energy), m);
    if (r.positive_definite) {
      r.inequalities = check_d_inequalities(*r.d);
      if (!r.inequalities->all_hold()) r.warnings.push_back("d inequalities violated");
      if (r.symmetry == SymmetryClass::square || r.symmetry == SymmetryClass::isotropic) {
        try {
          r.vigdergauz = vigdergauz_constants(r.compliance, m, 1e-6);
          for (double a : {r.vigdergauz->a1, r.vigdergauz->a2, r.vigdergauz->a3}) {
            if (a < -1e-8) {
              r.warnings.push_back("negative Vigdergauz constant " + std::to_string(a));
              break;
            }
          }
        } catch (const DefinitenessError& e) {
          r.warnings.push_back(e.what());
        }
      }
    }
  } else {
    r.warnings.push_back("material has several phases; D is not extracted");
  }

  if (options.geomrepr) {
    if (material.is_uniform() && material.base() == IsotropicModuli(0.5, 0.5)) {
      r.geomrepr = geomrepr_from_averages(basis[0].avg_stress, basis[1].avg_stress, basis[2].avg_stress);
    } else {
      r.geomrepr = extract_D_geomrepr(mesh, options);
    }
  }

  if (options.keep_solutions) r.basis = std::move(basis);
  diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EffectiveResult effective_stiffness(const CellGeometry& g, const MaterialField& material, int n,
                                    const HomogOptions& options) {
  return effective_stiffness(generate(g, n), material, options);
}

GeomreprResult extract_D_geomrepr(const Mesh& mesh, const HomogOptions& options) {
  const CellProblem problem(mesh, MaterialField(IsotropicModuli(0.5, 0.5)), options.bc, options.solver);
  const auto basis = solve_basis(problem);
  return geomrepr_from_averages(basis[0].avg_stress, basis[1].avg_stress, basis[2].avg_stress);
}

double spread(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  const double range = *hi - *lo;
  return std::abs(mean) < 1e-6 ? range : range / std::abs(mean);
}

SweepResult moduli_sweep(const Mesh& mesh, const std::vector<IsotropicModuli>& moduli,
                         const HomogOptions& options, const VoigtMatrix& shift) {
  if (moduli.empty()) throw ValidationError("moduli sweep needs at least one entry");
  HomogOptions opts = options;
  opts.keep_solutions = false;
  opts.geomrepr = false;
  SweepResult out;
  for (const auto& m : moduli) {
    const EffectiveResult r = effective_stiffness(mesh, MaterialField(m), opts);
    SweepEntry e{m, r.stiffness, r.compliance, extract_D(r.compliance, m, shift), r.positive_definite,
                 r.warnings, r.diagnostics};
    out.entries.push_back(std::move(e));
  }
  for (int k = 1; k <= 6; ++k) {
    std::vector<double> v;
    for (const auto& e : out.entries) v.push_back(e.d->D.entry(k));
    out.d_spread[static_cast<std::size_t>(k - 1)] = spread(v);
    out.max_spread = std::max(out.max_spread, out.d_spread[static_cast<std::size_t>(k - 1)]);
  }
  return out;
}

ClmShiftReport clm_shift_check(const Mesh& mesh, const MaterialField& material, double rho,
                               const HomogOptions& options) {
  const MaterialField shifted = material.shifted(rho);
  HomogOptions opts = options;
  opts.keep_solutions = false;
  opts.geomrepr = false;
  ClmShiftReport r;
  r.rho = rho;
  r.compliance_before = effective_stiffness(mesh, material, opts).compliance;
  r.compliance_after = effective_stiffness(mesh, shifted, opts).compliance;
  r.delta = r.compliance_after - r.compliance_before;
  r.deviation = (r.delta + rho * shift_matrix()).norm() / r.compliance_before.norm();
  return r;
}

MichellReport michell_invariance_check(const Mesh& mesh, const IsotropicModuli& a,
                                       const IsotropicModuli& b, const HomogOptions& options) {
  HomogOptions opts = options;
  opts.keep_solutions = true;
  opts.geomrepr = false;
  const MaterialField fa(a), fb(b);
  const EffectiveResult ra = effective_stiffness(mesh, fa, opts);
  const EffectiveResult rb = effective_stiffness(mesh, fb, opts);

  auto field_at = [&](const EffectiveResult& r, const MaterialField& f, std::size_t i) {
    Voigt3 unit{0.0, 0.0, 0.0};
    unit[i] = 1.0;
    const Voigt3 xi = r.compliance * unit;
    const CellSolution s =
        linear_combination({xi[0], xi[1], xi[2]}, {&r.basis[0], &r.basis[1], &r.basis[2]});
    return stress_field(s, mesh, f);
  };

  MichellReport rep;
  for (std::size_t i = 0; i < 3; ++i) {
    const StressField sa = field_at(ra, fa, i);
    const StressField sb = field_at(rb, fb, i);
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < sa.at_quadrature.size(); ++e) {
      for (std::size_t q = 0; q < sa.at_quadrature[e].size(); ++q) {
        const Voigt3& x = sa.at_quadrature[e][q];
        const Voigt3& y = sb.at_quadrature[e][q];
        const double w = sa.weights[e][q];
        num += w * weighted_norm2({x[0] - y[0], x[1] - y[1], x[2] - y[2]});
        den += w * weighted_norm2(x);
      }
    }
    rep.deviation[i] = std::sqrt(num / den);
    rep.max_deviation = std::max(rep.max_deviation, rep.deviation[i]);
  }
  return rep;
}

LineIdentityReport line_identity_check(const CellGeometry& g, const Mesh& mesh,
                                       const MaterialField& material,
                                       const HomogOptions& options) {
  return line_identity_check(g, mesh, material,
                             Line{LineDirection::along_x1, clear_line(g, LineDirection::along_x1)},
                             Line{LineDirection::along_x2, clear_line(g, LineDirection::along_x2)},
                             options);
}

LineIdentityReport line_identity_check(const CellGeometry& g, const Mesh& mesh,
                                       const MaterialField& material, const Line& horizontal,
                                       const Line& vertical, const HomogOptions& options) {
  if (horizontal.direction != LineDirection::along_x1 || vertical.direction != LineDirection::along_x2) {
    throw ValidationError("line identity needs one line along x1 and one along x2");
  }
  for (const Line* l : {&horizontal, &vertical}) {
    if (line_hole_distance(g, *l) <= 0.0) throw ValidationError("line crosses a hole");
  }
  const CellProblem problem(mesh, material, options.bc, options.solver);
  const auto basis = solve_basis(problem);
  const double cell = mesh.l1 * mesh.l2;

  const auto fv1 = flux_line_integral(basis[0], mesh, material, vertical);
  const auto fh2 = flux_line_integral(basis[1], mesh, material, horizontal);
  const auto fh3 = flux_line_integral(basis[2], mesh, material, horizontal);
  const auto fv3 = flux_line_integral(basis[2], mesh, material, vertical);

  LineIdentityReport rep;
  auto add = [&](std::string name, const Line& line, double volume, double along) {
    LineIdentityPairing p{std::move(name), line, volume, along, std::abs(along - volume) / std::abs(volume)};
    rep.max_error = std::max(rep.max_error, p.relative_error);
    rep.pairings.push_back(std::move(p));
  };
  add("s11/vertical", vertical, cell * basis[0].avg_stress[0], mesh.l1 * fv1[0]);
  add("s22/horizontal", horizontal, cell * basis[1].avg_stress[1], mesh.l2 * fh2[1]);
  add("s12/horizontal", horizontal, cell * basis[2].avg_stress[2], mesh.l2 * fh3[0]);
  add("s12/vertical", vertical, cell * basis[2].avg_stress[2], mesh.l1 * fv3[1]);
  return rep;
}

namespace {

// Value and normal derivative of a nodal field on a straight periodic line.
class LineSampler {
 public:
  LineSampler(const Mesh& m, const std::vector<double>& nodal, const Line& line)
      : m_(m), nodal_(nodal), along_x1_(line.direction == LineDirection::along_x1), c_(line.coordinate) {
    const double across = along_x1_ ? m.l2 : m.l1;
    const double grid = c_ / m.h;
    on_grid_ = std::abs(grid - std::round(grid)) < 1e-9 || std::abs(c_ - across) < 1e-12;
  }

  // Integral over t in [t0, t0 + period] of weight(t) * (value, normal derivative).
  std::array<double, 2> integrate(double t0, const std::function<std::array<double, 2>(double)>& weight) const {
    static constexpr std::array<double, 3> nodes{-0.77459666924148337704, 0.0, 0.77459666924148337704};
    static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double period = along_x1_ ? m_.l1 : m_.l2;
    std::vector<double> breaks{t0};
    for (double k = std::floor(t0 / m_.h) + 1.0; k * m_.h < t0 + period - 1e-12 * m_.h; k += 1.0) {
      breaks.push_back(k * m_.h);
    }
    breaks.push_back(t0 + period);
    std::array<double, 2> total{0.0, 0.0};
    constexpr int pieces = 8;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double len = (breaks[b + 1] - breaks[b]) / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double a = breaks[b] + p * len;
        for (std::size_t q = 0; q < 3; ++q) {
          const double t = a + 0.5 * len * (1.0 + nodes[q]);
          const auto [value, normal] = sample(t);
          const auto w = weight(t);
          total[0] += 0.5 * len * weights[q] * w[0] * value;
          total[1] += 0.5 * len * weights[q] * w[1] * normal;
        }
      }
    }
    return total;
  }

 private:
  const Mesh& m_;
  const std::vector<double>& nodal_;
  bool along_x1_;
  double c_;
  bool on_grid_ = false;

  Vec2 wrap(Vec2 p) const {
    p.x -= m_.l1 * std::floor(p.x / m_.l1);
    p.y -= m_.l2 * std::floor(p.y / m_.l2);
    return p;
  }

  FieldSample at(Vec2 p) const {
    const Location loc = m_.locate(wrap(p));
    if (loc.element < 0) {
      throw ValidationError("path crosses a hole near (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    }
    return interpolate(m_, nodal_, loc);
  }

  std::pair<double, double> sample(double t) const {
    const Vec2 p = along_x1_ ? Vec2{t, c_} : Vec2{c_, t};
    const Vec2 normal = along_x1_ ? Vec2{0.0, 1.0} : Vec2{1.0, 0.0};
    const FieldSample s = at(p);
    double dn = dot(s.gradient, normal);
    if (on_grid_) {
      const double delta = 1e-9 * m_.h;
      const FieldSample lo = at(p - delta * normal);
      const FieldSample hi = at(p + delta * normal);
      dn = 0.5 * (dot(lo.gradient, normal) + dot(hi.gradient, normal));
    }
    return {s.value, dn};
  }
};

}  // namespace

QuasiperiodReport quasiperiod_path_diagnostic(const CellGeometry& g, const Mesh& mesh,
                                              const IsotropicModuli& moduli, const Quasiperiod& xi,
                                              const HomogOptions& options) {
  QuasiperiodReport rep;
  rep.prescribed = xi;
  rep.gamma1 = Line{LineDirection::along_x1, clear_line(g, LineDirection::along_x1)};
  rep.gamma2 = Line{LineDirection::along_x2, clear_line(g, LineDirection::along_x2)};

  const MaterialField material(moduli);
  const CellProblem problem(mesh, material, options.bc, options.solver);
  const CellSolution sol = problem.solve(xi);
  const StressField field = stress_field(sol, mesh, material);
  std::vector<double> trace(field.nodal.size());
  for (std::size_t k = 0; k < trace.size(); ++k) trace[k] = field.nodal[k][0] + field.nodal[k][1];

  const double c1111 = 0.25 * moduli.compliance_sum();
  const double c1212 = 0.25 / moduli.shear();
  const double l1 = mesh.l1, l2 = mesh.l2;
  const double x2_line = rep.gamma1.coordinate;  // gamma1: x2 = const
  const double x1_line = rep.gamma2.coordinate;  // gamma2: x1 = const
  const Voigt3& s = sol.avg_stress;

  const LineSampler horizontal(mesh, trace, rep.gamma1);
  const LineSampler vertical(mesh, trace, rep.gamma2);
  const auto unit = [](double) { return std::array<double, 2>{1.0, 1.0}; };
  const auto moment = [](double t) { return std::array<double, 2>{0.0, t}; };

  // Plain integrals of Tr s and its normal derivative along both lines.
  const auto h = horizontal.integrate(0.0, unit);
  const auto v = vertical.integrate(0.0, unit);
  rep.xi11 = -2.0 * c1212 * s[1] + c1111 / l1 * (h[0] - x2_line * h[1]);
  rep.xi22 = -2.0 * c1212 * s[0] + c1111 / l2 * (v[0] - x1_line * v[1]);

  // Shifted paths start at the intersection of the two lines and use unwrapped coordinates.
  const auto hm = horizontal.integrate(x1_line, moment);
  const auto vm = vertical.integrate(x2_line, moment);
  rep.xi12 = 2.0 * c1212 * s[2] + c1111 / (2.0 * l1) * hm[1] + c1111 / (2.0 * l2) * vm[1];
  rep.xi12_alt = rep.xi12 + c1111 / (2.0 * l1) * h[0] + c1111 / (2.0 * l2) * v[0];

  const double scale = std::max({std::abs(xi.xi11()), std::abs(xi.xi22()), std::abs(xi.xi12())});
  if (scale == 0.0) throw ValidationError("prescribed average strain is zero");
  rep.error = {std::abs(rep.xi11 - xi.xi11()) / scale, std::abs(rep.xi22 - xi.xi22()) / scale,
               std::abs(rep.xi12 - xi.xi12()) / scale};
  rep.max_error = std::max({rep.error[0], rep.error[1], rep.error[2]});
  return rep;
}

SquareSymmetryReport square_symmetry_report(const EffectiveResult& result, double tol) {
  if (!result.moduli || !result.d) throw ValidationError("square symmetry report needs a uniform material");
  const IsotropicModuli& m = *result.moduli;
  SquareSymmetryReport rep;
  rep.constants = vigdergauz_constants(result.compliance, m, tol);
  const auto& c = rep.constants;
  rep.from_constants = dna_relations(c.a1, c.a2, c.a3);
  for (int k = 1; k <= 6; ++k) {
    rep.dna_residual = std::max(rep.dna_residual, std::abs(rep.from_constants.D.entry(k) - result.d->D.entry(k)));
  }
  const VoigtMatrix& d = result.d->D;
  rep.isotropy_gap = std::abs(d.entry(6) - 2.0 * (d.entry(1) - d.entry(2)));
  rep.isotropic = rep.isotropy_gap <= tol * std::max(1.0, std::abs(d.entry(6)));
  rep.gradients = effective_gradients(c.a1, c.a2, c.a3, m);
  return rep;
}

LoewnerReport loewner_check(const Mesh& mesh, const MaterialField& material, const SolverOptions& solver) {
  HomogOptions opts;
  opts.solver = solver;
  opts.keep_solutions = false;
  LoewnerReport rep;
  opts.bc = BcMode::periodic;
  rep.periodic = effective_stiffness(mesh, material, opts).stiffness;
  opts.bc = BcMode::dirichlet_affine;
  rep.dirichlet = effective_stiffness(mesh, material, opts).stiffness;
  const VoigtMatrix diff = rep.dirichlet - rep.periodic;
  rep.difference_eigenvalues = eigenvalues(diff);
  rep.min_relative = rep.difference_eigenvalues[0] / rep.periodic.norm();
  rep.relative_gap = diff.norm() / rep.periodic.norm();
  return rep;
}

}  // namespace cellhom

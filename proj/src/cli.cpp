#include "cellhom/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cellhom/errors.hpp"
#include "cellhom/reference_data.hpp"
#include "cellhom/verify.hpp"
#include "json.hpp"

namespace cellhom::cli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr int kRecommendedN = 64;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string g6(double v) { return fmt("%.6g", v); }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson matrix_json(const VoigtMatrix& m) {
  ojson rows = ojson::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

ojson matrix_json(const std::array<std::array<double, 3>, 3>& m) {
  ojson rows = ojson::array();
  for (const auto& r : m) rows.push_back({r[0], r[1], r[2]});
  return rows;
}

ojson quality_json(const QualityReport& q) {
  return {{"nodes", q.node_count},
          {"q4", q.q4_count},
          {"t3", q.t3_count},
          {"min_angle_deg", q.min_angle_deg},
          {"max_angle_deg", q.max_angle_deg},
          {"min_cut_angle_deg", q.min_cut_angle_deg},
          {"max_aspect_ratio", q.max_aspect_ratio},
          {"min_jacobian", q.min_jacobian},
          {"min_t3_area_over_h2", q.min_t3_area_over_h2},
          {"snap_tolerance", q.snap_tolerance}};
}

// Entries below 1e-12 of the largest are printed as zero.
void print_matrix(std::ostream& out, const std::string& label, const VoigtMatrix& m) {
  const double floor = 1e-12 * m.max_abs();
  for (int i = 0; i < 3; ++i) {
    out << (i == 1 ? label : std::string(label.size(), ' '));
    out << (i == 1 ? " = [" : "   [");
    for (int j = 0; j < 3; ++j) out << fmt("%13.6g", std::abs(m(i, j)) <= floor ? 0.0 : m(i, j));
    out << " ]\n";
  }
}

void print_decomposition(std::ostream& out, const EffectiveResult& r) {
  const IsotropicModuli& m = *r.moduli;
  const GeometricModulus& d = *r.d;
  const double s = m.compliance_sum();
  const VoigtMatrix sd = s * d.D;
  const VoigtMatrix eg = (1.0 / m.shear()) * shift_matrix();
  out << "C* = (1/K + 1/G) D + E/G   with K = " << g6(m.bulk()) << ", G = " << g6(m.shear())
      << ", 1/K + 1/G = " << g6(s) << "\n";
  print_matrix(out, "D", d.D);
  print_matrix(out, "(1/K + 1/G) D", sd);
  print_matrix(out, "E/G", eg);
  const double gap = (sd + eg - r.compliance).max_abs() / r.compliance.max_abs();
  out << "reassembled vs C*: " << fmt("%.3e", gap) << " relative\n";
}

std::vector<IsotropicModuli> nu_moduli(const ModuliSpec& base, const std::vector<double>& nu) {
  std::vector<IsotropicModuli> out;
  for (double v : nu) {
    ModuliSpec s = base;
    s.poisson = v;
    out.push_back(s.moduli());
  }
  return out;
}

std::string spread_row(const std::string& name, const SweepResult& s) {
  std::string row = name + "," + std::to_string(s.entries.size());
  for (double v : s.d_spread) row += "," + g6(v);
  return row + "," + g6(s.max_spread) + "\n";
}

HomogOptions run_options(const RunConfig& c) {
  HomogOptions o;
  o.bc = c.bc;
  o.solver = c.solver;
  return o;
}

void require_uniform(const RunConfig& c, const std::string& what) {
  if (!c.region_materials.empty()) throw ConfigError("material.regions", what + " needs a uniform material");
}

struct Flags {
  std::string config;
  std::optional<int> n;
  std::string bc;
  std::string out;
  std::string vtk;
  std::vector<double> nu_list;
  bool kg_grid = false;
  std::vector<double> k_list;
  std::vector<double> g_list;
  std::string level = "quick";
  bool mutate_shift = false;
  bool n384 = false;
  std::string csv;
  bool quiet = false;
};

RunConfig load_with_overrides(const Flags& f) {
  RunConfig c = load_config(f.config);
  if (f.n) c.n = *f.n;
  if (!f.bc.empty()) {
    if (f.bc == "periodic") c.bc = BcMode::periodic;
    else if (f.bc == "dirichlet_affine") c.bc = BcMode::dirichlet_affine;
    else throw ConfigError("--bc", "expected periodic or dirichlet_affine");
  }
  if (!f.out.empty()) c.out_json = f.out;
  if (!f.vtk.empty()) c.out_vtk = f.vtk;
  validate_config(c);
  return c;
}

int cmd_homogenize(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig c = load_with_overrides(f);
  const MaterialField material = c.material_field();
  const Mesh mesh = generate(c.geometry, c.n, c.mesh);
  HomogOptions o = run_options(c);
  o.geomrepr = c.region_materials.empty();
  o.keep_solutions = !c.out_vtk.empty();
  const EffectiveResult r = effective_stiffness(mesh, material, o);

  out << "cellhom " << kVersion << "  config " << config_hash(c) << "  n = " << c.n << "  bc = "
      << to_string(c.bc) << "\n";
  out << "mesh: " << mesh.nodes.size() << " nodes, " << mesh.count(ElementType::q4) << " q4, "
      << mesh.count(ElementType::t3) << " t3\n";
  print_matrix(out, "B*", r.stiffness);
  print_matrix(out, "C*", r.compliance);
  out << "symmetry: " << to_string(r.symmetry) << "\n";
  if (r.moduli && r.d) {
    print_decomposition(out, r);
    if (r.geomrepr) out << "closed-form D discrepancy: " << fmt("%.3e", r.geomrepr->max_discrepancy) << "\n";
  } else {
    out << "D is defined for a single isotropic phase only; skipped\n";
  }
  if (r.vigdergauz) {
    out << "A1 = " << g6(r.vigdergauz->a1) << "  A2 = " << g6(r.vigdergauz->a2) << "  A3 = " << g6(r.vigdergauz->a3)
        << "\n";
  }
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";

  if (!c.out_json.empty()) {
    write_atomic(c.out_json, result_json(c, mesh, r, utc_timestamp()));
    out << "wrote " << c.out_json << "\n";
  }
  if (!c.out_vtk.empty()) {
    VtkFields fields;
    const char* names[3] = {"_e11", "_e22", "_g12"};
    for (std::size_t j = 0; j < r.basis.size(); ++j) {
      VtkFields part = solution_fields(r.basis[j], mesh, material, names[j]);
      fields.point_vectors.merge(part.point_vectors);
      fields.point_scalars.merge(part.point_scalars);
      fields.cell_tensors.merge(part.cell_tensors);
      fields.cell_scalars.merge(part.cell_scalars);
    }
    std::ostringstream vtk;
    write_vtk(vtk, mesh, fields);
    write_atomic(c.out_vtk, vtk.str());
    out << "wrote " << c.out_vtk << "\n";
  }
  return kOk;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = load_with_overrides(f);
  if (!f.nu_list.empty()) c.nu_list = f.nu_list;
  if (!f.k_list.empty()) c.k_list = f.k_list;
  if (!f.g_list.empty()) c.g_list = f.g_list;
  if (!f.csv.empty()) c.out_csv = f.csv;
  validate_config(c);
  require_uniform(c, "a sweep");
  const bool want_nu = !f.nu_list.empty() || (!f.kg_grid && f.k_list.empty() && !c.nu_list.empty());
  const bool want_kg = f.kg_grid || !f.k_list.empty() || (f.nu_list.empty() && c.nu_list.empty());
  if (want_nu && c.nu_list.empty()) throw ConfigError("sweep.nu_list", "no Poisson ratios given");
  if (want_kg && c.k_list.empty()) throw ConfigError("sweep.kg_grid", "no (K, G) grid given");
  const std::string prefix = c.out_csv.empty() ? "sweep" : c.out_csv;

  const Mesh mesh = generate(c.geometry, c.n, c.mesh);
  const HomogOptions o = run_options(c);
  std::string spread = "sweep,runs,D1,D2,D3,D4,D5,D6,max\n";
  if (want_nu) {
    const SweepResult s = moduli_sweep(mesh, nu_moduli(c.material, c.nu_list), o);
    write_atomic(prefix + "_stiffness.csv", stiffness_table_csv(c.nu_list, s));
    write_atomic(prefix + "_geometric.csv", geometric_table_csv(c.nu_list, s));
    spread += spread_row("nu", s);
    out << "nu sweep: " << s.entries.size() << " runs, max D spread " << g6(s.max_spread) << "\n";
    out << "wrote " << prefix << "_stiffness.csv, " << prefix << "_geometric.csv\n";
  }
  if (want_kg) {
    std::vector<IsotropicModuli> grid;
    for (double k : c.k_list) {
      for (double g : c.g_list) grid.emplace_back(k, g);
    }
    const SweepResult s = moduli_sweep(mesh, grid, o);
    write_atomic(prefix + "_kg.csv", kg_grid_csv(s));
    spread += spread_row("kg", s);
    out << "(K, G) sweep: " << s.entries.size() << " runs, max D spread " << g6(s.max_spread) << "\n";
    out << "wrote " << prefix << "_kg.csv\n";
  }
  write_atomic(prefix + "_spread.csv", spread);
  out << "wrote " << prefix << "_spread.csv\n";
  return kOk;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  VerifyConfig vc;
  if (!f.config.empty()) vc = load_config(f.config).verify;
  vc.corrupt_shift = f.mutate_shift;
  if (f.n384) vc.run_n384 = true;
  const std::optional<VerifyLevel> level = parse_verify_level(f.level);
  if (!level) throw ConfigError("--level", "expected quick or full");
  const VerificationReport r = run_suite(vc, *level, [&](const CheckResult& c) {
    if (!f.quiet) err << "[" << to_string(c.status) << "] " << c.id << " (" << fmt("%.1f", c.seconds) << " s)\n";
  });
  out << report_table(r);
  if (!f.out.empty()) {
    write_atomic(f.out, report_json(r));
    out << "wrote " << f.out << "\n";
  }
  return r.passed() ? kOk : kVerifyFailed;
}

int cmd_paper_example(const Flags& f, std::ostream& out, std::ostream& err) {
  const int n = f.n.value_or(192);
  if (n < 8) throw ConfigError("--n", "must be at least 8");
  if (n < kRecommendedN) {
    err << "warning: n = " << n << " is below the recommended resolution " << kRecommendedN
        << "; expect errors of several percent\n";
  }
  const std::vector<double> nu(reference::kPoisson.begin(), reference::kPoisson.end());
  ModuliSpec base;
  const Mesh mesh = generate(paper_cell(), n);
  HomogOptions o;
  o.keep_solutions = false;
  const SweepResult s = moduli_sweep(mesh, nu_moduli(base, nu), o);

  ojson doc;
  doc["n"] = n;
  doc["poisson"] = nu;
  auto table = [&](const char* title, const char* letter, const auto& entries, const auto& ref, auto value,
                   const char* key) {
    char cell[64];
    out << title << " (n = " << n << "), computed/reference error\n      ";
    for (double v : nu) {
      std::snprintf(cell, sizeof cell, "%26s", ("nu = " + g6(v)).c_str());
      out << cell;
    }
    out << "\n";
    ojson rows = ojson::array();
    double worst = 0.0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
      const int k = entries[r];
      std::string line = std::string(letter) + std::to_string(k);
      ojson row = {{"entry", line}, {"computed", ojson::array()}, {"reference", ojson::array()}, {"error", ojson::array()}};
      out << line << std::string(6 - line.size(), ' ');
      for (std::size_t i = 0; i < nu.size(); ++i) {
        const double got = value(s.entries[i], k);
        const double want = ref[r][i];
        const bool absolute = std::abs(want) < 0.1;
        const double e = absolute ? std::abs(got - want) : std::abs(got - want) / std::abs(want);
        worst = std::max(worst, e);
        std::snprintf(cell, sizeof cell, "  %8.5f/%-7.5g %5.2f%%%s", got, want, 100.0 * e, absolute ? "a" : " ");
        out << cell;
        row["computed"].push_back(got);
        row["reference"].push_back(want);
        row["error"].push_back(e);
      }
      out << "\n";
      rows.push_back(row);
    }
    out << "worst error " << fmt("%.3f%%", 100.0 * worst)
        << "  (computed/reference; 'a' marks absolute error for |reference| < 0.1)\n\n";
    doc[key] = {{"rows", rows}, {"worst_error", worst}};
  };
  table("Effective stiffness B*", "B", reference::kStiffnessEntries, reference::kStiffness,
        [](const SweepEntry& e, int k) { return e.stiffness.entry(k); }, "stiffness");
  table("Geometric modulus D", "D", reference::kGeometricEntries, reference::kGeometric,
        [](const SweepEntry& e, int k) { return e.d ? e.d->D.entry(k) : std::nan(""); }, "geometric");
  out << "max D spread over nu: " << g6(s.max_spread) << "\n";
  doc["d_spread"] = s.d_spread;

  if (!f.out.empty()) {
    write_atomic(f.out, doc.dump(2) + "\n");
    out << "wrote " << f.out << "\n";
  }
  if (!f.csv.empty()) {
    write_atomic(f.csv + "_stiffness.csv", stiffness_table_csv(nu, s));
    write_atomic(f.csv + "_geometric.csv", geometric_table_csv(nu, s));
    out << "wrote " << f.csv << "_stiffness.csv, " << f.csv << "_geometric.csv\n";
  }
  return kOk;
}

int cmd_mesh_info(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig c = load_with_overrides(f);
  const Mesh mesh = generate(c.geometry, c.n, c.mesh);
  const QualityReport q = quality_report(mesh);
  out << "cell " << g6(mesh.l1) << " x " << g6(mesh.l2) << ", n = " << c.n << " (" << mesh.nx << " x " << mesh.ny
      << " grid, h = " << g6(mesh.h) << ")\n";
  out << "nodes " << q.node_count << ", q4 " << q.q4_count << ", t3 " << q.t3_count << ", periodic pairs "
      << mesh.periodic_pairs.size() << ", hole boundary nodes " << mesh.hole_boundary_nodes.size() << "\n";
  out << "area: mesh " << fmt("%.10g", mesh.area()) << ", material " << fmt("%.10g", material_area(c.geometry))
      << "\n";
  out << "angles: min " << fmt("%.2f", q.min_angle_deg) << ", max " << fmt("%.2f", q.max_angle_deg)
      << ", min at holes " << fmt("%.2f", q.min_cut_angle_deg) << " deg\n";
  out << "max aspect ratio " << fmt("%.3f", q.max_aspect_ratio) << ", min jacobian " << fmt("%.4g", q.min_jacobian)
      << ", min t3 area / h^2 " << fmt("%.4g", q.min_t3_area_over_h2) << "\n";
  for (std::size_t r = 0; r < mesh.region_tags.size(); ++r) {
    int count = 0;
    for (const Element& e : mesh.elements) count += e.region == static_cast<int>(r) ? 1 : 0;
    out << "region " << mesh.region_tags[r] << ": " << count << " elements\n";
  }
  if (!c.out_vtk.empty()) {
    std::ostringstream vtk;
    write_vtk(vtk, mesh);
    write_atomic(c.out_vtk, vtk.str());
    out << "wrote " << c.out_vtk << "\n";
  }
  const std::vector<std::string> problems = check_mesh(mesh);
  for (const auto& p : problems) err << "mesh check: " << p << "\n";
  return problems.empty() ? kOk : kRuntime;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::string result_json(const RunConfig& config, const Mesh& mesh, const EffectiveResult& r,
                        const std::string& timestamp) {
  ojson j;
  j["schema"] = kResultSchema;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(config);
  j["timestamp"] = timestamp;
  j["config"] = ojson::parse(config_json(config));
  ojson m = quality_json(r.diagnostics.mesh);
  m["n"] = config.n;
  m["grid"] = {mesh.nx, mesh.ny};
  m["h"] = mesh.h;
  m["mesh_area"] = mesh.area();
  m["material_area"] = material_area(config.geometry);
  m["reduced_dofs"] = r.diagnostics.reduced_dofs;
  j["mesh"] = m;
  if (r.moduli) j["moduli"] = {{"K", r.moduli->bulk()}, {"G", r.moduli->shear()}};
  j["stiffness"] = matrix_json(r.stiffness);
  j["stiffness_raw"] = matrix_json(r.stiffness_raw);
  j["stiffness_energy"] = matrix_json(r.stiffness_energy);
  j["compliance"] = matrix_json(r.compliance);
  j["positive_definite"] = r.positive_definite;
  j["symmetry"] = to_string(r.symmetry);
  if (r.d) {
    ojson d;
    d["stress_route"] = matrix_json(r.d->D);
    if (r.d_energy) d["energy_route"] = matrix_json(r.d_energy->D);
    if (r.geomrepr) {
      d["closed_form"] = {{"mu", r.geomrepr->mu},
                          {"matrix", matrix_json(r.geomrepr->d.D)},
                          {"d6_printed_sign", r.geomrepr->d6_printed},
                          {"max_discrepancy", r.geomrepr->max_discrepancy}};
    }
    const IsotropicModuli& mod = *r.moduli;
    d["decomposition"] = {{"factor", mod.compliance_sum()},
                          {"shift_over_G", matrix_json((1.0 / mod.shear()) * shift_matrix())}};
    j["geometric_modulus"] = d;
  }
  if (r.inequalities) {
    ojson checks = ojson::array();
    for (const auto& c : r.inequalities->checks) {
      checks.push_back({{"expression", c.expression}, {"margin", c.margin}, {"holds", c.holds}});
    }
    j["inequalities"] = {{"all_hold", r.inequalities->all_hold()}, {"checks", checks}};
  }
  if (r.vigdergauz) {
    const VigdergauzConstants& v = *r.vigdergauz;
    j["square_constants"] = {{"A1", v.a1}, {"A2", v.a2}, {"A3", v.a3},
                             {"K_eff", v.bulk_eff}, {"G_eff", v.shear_eff}, {"G45_eff", v.shear45_eff}};
  }
  const HomogDiagnostics& dg = r.diagnostics;
  j["diagnostics"] = {{"asymmetry", dg.asymmetry},
                      {"energy_discrepancy", dg.energy_discrepancy},
                      {"galerkin_residual", dg.galerkin_residual},
                      {"max_solver_residual", dg.max_solver_residual},
                      {"max_iterations", dg.max_iterations}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string stiffness_table_csv(const std::vector<double>& nu, const SweepResult& sweep) {
  std::string s = "entry";
  for (double v : nu) s += "," + g6(v);
  s += "\n";
  for (int k = 1; k <= 6; ++k) {
    s += "B" + std::to_string(k);
    for (const SweepEntry& e : sweep.entries) s += "," + g6(e.stiffness.entry(k));
    s += "\n";
  }
  return s;
}

std::string geometric_table_csv(const std::vector<double>& nu, const SweepResult& sweep) {
  std::string s = "entry";
  for (double v : nu) s += "," + g6(v);
  s += "\n";
  for (int k = 1; k <= 6; ++k) {
    s += "D" + std::to_string(k);
    for (const SweepEntry& e : sweep.entries) s += "," + (e.d ? g6(e.d->D.entry(k)) : std::string());
    s += "\n";
  }
  return s;
}

std::string kg_grid_csv(const SweepResult& sweep) {
  std::string s = "K,G,B1,B2,B3,B4,B5,B6,D1,D2,D3,D4,D5,D6\n";
  for (const SweepEntry& e : sweep.entries) {
    s += g6(e.moduli.bulk()) + "," + g6(e.moduli.shear());
    for (int k = 1; k <= 6; ++k) s += "," + g6(e.stiffness.entry(k));
    for (int k = 1; k <= 6; ++k) s += "," + (e.d ? g6(e.d->D.entry(k)) : std::string());
    s += "\n";
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective elastic moduli of periodically perforated planar cells", "cellhom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Flags f;

  auto* homogenize = app.add_subcommand("homogenize", "Solve the three cell problems and report B*, C*, D");
  homogenize->add_option("config", f.config, "Run configuration (JSON)")->required();
  homogenize->add_option("--n", f.n, "Grid cells across l2");
  homogenize->add_option("--bc", f.bc, "periodic or dirichlet_affine");
  homogenize->add_option("--out", f.out, "Result JSON path");
  homogenize->add_option("--vtk", f.vtk, "VTK path for the three basis solutions");

  auto* sweep = app.add_subcommand("sweep", "Effective tensors and D over Poisson ratios or a (K, G) grid");
  sweep->add_option("config", f.config, "Run configuration (JSON)")->required();
  sweep->add_option("--nu-list", f.nu_list, "Poisson ratios, comma separated")->delimiter(',');
  sweep->add_flag("--kg-grid", f.kg_grid, "Run the (K, G) grid of the configuration");
  sweep->add_option("--k-list", f.k_list, "Bulk moduli of the grid")->delimiter(',');
  sweep->add_option("--g-list", f.g_list, "Shear moduli of the grid")->delimiter(',');
  sweep->add_option("--n", f.n, "Grid cells across l2");
  sweep->add_option("--bc", f.bc, "periodic or dirichlet_affine");
  sweep->add_option("--out", f.csv, "CSV path prefix");

  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  verify->add_option("config", f.config, "Optional configuration whose verify block is used");
  verify->add_option("--level", f.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--out", f.out, "Report JSON path");
  verify->add_flag("--mutate-shift", f.mutate_shift, "Extract D with -E (the suite must fail)");
  verify->add_flag("--n384", f.n384, "Also run the n = 384 geometric modulus check");
  verify->add_flag("--quiet", f.quiet, "No progress lines");

  auto* paper = app.add_subcommand("paper-example", "2 x 1 cell with a hole of radius 1/4 against reference tables");
  paper->add_option("--n", f.n, "Grid cells across l2 (default 192)");
  paper->add_option("--out", f.out, "Comparison JSON path");
  paper->add_option("--csv", f.csv, "CSV path prefix for both tables");

  auto* mesh_info = app.add_subcommand("mesh-info", "Mesh statistics and quality");
  mesh_info->add_option("config", f.config, "Run configuration (JSON)")->required();
  mesh_info->add_option("--n", f.n, "Grid cells across l2");
  mesh_info->add_option("--vtk", f.vtk, "VTK path for the mesh");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (f.n && *f.n < 8) {
    err << "error: --n must be at least 8\n";
    return kUsage;
  }

  try {
    if (homogenize->parsed()) return cmd_homogenize(f, out, err);
    if (sweep->parsed()) return cmd_sweep(f, out, err);
    if (verify->parsed()) return cmd_verify(f, out, err);
    if (paper->parsed()) return cmd_paper_example(f, out, err);
    if (mesh_info->parsed()) return cmd_mesh_info(f, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << (e.path().empty() || f.config.empty() ? "" : f.config + ": ") << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace cellhom::cli

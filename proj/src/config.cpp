#include "cellhom/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "cellhom/errors.hpp"
#include "json.hpp"

namespace cellhom {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

IsotropicModuli ModuliSpec::moduli() const {
  if (model == "plane_strain") return moduli_from_engineering(young, poisson, PlanarModel::plane_strain);
  if (model == "plane_stress") return moduli_from_engineering(young, poisson, PlanarModel::plane_stress);
  if (model == "direct_KG") return IsotropicModuli(bulk, shear);
  throw DomainError("unknown material model '" + model + "'");
}

MaterialField RunConfig::material_field() const {
  std::map<std::string, IsotropicModuli> regions;
  for (const auto& [tag, spec] : region_materials) regions.emplace(tag, spec.moduli());
  return MaterialField(material.moduli(), std::move(regions));
}

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  return j;
}

std::vector<double> number_list(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) out.push_back(as_number(j[i], index(path, i)));
  return out;
}

Vec2 point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a point [x, y]");
  return {as_number(j[0], index(path, 0)), as_number(j[1], index(path, 1))};
}

// Object reader that tracks consumed keys so leftovers can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return child(path_, key); }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ConfigError(at(key), "missing required field");
    return *v;
  }

  double number(const std::string& key) { return as_number(require(key), at(key)); }
  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : fallback;
  }
  int integer(const std::string& key, int fallback) {
    const json* v = find(key);
    return v ? as_int(*v, at(key)) : fallback;
  }
  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    return v ? as_string(*v, at(key)) : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(at(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

RegionShape parse_shape(const json& j, const std::string& path, bool allow_annulus) {
  Obj o(j, path);
  const std::string type = as_string(o.require("type"), o.at("type"));
  RegionShape shape;
  if (type == "circle") {
    shape = Circle{point(o.require("center"), o.at("center")), o.number("radius")};
  } else if (type == "ellipse") {
    shape = Ellipse{point(o.require("center"), o.at("center")), o.number("semi_a"), o.number("semi_b"),
                    o.number("angle", 0.0)};
  } else if (type == "polygon") {
    Polygon p;
    const std::string vp = o.at("vertices");
    const json& v = as_array(o.require("vertices"), vp);
    for (std::size_t i = 0; i < v.size(); ++i) p.vertices.push_back(point(v[i], index(vp, i)));
    if (p.vertices.size() < 3) throw ConfigError(vp, "a polygon needs at least 3 vertices");
    shape = p;
  } else if (type == "annulus" && allow_annulus) {
    shape = Annulus{point(o.require("center"), o.at("center")), o.number("inner_radius"), o.number("outer_radius")};
  } else {
    throw ConfigError(o.at("type"), "unknown shape type '" + type + "'");
  }
  o.finish();
  return shape;
}

Hole to_hole(const RegionShape& s) {
  if (const auto* c = std::get_if<Circle>(&s)) return *c;
  if (const auto* e = std::get_if<Ellipse>(&s)) return *e;
  return std::get<Polygon>(s);
}

ModuliSpec parse_moduli(Obj& o) {
  ModuliSpec m;
  m.model = o.string("model", "plane_strain");
  if (m.model == "plane_strain" || m.model == "plane_stress") {
    m.young = o.number("E");
    m.poisson = o.number("nu");
  } else if (m.model == "direct_KG") {
    m.bulk = o.number("K");
    m.shear = o.number("G");
  } else {
    throw ConfigError(o.at("model"), "expected plane_strain, plane_stress or direct_KG");
  }
  return m;
}

BcMode parse_bc(const std::string& s, const std::string& path) {
  if (s == "periodic") return BcMode::periodic;
  if (s == "dirichlet_affine") return BcMode::dirichlet_affine;
  throw ConfigError(path, "expected periodic or dirichlet_affine");
}

SolverKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "cg") return SolverKind::cg;
  if (s == "sparse_direct") return SolverKind::sparse_direct;
  if (s == "dense_direct") return SolverKind::dense_direct;
  throw ConfigError(path, "expected cg, sparse_direct or dense_direct");
}

Quadrature parse_quadrature(const std::string& s, const std::string& path) {
  if (s == "full") return Quadrature::full;
  if (s == "selective") return Quadrature::selective;
  throw ConfigError(path, "expected full or selective");
}

ojson point_json(Vec2 p) { return ojson::array({p.x, p.y}); }

ojson shape_json(const RegionShape& s) {
  ojson j;
  if (const auto* c = std::get_if<Circle>(&s)) {
    j = {{"type", "circle"}, {"center", point_json(c->center)}, {"radius", c->radius}};
  } else if (const auto* e = std::get_if<Ellipse>(&s)) {
    j = {{"type", "ellipse"}, {"center", point_json(e->center)}, {"semi_a", e->semi_a}, {"semi_b", e->semi_b},
         {"angle", e->angle}};
  } else if (const auto* p = std::get_if<Polygon>(&s)) {
    ojson v = ojson::array();
    for (const Vec2& q : p->vertices) v.push_back(point_json(q));
    j = {{"type", "polygon"}, {"vertices", v}};
  } else {
    const auto& a = std::get<Annulus>(s);
    j = {{"type", "annulus"}, {"center", point_json(a.center)}, {"inner_radius", a.inner_radius},
         {"outer_radius", a.outer_radius}};
  }
  return j;
}

RegionShape to_shape(const Hole& h) {
  return std::visit([](const auto& s) -> RegionShape { return s; }, h);
}

ojson moduli_json(const ModuliSpec& m) {
  if (m.model == "direct_KG") return {{"model", m.model}, {"K", m.bulk}, {"G", m.shear}};
  return {{"model", m.model}, {"E", m.young}, {"nu", m.poisson}};
}

}  // namespace

void validate_config(const RunConfig& c) {
  const GeometryReport rep = validate(c.geometry);
  if (!rep.ok()) {
    std::string msg;
    for (const auto& v : rep.violations) msg += (msg.empty() ? "" : "; ") + v;
    throw ConfigError("geometry", msg);
  }
  if (c.n < 8) throw ConfigError("mesh.n", "must be at least 8");
  const double cols = c.n * c.geometry.l1 / c.geometry.l2;
  if (std::abs(cols - std::round(cols)) > 1e-9) throw ConfigError("mesh.n", "n * l1 / l2 must be an integer");
  if (c.mesh.hole_segments != 0 && c.mesh.hole_segments < 8) {
    throw ConfigError("mesh.hole_segments", "must be 0 (automatic) or at least 8");
  }
  if (!(c.mesh.snap_factor > 0.0 && c.mesh.snap_factor < 0.5)) {
    throw ConfigError("mesh.snap_factor", "must lie in (0, 0.5)");
  }
  try {
    (void)c.material.moduli();
  } catch (const DomainError& e) {
    throw ConfigError("material", e.what());
  }
  for (const auto& [tag, spec] : c.region_materials) {
    const bool known = std::any_of(c.geometry.regions.begin(), c.geometry.regions.end(),
                                   [&](const Region& r) { return r.tag == tag; });
    if (!known) throw ConfigError("material.regions." + tag, "no geometry region has this tag");
    try {
      (void)spec.moduli();
    } catch (const DomainError& e) {
      throw ConfigError("material.regions." + tag, e.what());
    }
  }
  if (!(c.solver.rel_tol > 0.0)) throw ConfigError("solver.rel_tol", "must be positive");
  if (c.solver.max_iterations < 0) throw ConfigError("solver.max_iterations", "must be non-negative");
  for (std::size_t i = 0; i < c.nu_list.size(); ++i) {
    if (c.material.model == "direct_KG") {
      throw ConfigError("sweep.nu_list", "needs an engineering material model (plane_strain or plane_stress)");
    }
    ModuliSpec m = c.material;
    m.poisson = c.nu_list[i];
    try {
      (void)m.moduli();
    } catch (const DomainError& e) {
      throw ConfigError(index("sweep.nu_list", i), e.what());
    }
  }
  if (c.k_list.empty() != c.g_list.empty()) throw ConfigError("sweep.kg_grid", "needs both K and G lists");
  for (std::size_t i = 0; i < c.k_list.size(); ++i) {
    if (!(c.k_list[i] > 0.0)) throw ConfigError(index("sweep.kg_grid.K", i), "must be positive");
  }
  for (std::size_t i = 0; i < c.g_list.size(); ++i) {
    if (!(c.g_list[i] > 0.0)) throw ConfigError(index("sweep.kg_grid.G", i), "must be positive");
  }
  const VerifyConfig& v = c.verify;
  if (v.n < 8 || v.n_coarse < 8 || v.n_quick < 8) throw ConfigError("verify", "resolutions must be at least 8");
  if (v.refinement.size() < 2) throw ConfigError("verify.refinement", "needs at least two resolutions");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto tag = what.find("] ");
    if (tag != std::string::npos) what.erase(0, tag + 2);
    throw ConfigError("", source + ": " + what);
  }
  RunConfig c;
  Obj root(doc, "");
  const std::string schema = as_string(root.require("schema"), "schema");
  if (schema != kConfigSchema) throw ConfigError("schema", "expected \"" + std::string(kConfigSchema) + "\"");

  {
    Obj g(root.require("geometry"), "geometry");
    c.geometry.l1 = g.number("l1");
    c.geometry.l2 = g.number("l2");
    if (const json* v = g.find("clearance")) c.geometry.clearance = as_number(*v, g.at("clearance"));
    if (const json* holes = g.find("holes")) {
      const std::string hp = g.at("holes");
      for (std::size_t i = 0; i < as_array(*holes, hp).size(); ++i) {
        c.geometry.holes.push_back(to_hole(parse_shape((*holes)[i], index(hp, i), false)));
      }
    }
    if (const json* regions = g.find("regions")) {
      const std::string rp = g.at("regions");
      for (std::size_t i = 0; i < as_array(*regions, rp).size(); ++i) {
        Obj r((*regions)[i], index(rp, i));
        Region region;
        region.tag = as_string(r.require("tag"), r.at("tag"));
        region.shape = parse_shape(r.require("shape"), r.at("shape"), true);
        r.finish();
        c.geometry.regions.push_back(std::move(region));
      }
    }
    g.finish();
  }
  {
    Obj m(root.require("material"), "material");
    c.material = parse_moduli(m);
    if (const json* regions = m.find("regions")) {
      const std::string rp = m.at("regions");
      if (!regions->is_object()) throw ConfigError(rp, "expected an object keyed by region tag");
      for (const auto& [tag, value] : regions->items()) {
        Obj r(value, child(rp, tag));
        c.region_materials.emplace(tag, parse_moduli(r));
        r.finish();
      }
    }
    m.finish();
  }
  if (const json* mesh = root.find("mesh")) {
    Obj m(*mesh, "mesh");
    c.n = m.integer("n", c.n);
    c.mesh.hole_segments = m.integer("hole_segments", c.mesh.hole_segments);
    c.mesh.snap_factor = m.number("snap_factor", c.mesh.snap_factor);
    m.finish();
  }
  if (const json* bc = root.find("bc_mode")) c.bc = parse_bc(as_string(*bc, "bc_mode"), "bc_mode");
  if (const json* solver = root.find("solver")) {
    Obj s(*solver, "solver");
    if (const json* k = s.find("kind")) c.solver.kind = parse_kind(as_string(*k, s.at("kind")), s.at("kind"));
    c.solver.rel_tol = s.number("rel_tol", c.solver.rel_tol);
    c.solver.max_iterations = s.integer("max_iterations", c.solver.max_iterations);
    if (const json* q = s.find("quadrature")) {
      c.solver.quadrature = parse_quadrature(as_string(*q, s.at("quadrature")), s.at("quadrature"));
    }
    s.finish();
  }
  if (const json* sweep = root.find("sweep")) {
    Obj s(*sweep, "sweep");
    if (const json* v = s.find("nu_list")) c.nu_list = number_list(*v, s.at("nu_list"));
    if (const json* grid = s.find("kg_grid")) {
      Obj k(*grid, s.at("kg_grid"));
      c.k_list = number_list(k.require("K"), k.at("K"));
      c.g_list = number_list(k.require("G"), k.at("G"));
      k.finish();
    }
    s.finish();
  }
  if (const json* verify = root.find("verify")) {
    Obj v(*verify, "verify");
    c.verify.n = v.integer("n", c.verify.n);
    c.verify.n_coarse = v.integer("n_coarse", c.verify.n_coarse);
    c.verify.n_quick = v.integer("n_quick", c.verify.n_quick);
    if (const json* r = v.find("refinement")) {
      c.verify.refinement.clear();
      const std::string rp = v.at("refinement");
      for (std::size_t i = 0; i < as_array(*r, rp).size(); ++i) c.verify.refinement.push_back(as_int((*r)[i], index(rp, i)));
    }
    if (const json* s = v.find("seed")) {
      if (!s->is_number_unsigned()) throw ConfigError(v.at("seed"), "expected a non-negative integer");
      c.verify.seed = s->get<unsigned>();
    }
    c.verify.rho = v.number("rho", c.verify.rho);
    if (const json* b = v.find("run_n384")) c.verify.run_n384 = as_bool(*b, v.at("run_n384"));
    v.finish();
  }
  if (const json* out = root.find("output")) {
    Obj o(*out, "output");
    c.out_json = o.string("json", "");
    c.out_csv = o.string("csv", "");
    c.out_vtk = o.string("vtk", "");
    o.finish();
  }
  root.finish();
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_json(const RunConfig& c) {
  ojson j;
  j["schema"] = kConfigSchema;
  ojson g;
  g["l1"] = c.geometry.l1;
  g["l2"] = c.geometry.l2;
  if (c.geometry.clearance) g["clearance"] = *c.geometry.clearance;
  g["holes"] = ojson::array();
  for (const Hole& h : c.geometry.holes) g["holes"].push_back(shape_json(to_shape(h)));
  g["regions"] = ojson::array();
  for (const Region& r : c.geometry.regions) g["regions"].push_back({{"tag", r.tag}, {"shape", shape_json(r.shape)}});
  j["geometry"] = g;
  ojson m = moduli_json(c.material);
  ojson regions = ojson::object();
  for (const auto& [tag, spec] : c.region_materials) regions[tag] = moduli_json(spec);
  m["regions"] = regions;
  j["material"] = m;
  j["mesh"] = {{"n", c.n}, {"hole_segments", c.mesh.hole_segments}, {"snap_factor", c.mesh.snap_factor}};
  j["bc_mode"] = to_string(c.bc);
  j["solver"] = {{"kind", to_string(c.solver.kind)},
                 {"rel_tol", c.solver.rel_tol},
                 {"max_iterations", c.solver.max_iterations},
                 {"quadrature", to_string(c.solver.quadrature)}};
  j["sweep"] = {{"nu_list", c.nu_list}};
  if (!c.k_list.empty()) j["sweep"]["kg_grid"] = {{"K", c.k_list}, {"G", c.g_list}};
  j["verify"] = {{"n", c.verify.n},
                 {"n_coarse", c.verify.n_coarse},
                 {"n_quick", c.verify.n_quick},
                 {"refinement", c.verify.refinement},
                 {"seed", c.verify.seed},
                 {"rho", c.verify.rho},
                 {"run_n384", c.verify.run_n384}};
  j["output"] = {{"json", c.out_json}, {"csv", c.out_csv}, {"vtk", c.out_vtk}};
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : config_json(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace cellhom

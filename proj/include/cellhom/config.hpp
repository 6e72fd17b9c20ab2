#pragma once

#include <map>
#include <string>
#include <vector>

#include "cellhom/elastic_tensor.hpp"
#include "cellhom/fem.hpp"
#include "cellhom/geometry.hpp"
#include "cellhom/mesh.hpp"
#include "cellhom/verify.hpp"

namespace cellhom {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kConfigSchema = "cellhom-config/1";
inline constexpr const char* kResultSchema = "cellhom-result/1";

/// Moduli as written in a configuration: engineering constants under a planar
/// model, or K and G directly.
struct ModuliSpec {
  std::string model = "plane_strain";  // plane_strain | plane_stress | direct_KG
  double young = 1.0;
  double poisson = 0.3;
  double bulk = 0.0;
  double shear = 0.0;

  IsotropicModuli moduli() const;
  friend bool operator==(const ModuliSpec&, const ModuliSpec&) = default;
};

struct RunConfig {
  CellGeometry geometry;
  ModuliSpec material;
  std::map<std::string, ModuliSpec> region_materials;
  int n = 64;
  MeshOptions mesh;
  BcMode bc = BcMode::periodic;
  SolverOptions solver;
  std::vector<double> nu_list;
  std::vector<double> k_list;
  std::vector<double> g_list;
  VerifyConfig verify;
  std::string out_json;
  std::string out_csv;  // prefix of sweep tables
  std::string out_vtk;

  MaterialField material_field() const;
};

/// Parses and validates a configuration document. Throws ConfigError naming the
/// offending field; `source` prefixes syntax errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Field checks that depend on several sections (geometry validity, moduli ranges,
/// region overrides). parse_config calls this; call again after overriding fields.
void validate_config(const RunConfig& c);

/// Canonical JSON echo with every field present; parse_config(echo) reproduces c.
std::string config_json(const RunConfig& c);

/// FNV-1a 64 of the canonical echo, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace cellhom

#include <gtest/gtest.h>

#include <string>

#include "cellhom/config.hpp"
#include "cellhom/errors.hpp"

using namespace cellhom;

namespace {

const std::string kDir = CELLHOM_CONFIG_DIR;

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with_geometry(const std::string& geometry, const std::string& extra = "") {
  const std::string material = extra.find("\"material\"") == std::string::npos ? R"(, "material": {"E": 1, "nu": 0.3})" : "";
  return R"({"schema": "cellhom-config/1", "geometry": )" + geometry + material + extra + "}";
}

}  // namespace

TEST(Load, ShippedConfigsRoundTrip) {
  for (const char* name : {"paper_cell.json", "homogeneous.json", "square_cell.json", "two_phase.json"}) {
    const RunConfig c = load_config(kDir + "/" + name);
    const std::string echo = config_json(c);
    const RunConfig again = parse_config(echo);
    EXPECT_EQ(config_json(again), echo) << name;
    EXPECT_EQ(config_hash(again), config_hash(c)) << name;
  }
}

TEST(Load, PaperCellContents) {
  const RunConfig c = load_config(kDir + "/paper_cell.json");
  EXPECT_DOUBLE_EQ(c.geometry.l1, 2.0);
  ASSERT_EQ(c.geometry.holes.size(), 1u);
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.nu_list.size(), 7u);
  EXPECT_EQ(c.k_list.size(), 3u);
  EXPECT_EQ(c.bc, BcMode::periodic);
  EXPECT_NEAR(c.material.moduli().shear(), 1.0 / 2.6, 1e-15);
}

TEST(Load, TwoPhaseRegions) {
  const RunConfig c = load_config(kDir + "/two_phase.json");
  ASSERT_EQ(c.region_materials.count("ring"), 1u);
  EXPECT_DOUBLE_EQ(c.region_materials.at("ring").young, 3.0);
  EXPECT_FALSE(c.material_field().is_uniform());
}

TEST(Load, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/cellhom.json"), ConfigError);
}

TEST(Parse, DefaultsAndHashStability) {
  const RunConfig a = parse_config(R"({"schema": "cellhom-config/1", "geometry": {"l1": 1, "l2": 1}, "material": {"E": 1, "nu": 0.3}})");
  EXPECT_EQ(a.n, 64);
  EXPECT_EQ(a.material.model, "plane_strain");
  const std::string h = config_hash(a);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(config_hash(parse_config(R"({"material": {"nu": 0.3, "E": 1}, "geometry": {"l2": 1.0, "l1": 1.0}, "schema": "cellhom-config/1"})")), h);
  RunConfig b = a;
  b.n = 32;
  EXPECT_NE(config_hash(b), h);
}

TEST(Parse, ErrorsNameTheField) {
  EXPECT_EQ(error_of(with_geometry(R"({"l1": 2, "l2": 1, "holes": [{"type": "circle", "center": [1, 0.5]}]})")),
            "geometry.holes[0].radius: missing required field");
  EXPECT_NE(error_of(with_geometry(R"({"l1": 1, "l2": 1, "colour": 1})")).find("geometry.colour: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of(with_geometry(R"({"l1": 1, "l2": 1})", R"(, "mesh": {"n": 4})")).find("mesh.n"),
            std::string::npos);
  EXPECT_NE(error_of(with_geometry(R"({"l1": 1, "l2": 1})", R"(, "sweep": {"nu_list": [0.2, 0.5]})"))
                .find("sweep.nu_list[1]"),
            std::string::npos);
  EXPECT_NE(error_of(with_geometry(R"({"l1": 1, "l2": 1})",
                                   R"(, "material": {"E": 1, "nu": 0.3, "regions": {"core": {"E": 2, "nu": 0.1}}})"))
                .find("material.regions.core"),
            std::string::npos);
  EXPECT_NE(error_of(with_geometry(R"({"l1": 1, "l2": 1, "holes": [{"type": "hexagon"}]})")).find("geometry.holes[0]"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"schema": "other/2", "geometry": {"l1": 1, "l2": 1}, "material": {"E": 1, "nu": 0.3}})").find("schema"), std::string::npos);
}

TEST(Parse, SyntaxErrorHasPosition) {
  const std::string msg = error_of("{\n \"schema\": \"cellhom-config/1\",\n \"geometry\": {\"l1\": 2.0,, }\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Parse, GeometryValidationSurfaces) {
  const std::string msg = error_of(with_geometry(R"({"l1": 1, "l2": 1, "holes": [{"type": "circle", "center": [0.5, 0.5], "radius": 0.6}]})"));
  EXPECT_EQ(msg.rfind("geometry:", 0), 0u) << msg;
}

TEST(Parse, AllShapesAndModels) {
  const RunConfig c = parse_config(R"({
    "schema": "cellhom-config/1",
    "geometry": {"l1": 2, "l2": 1, "clearance": 0.01, "holes": [
      {"type": "ellipse", "center": [0.5, 0.5], "semi_a": 0.2, "semi_b": 0.1, "angle": 0.3},
      {"type": "polygon", "vertices": [[1.2, 0.2], [1.6, 0.2], [1.4, 0.6]]}]},
    "material": {"model": "plane_stress", "E": 2, "nu": 0.25},
    "mesh": {"n": 16, "hole_segments": 0, "snap_factor": 0.3},
    "bc_mode": "dirichlet_affine",
    "solver": {"kind": "cg", "rel_tol": 1e-11, "max_iterations": 500, "quadrature": "full"},
    "verify": {"n": 96, "n_coarse": 48, "refinement": [32, 64], "seed": 7, "rho": 0.1}
  })");
  EXPECT_EQ(c.geometry.holes.size(), 2u);
  EXPECT_EQ(c.bc, BcMode::dirichlet_affine);
  EXPECT_EQ(c.solver.kind, SolverKind::cg);
  EXPECT_EQ(c.verify.seed, 7u);
  EXPECT_EQ(config_json(parse_config(config_json(c))), config_json(c));
  const IsotropicModuli m = c.material.moduli();
  EXPECT_NEAR(m.shear(), 2.0 / 2.5, 1e-15);
}

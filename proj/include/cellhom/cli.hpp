#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cellhom/config.hpp"
#include "cellhom/homog.hpp"
#include "cellhom/mesh.hpp"

namespace cellhom::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kRuntime = 3 };

/// Entry point of the `cellhom` executable. Output goes to the given streams so the
/// commands can run in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Result document of `homogenize`. Everything except `timestamp` is a function of
/// the configuration alone.
std::string result_json(const RunConfig& config, const Mesh& mesh, const EffectiveResult& result,
                        const std::string& timestamp);

/// Writes to `path.tmp` and renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Table layouts: one row per contracted entry, one column per Poisson ratio.
std::string stiffness_table_csv(const std::vector<double>& nu, const SweepResult& sweep);
std::string geometric_table_csv(const std::vector<double>& nu, const SweepResult& sweep);
/// One row per (K, G) pair with the B and D entries.
std::string kg_grid_csv(const SweepResult& sweep);

}  // namespace cellhom::cli

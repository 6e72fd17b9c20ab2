#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cellhom {

enum class VerifyLevel { quick, full };
enum class CheckStatus { pass, fail, info };

std::string to_string(VerifyLevel l);
std::string to_string(CheckStatus s);
std::optional<VerifyLevel> parse_verify_level(const std::string& s);

struct CheckResult {
  std::string id;
  std::string criterion;  // "AC1".."AC11", empty for supporting checks
  std::string title;
  CheckStatus status = CheckStatus::fail;
  double measured = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
};

struct VerifyConfig {
  int n = 192;         // fine resolution of the full level
  int n_coarse = 96;   // partner resolution for refinement trends
  std::vector<int> refinement{64, 128, 192};
  int n_quick = 32;
  unsigned seed = 20240611;
  double rho = 0.2;
  bool run_n384 = false;
  /// Mutation switch: extract D with -E instead of E.
  bool corrupt_shift = false;
};

struct VerificationReport {
  VerifyLevel level = VerifyLevel::quick;
  VerifyConfig config;
  std::vector<CheckResult> checks;  // sorted by id
  double seconds = 0.0;

  bool passed() const;
  const CheckResult* find(const std::string& id) const;
};

/// Runs every check of the level. Failures become report entries; `progress` is
/// called after each check in execution order.
VerificationReport run_suite(const VerifyConfig& config, VerifyLevel level,
                             const std::function<void(const CheckResult&)>& progress = {});

std::string report_json(const VerificationReport& r);
std::string report_table(const VerificationReport& r);

}  // namespace cellhom

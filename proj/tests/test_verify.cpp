#include <gtest/gtest.h>

#include "json.hpp"
#include <set>

#include "cellhom/verify.hpp"

using namespace cellhom;

namespace {

const VerificationReport& quick_report() {
  static const VerificationReport r = run_suite(VerifyConfig{}, VerifyLevel::quick);
  return r;
}

}  // namespace

TEST(Suite, QuickLevelPasses) {
  const VerificationReport& r = quick_report();
  for (const CheckResult& c : r.checks) EXPECT_NE(c.status, CheckStatus::fail) << c.id << ": " << c.detail;
  EXPECT_TRUE(r.passed());
  for (const char* id : {"AC01-homogeneous-exactness", "AC08-galerkin-consistency", "AC09-dense-oracle",
                         "AC10-geomrepr-crosscheck", "AC11-property-suite"}) {
    EXPECT_NE(r.find(id), nullptr) << id;
  }
  EXPECT_EQ(r.find("AC02-table1-stiffness"), nullptr);
}

TEST(Suite, ChecksSortedAndUnique) {
  const VerificationReport& r = quick_report();
  std::set<std::string> ids;
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    EXPECT_TRUE(ids.insert(r.checks[i].id).second);
    if (i > 0) {
      EXPECT_LT(r.checks[i - 1].id, r.checks[i].id);
    }
  }
}

TEST(Suite, ProgressSeesEveryCheck) {
  int calls = 0;
  const VerificationReport r = run_suite(VerifyConfig{}, VerifyLevel::quick, [&](const CheckResult&) { ++calls; });
  EXPECT_EQ(calls, static_cast<int>(r.checks.size()));
}

TEST(Suite, ShiftMutationIsCaught) {
  VerifyConfig c;
  c.corrupt_shift = true;
  const VerificationReport r = run_suite(c, VerifyLevel::quick);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.find("AC01-homogeneous-exactness")->status, CheckStatus::fail);
  EXPECT_EQ(r.find("AC11-property-suite")->status, CheckStatus::fail);
}

TEST(Report, JsonAndTable) {
  const VerificationReport& r = quick_report();
  const nlohmann::json j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j.at("level"), "quick");
  EXPECT_TRUE(j.at("passed").get<bool>());
  ASSERT_EQ(j.at("checks").size(), r.checks.size());
  EXPECT_EQ(j.at("checks")[0].at("id"), r.checks[0].id);
  const std::string table = report_table(r);
  EXPECT_NE(table.find("overall: PASS"), std::string::npos);
}

TEST(Level, Parsing) {
  EXPECT_EQ(parse_verify_level("quick"), VerifyLevel::quick);
  EXPECT_EQ(parse_verify_level("full"), VerifyLevel::full);
  EXPECT_FALSE(parse_verify_level("medium").has_value());
  EXPECT_EQ(to_string(CheckStatus::info), "info");
}

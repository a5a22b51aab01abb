// Copyright 2026 The tsvf-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tsvf/shell.hpp"

namespace tsvf::shell {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("tsvf_shell_test_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::size_t column_index(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.columns[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

TEST(Format, Reals) {
  EXPECT_EQ(format_real(1.0), "1.000000000000e0");
  EXPECT_EQ(format_real(-0.0), "0.000000000000e0");
  EXPECT_EQ(format_real(0.0), "0.000000000000e0");
  EXPECT_EQ(format_real(1.5e-7), "1.500000000000e-7");
  EXPECT_EQ(format_real(-12345.678), "-1.234567800000e4");
  EXPECT_EQ(format_real(2.0e300), "2.000000000000e300");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_real(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_NEAR(std::stod(format_real(std::sqrt(2.0))), std::sqrt(2.0), 1e-12);
}

TEST(Format, Complex) {
  EXPECT_EQ(format_complex({1.0, -2.0}), "1.000000000000e0-2.000000000000e0i");
  EXPECT_EQ(format_complex({0.5, 0.25}), "5.000000000000e-1+2.500000000000e-1i");
  EXPECT_EQ(format_complex({-0.0, -0.0}), "0.000000000000e0+0.000000000000e0i");
}

TEST(Format, CsvAndJson) {
  Table t{"demo", {"name", "count", "value", "w", "missing"}, {}};
  t.rows.push_back({std::string("a"), std::int64_t{3}, 0.5, Complex(1.0, -1.0), std::monostate{}});
  t.rows.push_back({std::string("b"), std::int64_t{-1}, std::numeric_limits<double>::infinity(), Complex(0.0, 0.0),
                    std::monostate{}});
  EXPECT_EQ(to_csv(t),
            "name,count,value,w,missing\n"
            "a,3,5.000000000000e-1,1.000000000000e0-1.000000000000e0i,\n"
            "b,-1,inf,0.000000000000e0+0.000000000000e0i,\n");
  const auto j = nlohmann::json::parse(to_json(t));
  EXPECT_EQ(j["plan"], "demo");
  EXPECT_EQ(j["columns"].size(), 5u);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["name"], "a");
  EXPECT_EQ(j["rows"][0]["count"], 3);
  EXPECT_DOUBLE_EQ(j["rows"][0]["value"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j["rows"][0]["w"]["im"].get<double>(), -1.0);
  EXPECT_TRUE(j["rows"][0]["missing"].is_null());
  EXPECT_EQ(j["rows"][1]["value"], "inf");
}

TEST(Presets, NamesResolve) {
  const auto names = preset_names();
  ASSERT_GE(names.size(), 6u);
  for (const std::string& n : names) {
    const auto text = preset_text(n);
    ASSERT_TRUE(text.has_value()) << n;
    std::vector<ParseDiagnostic> diags;
    EXPECT_TRUE(load_scenario(*text, std::nullopt, diags).has_value()) << n;
  }
  EXPECT_FALSE(preset_text("no-such-preset").has_value());
}

TEST(RunPlan, WeakValueTable) {
  std::vector<ParseDiagnostic> diags;
  const auto sc = load_scenario(*preset_text("spin-splus-sminus"), std::nullopt, diags);
  ASSERT_TRUE(sc.has_value());
  const Table t = run_plan(*sc);
  EXPECT_EQ(t.plan, "weakvalue");
  ASSERT_EQ(t.rows.size(), 3u);
  const std::size_t name = column_index(t, "observable");
  const std::size_t analytic = column_index(t, "analytic");
  const std::size_t numeric = column_index(t, "numeric");
  const std::map<std::string, Complex> expected{{"sminus", 0.0}, {"splus", std::sqrt(2.0)}, {"sz", 1.0}};
  for (const auto& row : t.rows) {
    const std::string obs = std::get<std::string>(row[name]);
    EXPECT_LT(std::abs(std::get<Complex>(row[analytic]) - expected.at(obs)), 1e-12) << obs;
    EXPECT_LT(std::abs(std::get<Complex>(row[numeric]) - expected.at(obs)), 1e-3) << obs;
  }
}

TEST(RunPlan, ScheduleOverride) {
  std::vector<ParseDiagnostic> diags;
  const auto sc = load_scenario(*preset_text("spin-sz"), std::nullopt, diags);
  ASSERT_TRUE(sc.has_value());
  const Table t = run_plan(*sc, ScheduleOverride{0.001, 0.008, 4});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(std::get<double>(t.rows[0][column_index(t, "g_max")]), 0.008);
  EXPECT_NEAR(std::get<double>(t.rows[0][column_index(t, "g_min")]), 0.001, 1e-18);
  EXPECT_THROW(run_plan(*sc, ScheduleOverride{0.01, 0.001, 4}), UsageError);
  EXPECT_THROW(run_plan(*sc, ScheduleOverride{std::nullopt, std::nullopt, 1}), UsageError);
}

TEST(RunPlan, PlanOverrideRetargets) {
  std::vector<ParseDiagnostic> diags;
  const auto sc = load_scenario(*preset_text("spin-sz"), PlanKind::sweep, diags);
  ASSERT_TRUE(sc.has_value()) << (diags.empty() ? "" : format_diagnostic(diags[0]));
  const Table t = run_plan(*sc);
  EXPECT_EQ(t.plan, "sweep");
  EXPECT_FALSE(t.rows.empty());
}

TEST(Cli, PresetsAndSuccess) {
  const CliResult list = cli({"presets"});
  EXPECT_EQ(list.code, kExitOk);
  EXPECT_NE(list.out.find("spin-sz\n"), std::string::npos);
  EXPECT_NE(list.out.find("nested-mzi\n"), std::string::npos);

  const CliResult a = cli({"weakvalue", "--preset", "spin-sz"});
  EXPECT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out.rfind("observable,expectation,analytic,numeric,", 0), 0u) << a.out;
  EXPECT_TRUE(a.err.empty()) << a.err;
  const CliResult b = cli({"weakvalue", "--preset", "spin-sz"});
  EXPECT_EQ(a.out, b.out);

  const CliResult j = cli({"run", "--preset", "spin-sz", "--format", "json"});
  ASSERT_EQ(j.code, kExitOk) << j.err;
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["plan"], "weakvalue");
  EXPECT_EQ(doc["rows"][0]["observable"], "sz");
}

TEST(Cli, FileAndOutPath) {
  const fs::path src = write_temp("spin.scn", std::string(*preset_text("spin-sz")));
  const fs::path dest = fs::temp_directory_path() / "tsvf_shell_test_out.csv";
  fs::remove(dest);
  const CliResult r = cli({"run", "weakvalue", src.string(), "--out", dest.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(dest);
  std::stringstream written;
  written << in.rdbuf();
  EXPECT_EQ(written.str(), cli({"weakvalue", src.string()}).out);
}

TEST(Cli, DiagnosticsExitOneWithoutStdout) {
  const fs::path bad = write_temp("bad.scn", "tsvf-scenario v1\n[system]\ndim = 2\n[state a]\namps = 1, 0.5+\n");
  const CliResult r = cli({"weakvalue", bad.string()});
  EXPECT_EQ(r.code, kExitDiagnostics);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find(bad.string() + ":5:11: error: malformed complex literal"), std::string::npos) << r.err;

  for (const std::vector<std::string>& args :
       {std::vector<std::string>{}, {"bogus"}, {"weakvalue", "--preset", "nope"}, {"weakvalue"},
        {"weakvalue", "--preset", "spin-sz", "--points", "1"}, {"weakvalue", "--preset", "spin-sz", "--format", "xml"},
        {"weakvalue", "/nonexistent/file.scn"}}) {
    const CliResult e = cli(args);
    EXPECT_EQ(e.code, kExitDiagnostics) << ::testing::PrintToString(args) << e.err;
    EXPECT_TRUE(e.out.empty());
    EXPECT_FALSE(e.err.empty());
  }
}

TEST(Cli, DarkDetectorIsRuntimeError) {
  const fs::path dark = write_temp("dark.scn",
                                   "tsvf-scenario v1\n[network]\nmodes = 2\nsource = 0\nbs = 0, 1, 0.5\n"
                                   "slice = A:0, B:1\nbs = 0, 1, 0.5\ndetector = D0:0, D1:1\npostselect = D0\n"
                                   "[experiment]\nplan = presence\n");
  const CliResult r = cli({"presence", dark.string()});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
}

}  // namespace
}  // namespace tsvf::shell

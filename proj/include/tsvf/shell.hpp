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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsvf/qcore.hpp"
#include "tsvf/scenario.hpp"

namespace tsvf::shell {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitRuntime = 2;

/// Empty, text, count, real or complex.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double, Complex>;

struct Table {
  std::string plan;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Scientific notation with 12 fraction digits and a bare exponent:
/// 1.000000000000e0, -2.500000000000e-3. Negative zero prints as zero;
/// non-finite values print as inf, -inf, nan.
std::string format_real(double x);
/// re+imi or re-imi, both parts in format_real notation.
std::string format_complex(Complex z);

/// Header row plus one line per row, comma separated, '\n' terminated.
std::string to_csv(const Table& table);
/// {"plan": ..., "columns": [...], "rows": [{column: value}, ...]}.
/// Complex cells become {"re": x, "im": y}; non-finite reals become strings.
std::string to_json(const Table& table);

/// Bad command-line input (flags, preset names); reported like diagnostics.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Overrides for the g schedule; missing fields come from the plan's schedule.
struct ScheduleOverride {
  std::optional<double> g_min;
  std::optional<double> g_max;
  std::optional<std::size_t> points;

  bool empty() const { return !g_min && !g_max && !points; }
};

/// Parses and checks a scenario for the given plan. When `plan` differs from
/// the file's plan, keys that only make sense for the file's plan are dropped.
/// Diagnostics (including warnings) are appended to `diagnostics`.
std::optional<CheckedScenario> load_scenario(std::string_view text, std::optional<PlanKind> plan,
                                             std::vector<ParseDiagnostic>& diagnostics);

/// Evaluates the scenario's plan. Rows are ordered by target name, then by
/// g descending (spreads ascending). Throws UsageError for an invalid schedule
/// override and tsvf::Error on runtime failures.
Table run_plan(const CheckedScenario& scenario, const ScheduleOverride& schedule = {});

/// Built-in scenarios: spin-sz, spin-splus-sminus, spin-flipped,
/// eigenvalue-zero, nested-mzi, compare-limits-demo.
std::optional<std::string_view> preset_text(std::string_view name);
std::vector<std::string> preset_names();

/// Full command line (without the program name). Data goes to `out` (or the
/// --out file) only on success; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsvf::shell

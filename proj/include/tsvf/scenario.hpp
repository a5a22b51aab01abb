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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsvf/interferometer.hpp"
#include "tsvf/limits.hpp"
#include "tsvf/pointer.hpp"
#include "tsvf/qcore.hpp"
#include "tsvf/weakmeas.hpp"

namespace tsvf {

// Scenario files (.scn, UTF-8) are line oriented:
//
//   tsvf-scenario v1                 required first line
//   # comment                        '#' starts a comment anywhere
//   [system]        dim = 2
//   [state up_x]    amps = 0.7071067811865476, 0.7071067811865476
//   [operator sp]   expr = (pauli_z + pauli_x) / sqrt(2)
//   [operator m]    matrix = 1, 0; 0, -1
//   [pointer]       kind = gaussian_grid, spread, half_width, points | kind = qubit, generator
//   [selection]     pre = up_x   post = up_z
//   [network]       modes, source, then ordered bs / phase / slice lines, detector lines, postselect
//   [experiment]    plan = weakvalue | sweep | trace | presence | compare_limits, plus plan keys
//
// Complex literals are a, bi, a+bi, a-bi (decimal reals, optional exponent).
// Real-valued keys also take scalar expressions (numbers, pi, sqrt(x), + - * /).
// Operator expressions add pauli_x|pauli_y|pauli_z, identity(n),
// projector(<state>) and earlier operator names.

inline constexpr std::string_view kScenarioMagic = "tsvf-scenario v1";
inline constexpr std::size_t kMaxSystemDim = 16;

enum class Severity { error, warning };

struct ParseDiagnostic {
  std::size_t line = 0;    // 1-based
  std::size_t column = 0;  // 1-based, in bytes
  std::string message;
  Severity severity = Severity::error;
};

std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name = "");

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct NamedState {
  std::string name;
  CVector amps;
  SourcePos pos;  // the amps value
};

enum class OperatorForm { expression, matrix };

struct NamedOperator {
  std::string name;
  OperatorForm form = OperatorForm::expression;
  std::string expression;  // source text for the expression form
  LinearOperator value;
  SourcePos pos;  // the section name
};

struct SelectionRef {
  std::string pre;
  std::string post;
  SourcePos pre_pos;
  SourcePos post_pos;
};

enum class PlanKind { weakvalue, sweep, trace, presence, compare_limits };
std::string to_string(PlanKind k);

struct ExperimentPlan {
  PlanKind kind = PlanKind::weakvalue;
  std::vector<std::string> observables;
  std::vector<double> g_schedule;
  std::vector<double> spreads;
  std::optional<double> fixed_g;
  std::optional<double> fixed_spread;
  std::vector<Metric> metrics;
  std::vector<std::string> arms;
  std::optional<TraceEnvironment> environment;
  /// Value position of every key present, for diagnostics.
  std::map<std::string, SourcePos> key_pos;
  /// Value position of each observable / arm entry.
  std::vector<SourcePos> observable_pos;
  std::vector<SourcePos> arm_pos;
  std::vector<SourcePos> g_pos;
};

struct ScenarioDoc {
  std::optional<std::size_t> system_dim;
  std::vector<NamedState> states;
  std::vector<NamedOperator> operators;
  std::optional<PointerModel> pointer;
  SourcePos pointer_pos;
  /// Value position of each pointer key present.
  std::map<std::string, SourcePos> pointer_key_pos;
  std::optional<SelectionRef> selection;
  std::optional<OpticalNetwork> network;
  ExperimentPlan plan;

  const NamedState* find_state(std::string_view name) const;
  const NamedOperator* find_operator(std::string_view name) const;
};

/// Structural equality: names, values, models and plans; source positions and
/// operator spelling are ignored.
bool structurally_equal(const ScenarioDoc& a, const ScenarioDoc& b);

struct ParseResult {
  std::optional<ScenarioDoc> doc;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return doc.has_value(); }
};

/// Never throws; returns a document only when there are no errors.
ParseResult parse(std::string_view text);

/// Canonical text that parses back to a structurally equal document.
std::string serialize(const ScenarioDoc& doc);

/// A document that passed semantic checks. Selection states are normalized.
struct CheckedScenario {
  ScenarioDoc doc;

  const LinearOperator& op(std::string_view name) const;
  StateVector state(std::string_view name) const;
  PrePostSelection selection() const;
  PointerModel pointer_model() const;
};

struct CheckResult {
  std::optional<CheckedScenario> scenario;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

/// Hermitian observables, normalized selections (auto-normalized with a
/// warning when off by less than 1e-6), pointer validity, and plan parameter ranges.
CheckResult validate_semantics(const ScenarioDoc& doc);

}  // namespace tsvf

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

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsvf/shell.hpp"

namespace tsvf::shell {

namespace {

struct Invocation {
  std::string format = "csv";
  std::string out_path;
  std::string preset;
  std::vector<std::string> positionals;
  ScheduleOverride schedule;
};

const std::map<std::string, PlanKind> kPlanCommands{{"weakvalue", PlanKind::weakvalue},
                                                    {"sweep", PlanKind::sweep},
                                                    {"trace", PlanKind::trace},
                                                    {"presence", PlanKind::presence},
                                                    {"compare-limits", PlanKind::compare_limits}};

void add_common(CLI::App* cmd, Invocation& inv, const std::string& positional_help) {
  cmd->add_option("args", inv.positionals, positional_help);
  cmd->add_option("--format", inv.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--g-min", inv.schedule.g_min, "Smallest coupling of a geometric g schedule");
  cmd->add_option("--g-max", inv.schedule.g_max, "Largest coupling of a geometric g schedule");
  cmd->add_option("--points", inv.schedule.points, "Number of g points");
  cmd->add_option("--out", inv.out_path, "Write output to this path instead of standard output");
  cmd->add_option("--preset", inv.preset, "Built-in scenario instead of a file");
}

struct Source {
  std::string name;
  std::string text;
};

Source read_source(const Invocation& inv, const std::vector<std::string>& files) {
  if (!inv.preset.empty()) {
    if (!files.empty()) throw UsageError("give either a scenario file or --preset, not both");
    const auto text = preset_text(inv.preset);
    if (!text) {
      std::string names;
      for (const std::string& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("unknown preset '" + inv.preset + "' (available: " + names + ")");
    }
    return {"preset:" + inv.preset, std::string(*text)};
  }
  if (files.size() != 1) throw UsageError("expected one scenario file or --preset");
  std::ifstream in(files.front(), std::ios::binary);
  if (!in) throw UsageError("cannot read " + files.front());
  std::ostringstream buf;
  buf << in.rdbuf();
  return {files.front(), buf.str()};
}

int execute(const Invocation& inv, std::optional<PlanKind> plan, const std::vector<std::string>& files,
            std::ostream& out, std::ostream& err) {
  std::string payload;
  try {
    const Source src = read_source(inv, files);
    std::vector<ParseDiagnostic> diagnostics;
    const auto scenario = load_scenario(src.text, plan, diagnostics);
    for (const ParseDiagnostic& d : diagnostics) err << format_diagnostic(d, src.name) << "\n";
    if (!scenario) return kExitDiagnostics;
    const Table table = run_plan(*scenario, inv.schedule);
    payload = inv.format == "json" ? to_json(table) : to_csv(table);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDiagnostics;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  if (inv.out_path.empty()) {
    out << payload;
    out.flush();
    return out ? kExitOk : kExitRuntime;
  }
  std::ofstream file(inv.out_path, std::ios::binary | std::ios::trunc);
  file << payload;
  file.close();
  if (!file) {
    err << "error: cannot write " << inv.out_path << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-measurement and two-state-vector laboratory", "tsvf"};
  app.require_subcommand(1);
  Invocation inv;

  std::map<CLI::App*, std::optional<PlanKind>> commands;
  for (const auto& [name, kind] : kPlanCommands) {
    CLI::App* cmd = app.add_subcommand(name, "Run the " + to_string(kind) + " plan on a scenario");
    add_common(cmd, inv, "Scenario file");
    commands[cmd] = kind;
  }
  CLI::App* run = app.add_subcommand("run", "Run the scenario's own plan, or the named plan first");
  add_common(run, inv, "[plan] scenario file");
  commands[run] = std::nullopt;
  CLI::App* presets = app.add_subcommand("presets", "List built-in scenarios");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDiagnostics;
  }

  if (presets->parsed()) {
    for (const std::string& n : preset_names()) out << n << "\n";
    return kExitOk;
  }
  for (const auto& [cmd, kind] : commands) {
    if (!cmd->parsed()) continue;
    if (cmd == run) {
      std::vector<std::string> files = inv.positionals;
      std::optional<PlanKind> plan;
      if (!files.empty()) {
        const auto it = kPlanCommands.find(files.front());
        if (it != kPlanCommands.end()) {
          plan = it->second;
          files.erase(files.begin());
        }
      }
      return execute(inv, plan, files, out, err);
    }
    return execute(inv, kind, inv.positionals, out, err);
  }
  return kExitDiagnostics;
}

}  // namespace tsvf::shell

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

#include "tsvf/shell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>

#include "json.hpp"

namespace tsvf::shell {

namespace {

const std::vector<double> kDefaultSpreads{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};

std::vector<std::string> sorted_unique(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool uses_observables(PlanKind k) {
  return k == PlanKind::weakvalue || k == PlanKind::sweep || k == PlanKind::compare_limits;
}

bool uses_arms(PlanKind k) { return k == PlanKind::sweep || k == PlanKind::trace || k == PlanKind::presence; }

void retarget(ScenarioDoc& doc, PlanKind kind) {
  ExperimentPlan& plan = doc.plan;
  if (plan.kind == kind) return;
  ExperimentPlan next;
  next.kind = kind;
  if (uses_observables(kind)) {
    next.observables = plan.observables;
    next.observable_pos = plan.observable_pos;
  }
  if (uses_arms(kind)) {
    next.arms = plan.arms;
    next.arm_pos = plan.arm_pos;
  }
  if (kind == PlanKind::trace || kind == PlanKind::presence) next.environment = plan.environment;
  for (const char* key : {"observable", "arms", "environment"}) {
    if (plan.key_pos.count(key)) next.key_pos[key] = plan.key_pos.at(key);
  }
  plan = std::move(next);
}

void fill_defaults(ScenarioDoc& doc) {
  ExperimentPlan& plan = doc.plan;
  const bool wants_observables =
      plan.kind == PlanKind::weakvalue || plan.kind == PlanKind::compare_limits ||
      (plan.kind == PlanKind::sweep && !doc.network);
  if (wants_observables && plan.observables.empty()) {
    for (const NamedOperator& op : doc.operators) {
      if (op.value.is_hermitian()) plan.observables.push_back(op.name);
    }
  }
  const bool wants_arms = plan.kind == PlanKind::trace || plan.kind == PlanKind::presence ||
                          (plan.kind == PlanKind::sweep && doc.network && plan.observables.empty());
  if (wants_arms && plan.arms.empty() && doc.network) plan.arms = doc.network->arm_labels();
}

std::optional<std::string> missing_section(const ScenarioDoc& doc) {
  const std::string name = to_string(doc.plan.kind);
  switch (doc.plan.kind) {
    case PlanKind::weakvalue:
    case PlanKind::compare_limits:
      if (!doc.selection) return "plan " + name + " needs a [selection] section";
      if (doc.plan.observables.empty()) return "plan " + name + " needs a hermitian operator";
      break;
    case PlanKind::sweep:
      if (!doc.plan.observables.empty() && !doc.selection) return "plan sweep needs a [selection] section";
      if (doc.plan.observables.empty() && !doc.network) return "plan sweep needs an observable or a [network]";
      break;
    case PlanKind::trace:
    case PlanKind::presence:
      if (!doc.network) return "plan " + name + " needs a [network] section";
      break;
  }
  return std::nullopt;
}

std::vector<double> default_g(const CheckedScenario& sc) {
  const ExperimentPlan& plan = sc.doc.plan;
  switch (plan.kind) {
    case PlanKind::weakvalue:
      return default_schedule(sc.pointer_model());
    case PlanKind::compare_limits:
      return default_schedule(PointerModel::gaussian(plan.fixed_spread.value_or(CompareLimitsOptions{}.fixed_spread)));
    case PlanKind::sweep:
    case PlanKind::trace:
    case PlanKind::presence:
      return default_decade();
  }
  return default_decade();
}

std::vector<double> resolve_schedule(const CheckedScenario& sc, const ScheduleOverride& o) {
  const ExperimentPlan& plan = sc.doc.plan;
  std::vector<double> g = plan.g_schedule.empty() ? default_g(sc) : plan.g_schedule;
  if (o.empty()) return g;
  const double g_max = o.g_max.value_or(g.front());
  const double g_min = o.g_min.value_or(g.back());
  const std::size_t n = o.points.value_or(g.size());
  try {
    g = geometric_schedule(g_max, g_min, n);
    const bool fitted = plan.kind == PlanKind::sweep || plan.kind == PlanKind::presence;
    check_schedule(g, plan.kind == PlanKind::trace ? 1 : kMinFitPoints);
    if (fitted && g.front() / g.back() < 10.0 * (1.0 - 1e-9)) throw Error("g schedule must span at least one decade");
  } catch (const Error& ex) {
    throw UsageError(std::string("--g-max/--g-min/--points: ") + ex.what());
  }
  return g;
}

struct Target {
  std::string name;
  StateVector in;
  LinearOperator s;
};

std::vector<Target> sweep_targets(const CheckedScenario& sc) {
  const ExperimentPlan& plan = sc.doc.plan;
  std::vector<Target> targets;
  if (!plan.observables.empty()) {
    const StateVector pre = sc.selection().pre();
    for (const std::string& name : sorted_unique(plan.observables)) targets.push_back({name, pre, sc.op(name)});
    return targets;
  }
  const OpticalNetwork& net = *sc.doc.network;
  for (const std::string& arm : sorted_unique(plan.arms)) {
    const ArmLocation loc = *net.find_arm(arm);
    const StateVector forward = propagate(net, loc.slice);
    if (forward.squared_norm() <= 0.0) throw Error("no forward amplitude at slice of arm " + arm);
    targets.push_back({arm, forward, LinearOperator::projector(StateVector::basis(net.n_modes(), loc.mode))});
  }
  return targets;
}

Table run_weakvalue(const CheckedScenario& sc, const std::vector<double>& g) {
  Table t{"weakvalue",
          {"observable", "expectation", "analytic", "numeric", "abs_deviation", "extrapolation_residual", "g_max",
           "g_min", "points", "pointer"},
          {}};
  const PrePostSelection sel = sc.selection();
  const Pointer pointer(sc.pointer_model());
  for (const std::string& name : sorted_unique(sc.doc.plan.observables)) {
    const LinearOperator& s = sc.op(name);
    const Complex analytic = weak_value(sel, s);
    const WeakValueEstimate est = estimate_weak_value(sel, s, pointer, g);
    t.rows.push_back({name, expectation(sel.pre(), s), analytic, est.value, std::abs(est.value - analytic),
                      est.extrapolation_residual, g.front(), g.back(), static_cast<std::int64_t>(g.size()),
                      to_string(pointer.model().kind)});
  }
  return t;
}

Table run_sweep(const CheckedScenario& sc, const std::vector<double>& g) {
  Table t{"sweep",
          {"target", "metric", "g", "value", "fitted_order", "fitted_coefficient", "fit_residual", "floored"},
          {}};
  std::vector<Metric> metrics = sc.doc.plan.metrics;
  if (metrics.empty()) metrics.assign(std::begin(kAllMetrics), std::end(kAllMetrics));
  const Pointer pointer(sc.pointer_model());
  for (const Target& target : sweep_targets(sc)) {
    const MetricProbe probe(StateVector::normalize(target.in.amps()), pointer.ready(), target.s, pointer.generator());
    std::set<Metric> seen;
    for (Metric metric : metrics) {
      if (!seen.insert(metric).second) continue;
      const SweepResult r = sweep(probe, metric, g);
      for (std::size_t i = 0; i < r.g_values.size(); ++i) {
        t.rows.push_back({target.name, to_string(metric), r.g_values[i], r.metric_values[i], r.fitted_order,
                          r.fitted_coefficient, r.fit_residual, static_cast<std::int64_t>(r.floored)});
      }
    }
  }
  return t;
}

TraceEnvironment environment_of(const CheckedScenario& sc) {
  return sc.doc.plan.environment.value_or(TraceEnvironment::disturbed);
}

Table run_trace(const CheckedScenario& sc, const std::vector<double>& g) {
  Table t{"trace", {"arm", "g", "trace", "probability", "weak_value", "environment"}, {}};
  const OpticalNetwork& net = *sc.doc.network;
  const Pointer pointer(sc.pointer_model());
  const TraceEnvironment env = environment_of(sc);
  for (const std::string& arm : sorted_unique(sc.doc.plan.arms)) {
    const Complex w = arm_weak_value(net, arm);
    for (double gi : g) {
      const WeakTrace tr = weak_trace(net, arm, pointer, gi, env);
      t.rows.push_back({arm, tr.g, tr.trace, tr.probability, w, to_string(env)});
    }
  }
  return t;
}

Table run_presence(const CheckedScenario& sc, const std::vector<double>& g) {
  Table t{"presence",
          {"arm", "classification", "leading_order", "coefficient", "fit_residual", "weak_value", "environment"},
          {}};
  const OpticalNetwork& net = *sc.doc.network;
  const Pointer pointer(sc.pointer_model());
  const TraceEnvironment env = environment_of(sc);
  const PresenceReport report = classify_presence(net, sorted_unique(sc.doc.plan.arms), pointer, g, env);
  for (const ArmPresence& a : report.arms) {
    t.rows.push_back({a.arm, to_string(a.classification), a.leading_order, a.coefficient, a.fit_residual,
                      arm_weak_value(net, a.arm), to_string(env)});
  }
  return t;
}

Table run_compare_limits(const CheckedScenario& sc, const std::vector<double>& g) {
  Table t{"compare_limits", {"observable", "trajectory", "g", "spread", "estimate", "deviation"}, {}};
  const ExperimentPlan& plan = sc.doc.plan;
  CompareLimitsOptions opts;
  if (plan.fixed_g) opts.fixed_g = *plan.fixed_g;
  if (plan.fixed_spread) opts.fixed_spread = *plan.fixed_spread;
  const std::vector<double>& spreads = plan.spreads.empty() ? kDefaultSpreads : plan.spreads;
  const PrePostSelection sel = sc.selection();
  for (const std::string& name : sorted_unique(plan.observables)) {
    const LimitsReport r = compare_limits(sel, sc.op(name), spreads, g, opts);
    t.rows.push_back({name, std::string("analytic"), std::monostate{}, std::monostate{}, r.analytic, 0.0});
    for (const LimitPoint& p : r.g_trajectory) {
      t.rows.push_back({name, std::string("g_to_zero"), p.g, p.spread, p.estimate, p.deviation});
    }
    t.rows.push_back({name, std::string("g_extrapolated"), 0.0, r.fixed_spread, r.g_extrapolated.value,
                      std::abs(r.g_extrapolated.value - r.analytic)});
    for (const LimitPoint& p : r.spread_trajectory) {
      t.rows.push_back({name, std::string("spread_to_infinity"), p.g, p.spread, p.estimate, p.deviation});
    }
  }
  return t;
}

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t n) const { return std::to_string(n); }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(Complex z) const { return format_complex(z); }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::ordered_json json_real(double x) {
  if (std::isfinite(x)) return x == 0.0 ? 0.0 : x;
  return format_real(x);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t n) const { return n; }
    nlohmann::ordered_json operator()(double x) const { return json_real(x); }
    nlohmann::ordered_json operator()(Complex z) const {
      nlohmann::ordered_json j;
      j["re"] = json_real(z.real());
      j["im"] = json_real(z.imag());
      return j;
    }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  std::string s(buf);
  const std::size_t e = s.find('e');
  const int exponent = std::atoi(s.c_str() + e + 1);
  return s.substr(0, e + 1) + std::to_string(exponent);
}

std::string format_complex(Complex z) {
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  return format_real(z.real()) + (std::signbit(im) ? "-" : "+") + format_real(std::abs(im)) + "i";
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += "\n";
  }
  return out;
}

std::string to_json(const Table& table) {
  nlohmann::ordered_json doc;
  doc["plan"] = table.plan;
  doc["columns"] = table.columns;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
    doc["rows"].push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

std::optional<CheckedScenario> load_scenario(std::string_view text, std::optional<PlanKind> plan,
                                             std::vector<ParseDiagnostic>& diagnostics) {
  ParseResult parsed = parse(text);
  diagnostics.insert(diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  if (!parsed.ok()) return std::nullopt;
  ScenarioDoc doc = std::move(*parsed.doc);
  if (plan) retarget(doc, *plan);
  fill_defaults(doc);
  if (const auto missing = missing_section(doc)) {
    diagnostics.push_back({1, 1, *missing, Severity::error});
    return std::nullopt;
  }
  CheckResult checked = validate_semantics(doc);
  diagnostics.insert(diagnostics.end(), checked.diagnostics.begin(), checked.diagnostics.end());
  return std::move(checked.scenario);
}

Table run_plan(const CheckedScenario& sc, const ScheduleOverride& schedule) {
  const std::vector<double> g = resolve_schedule(sc, schedule);
  switch (sc.doc.plan.kind) {
    case PlanKind::weakvalue:
      return run_weakvalue(sc, g);
    case PlanKind::sweep:
      return run_sweep(sc, g);
    case PlanKind::trace:
      return run_trace(sc, g);
    case PlanKind::presence:
      return run_presence(sc, g);
    case PlanKind::compare_limits:
      return run_compare_limits(sc, g);
  }
  throw Error("unknown plan");
}

}  // namespace tsvf::shell

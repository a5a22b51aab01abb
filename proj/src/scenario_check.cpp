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
#include <cmath>
#include <set>
#include <sstream>

#include "tsvf/scenario.hpp"

namespace tsvf {

namespace {

constexpr double kAutoNormalizeBand = 1e-6;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

class Checker {
 public:
  explicit Checker(ScenarioDoc doc) : doc_(std::move(doc)) {}

  CheckResult run() {
    check_pointer();
    check_selection();
    check_plan();
    CheckResult result;
    result.diagnostics = std::move(diags_);
    const bool failed = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                                    [](const ParseDiagnostic& d) { return d.severity == Severity::error; });
    if (!failed) result.scenario = CheckedScenario{std::move(doc_)};
    return result;
  }

 private:
  void error(SourcePos p, std::string msg) { diags_.push_back({p.line, p.column, std::move(msg), Severity::error}); }
  void warning(SourcePos p, std::string msg) {
    diags_.push_back({p.line, p.column, std::move(msg), Severity::warning});
  }

  SourcePos key_pos(const std::string& key) const {
    const auto it = doc_.plan.key_pos.find(key);
    return it == doc_.plan.key_pos.end() ? SourcePos{1, 1} : it->second;
  }

  void check_pointer() {
    if (!doc_.pointer) return;
    try {
      doc_.pointer->validate();
    } catch (const Error& ex) {
      error(pointer_fault_pos(*doc_.pointer), ex.what());
    }
  }

  // Position of the pointer key most responsible for a failed validation.
  SourcePos pointer_fault_pos(const PointerModel& m) const {
    const auto& kp = doc_.pointer_key_pos;
    auto at = [&](std::initializer_list<const char*> keys) {
      for (const char* k : keys) {
        const auto it = kp.find(k);
        if (it != kp.end()) return it->second;
      }
      return doc_.pointer_pos;
    };
    if (!(m.spread > 0.0) || !std::isfinite(m.spread)) return at({"spread"});
    if (!is_power_of_two(m.n_points) || m.n_points < 64) return at({"points"});
    if (!std::isfinite(m.half_width) || m.half_width < 8.0 * m.spread) return at({"half_width", "spread"});
    if (m.grid_spacing() > m.spread / 4.0) return at({"points", "half_width", "spread"});
    return at({"half_width", "spread", "points"});
  }

  void normalize_state(const std::string& name, SourcePos ref_pos) {
    NamedState* st = nullptr;
    for (NamedState& s : doc_.states) {
      if (s.name == name) st = &s;
    }
    if (!st) {
      error(ref_pos, "unresolved state '" + name + "'");
      return;
    }
    if (normalized_.count(name)) return;
    normalized_.insert(name);
    const double n = st->amps.norm();
    std::ostringstream msg;
    msg.precision(17);
    if (std::abs(n - 1.0) > kAutoNormalizeBand) {
      msg << "state '" << name << "' has norm " << n << "; selection states must be normalized";
      error(st->pos, msg.str());
    } else if (std::abs(st->amps.squaredNorm() - 1.0) > tol::kStructural) {
      msg << "state '" << name << "' has norm " << n << "; auto-normalized";
      warning(st->pos, msg.str());
      st->amps /= n;
    }
  }

  void check_selection() {
    if (!doc_.selection) return;
    normalize_state(doc_.selection->pre, doc_.selection->pre_pos);
    normalize_state(doc_.selection->post, doc_.selection->post_pos);
  }

  void check_schedule_values(const std::vector<double>& g, std::size_t min_points, bool decade) {
    if (g.empty()) return;
    const SourcePos pos = key_pos("g");
    const auto& entry_pos = doc_.plan.g_pos;
    auto at = [&](std::size_t i) { return i < entry_pos.size() ? entry_pos[i] : pos; };
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] > 0.0)) {
        error(at(i), "g schedule entries must be positive");
        return;
      }
      if (i > 0 && !(g[i] < g[i - 1])) {
        error(at(i), "schedule must decrease");
        return;
      }
    }
    if (g.size() < min_points) {
      std::ostringstream msg;
      msg << "g schedule needs at least " << min_points << " points";
      error(pos, msg.str());
      return;
    }
    if (decade && g.front() / g.back() < 10.0 * (1.0 - 1e-9)) error(pos, "g schedule must span at least one decade");
  }

  void check_observables() {
    const ExperimentPlan& plan = doc_.plan;
    for (std::size_t i = 0; i < plan.observables.size(); ++i) {
      const NamedOperator* op = doc_.find_operator(plan.observables[i]);
      const SourcePos pos = i < plan.observable_pos.size() ? plan.observable_pos[i] : key_pos("observable");
      if (!op) {
        error(pos, "unresolved operator '" + plan.observables[i] + "'");
      } else if (!op->value.is_hermitian()) {
        std::ostringstream msg;
        msg << "observable '" << op->name << "' is not hermitian (defect " << op->value.hermiticity_defect() << ")";
        error(pos, msg.str());
      }
    }
  }

  void check_overlap() {
    if (!doc_.selection) return;
    const NamedState* pre = doc_.find_state(doc_.selection->pre);
    const NamedState* post = doc_.find_state(doc_.selection->post);
    if (!pre || !post) return;
    const double overlap = std::abs(post->amps.dot(pre->amps)) / (pre->amps.norm() * post->amps.norm());
    if (!(overlap > kMinSelectionOverlap)) {
      std::ostringstream msg;
      msg << "pre- and post-selection are orthogonal (|<out|in>| = " << overlap << ")";
      error(doc_.selection->post_pos, msg.str());
    }
  }

  void check_plan() {
    const ExperimentPlan& plan = doc_.plan;
    check_observables();
    switch (plan.kind) {
      case PlanKind::weakvalue:
        check_overlap();
        check_schedule_values(plan.g_schedule, 4, false);
        break;
      case PlanKind::sweep:
        check_schedule_values(plan.g_schedule, kMinFitPoints, true);
        break;
      case PlanKind::trace:
        check_schedule_values(plan.g_schedule, 1, false);
        break;
      case PlanKind::presence:
        check_schedule_values(plan.g_schedule, kMinFitPoints, true);
        break;
      case PlanKind::compare_limits: {
        check_overlap();
        check_schedule_values(plan.g_schedule, 4, false);
        const auto& s = plan.spreads;
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (!(s[i] > 0.0) || (i > 0 && !(s[i] > s[i - 1]))) {
            error(key_pos("spreads"), "spreads must be positive and increasing");
            break;
          }
        }
        if (s.size() == 1) error(key_pos("spreads"), "spreads needs at least 2 points");
        for (const auto& [key, value] : {std::pair{"fixed_g", plan.fixed_g}, {"fixed_spread", plan.fixed_spread}}) {
          if (value && !(*value > 0.0)) error(key_pos(key), std::string(key) + " must be positive");
        }
        break;
      }
    }
  }

  ScenarioDoc doc_;
  std::vector<ParseDiagnostic> diags_;
  std::set<std::string> normalized_;
};

}  // namespace

CheckResult validate_semantics(const ScenarioDoc& doc) { return Checker(doc).run(); }

const LinearOperator& CheckedScenario::op(std::string_view name) const {
  const NamedOperator* o = doc.find_operator(name);
  if (!o) throw Error("unknown operator '" + std::string(name) + "'");
  return o->value;
}

StateVector CheckedScenario::state(std::string_view name) const {
  const NamedState* s = doc.find_state(name);
  if (!s) throw Error("unknown state '" + std::string(name) + "'");
  const bool unit = std::abs(s->amps.squaredNorm() - 1.0) <= tol::kStructural;
  return StateVector(s->amps, unit);
}

PrePostSelection CheckedScenario::selection() const {
  if (!doc.selection) throw Error("scenario has no [selection]");
  return PrePostSelection(state(doc.selection->pre), state(doc.selection->post));
}

PointerModel CheckedScenario::pointer_model() const {
  return doc.pointer.value_or(PointerModel::gaussian(2.0));
}

}  // namespace tsvf

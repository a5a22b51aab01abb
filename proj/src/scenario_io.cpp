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

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tsvf/scenario.hpp"

namespace tsvf {

namespace {

std::string exact(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string exact(Complex z) {
  if (z.imag() == 0.0) return exact(z.real());
  if (z.real() == 0.0) return exact(z.imag()) + "i";
  return exact(z.real()) + (z.imag() < 0.0 ? "-" : "+") + exact(std::abs(z.imag())) + "i";
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn fn) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += fn(items[i]);
  }
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  return join(names, [](const std::string& s) { return s; });
}

std::string join_reals(const std::vector<double>& xs) {
  return join(xs, [](double x) { return exact(x); });
}

bool same(const CVector& a, const CVector& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

bool same(const CMatrix& a, const CMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_plan(const ExperimentPlan& a, const ExperimentPlan& b) {
  return a.kind == b.kind && a.observables == b.observables && a.g_schedule == b.g_schedule &&
         a.spreads == b.spreads && a.fixed_g == b.fixed_g && a.fixed_spread == b.fixed_spread &&
         a.metrics == b.metrics && a.arms == b.arms && a.environment == b.environment;
}

}  // namespace

bool structurally_equal(const ScenarioDoc& a, const ScenarioDoc& b) {
  if (a.system_dim != b.system_dim || a.pointer != b.pointer || a.network != b.network) return false;
  if (a.selection.has_value() != b.selection.has_value()) return false;
  if (a.selection && (a.selection->pre != b.selection->pre || a.selection->post != b.selection->post)) return false;
  if (a.states.size() != b.states.size() || a.operators.size() != b.operators.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].name != b.states[i].name || !same(a.states[i].amps, b.states[i].amps)) return false;
  }
  for (std::size_t i = 0; i < a.operators.size(); ++i) {
    const NamedOperator& x = a.operators[i];
    const NamedOperator& y = b.operators[i];
    if (x.name != y.name || x.form != y.form || !same(x.value.entries(), y.value.entries())) return false;
  }
  return same_plan(a.plan, b.plan);
}

std::string serialize(const ScenarioDoc& doc) {
  std::ostringstream out;
  out << kScenarioMagic << "\n";
  if (doc.system_dim) out << "\n[system]\ndim = " << *doc.system_dim << "\n";
  for (const NamedState& s : doc.states) {
    out << "\n[state " << s.name << "]\namps = ";
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) out << (i ? ", " : "") << exact(s.amps[i]);
    out << "\n";
  }
  for (const NamedOperator& op : doc.operators) {
    out << "\n[operator " << op.name << "]\n";
    if (op.form == OperatorForm::expression) {
      out << "expr = " << op.expression << "\n";
      continue;
    }
    out << "matrix = ";
    const CMatrix& m = op.value.entries();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r) out << "; ";
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << exact(m(r, c));
    }
    out << "\n";
  }
  if (doc.pointer) {
    const PointerModel& p = *doc.pointer;
    out << "\n[pointer]\nkind = " << to_string(p.kind) << "\n";
    if (p.kind == PointerKind::gaussian_grid) {
      out << "spread = " << exact(p.spread) << "\nhalf_width = " << exact(p.half_width) << "\npoints = " << p.n_points
          << "\n";
    } else {
      out << "generator = " << to_string(p.generator_axis) << "\n";
    }
  }
  if (doc.selection) out << "\n[selection]\npre = " << doc.selection->pre << "\npost = " << doc.selection->post << "\n";
  if (doc.network) {
    const OpticalNetwork& net = *doc.network;
    out << "\n[network]\nmodes = " << net.n_modes() << "\nsource = " << net.source_mode() << "\n";
    for (const NetworkElement& e : net.elements()) {
      if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        out << "bs = " << bs->mode_a << ", " << bs->mode_b << ", " << exact(bs->transmissivity) << "\n";
      } else if (const auto* ps = std::get_if<PhaseShift>(&e)) {
        out << "phase = " << ps->mode << ", " << exact(ps->phase) << "\n";
      } else {
        const auto& arms = std::get<SliceMarker>(e).arms;
        out << "slice = "
            << join(arms, [](const auto& a) { return a.first + ":" + std::to_string(a.second); }) << "\n";
      }
    }
    out << "detector = "
        << join(net.detectors(), [](const Detector& d) { return d.label + ":" + std::to_string(d.mode); }) << "\n";
    out << "postselect = " << net.postselect_detector() << "\n";
  }
  const ExperimentPlan& plan = doc.plan;
  out << "\n[experiment]\nplan = " << to_string(plan.kind) << "\n";
  if (!plan.observables.empty()) out << "observable = " << join_names(plan.observables) << "\n";
  if (!plan.arms.empty()) out << "arms = " << join_names(plan.arms) << "\n";
  if (!plan.metrics.empty()) {
    out << "metric = " << join(plan.metrics, [](Metric m) { return to_string(m); }) << "\n";
  }
  if (!plan.g_schedule.empty()) out << "g = " << join_reals(plan.g_schedule) << "\n";
  if (!plan.spreads.empty()) out << "spreads = " << join_reals(plan.spreads) << "\n";
  if (plan.fixed_g) out << "fixed_g = " << exact(*plan.fixed_g) << "\n";
  if (plan.fixed_spread) out << "fixed_spread = " << exact(*plan.fixed_spread) << "\n";
  if (plan.environment) out << "environment = " << to_string(*plan.environment) << "\n";
  return out.str();
}

}  // namespace tsvf

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

#include "tsvf/limits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsvf/fit.hpp"
#include "tsvf/pointer.hpp"

namespace tsvf {

OrderFit fit_order(std::span<const double> g_values, std::span<const double> metric_values) {
  if (g_values.size() != metric_values.size()) throw DimensionError("fit_order: length mismatch");
  std::vector<double> lg;
  std::vector<double> lm;
  OrderFit fit;
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    if (!(g_values[i] > 0.0)) throw Error("fit_order: g values must be positive");
    if (!(metric_values[i] > kMetricFloor)) {
      ++fit.floored;
      continue;
    }
    lg.push_back(std::log(g_values[i]));
    lm.push_back(std::log(metric_values[i]));
  }
  if (lg.size() < kMinFitPoints) return fit;
  const auto [lo, hi] = std::minmax_element(lg.begin(), lg.end());
  if (*hi - *lo < std::log(10.0) * (1.0 - 1e-9)) throw Error("fit_order: usable g values span less than one decade");
  const LineFit line = fit_line(lg, lm);
  fit.order = line.slope;
  fit.coefficient = std::exp(line.intercept);
  fit.residual = line.max_residual;
  return fit;
}

std::vector<double> geometric_schedule(double g_max, double g_min, std::size_t n) {
  if (!(g_max > g_min) || !(g_min > 0.0) || n < 2) throw Error("geometric schedule needs g_max > g_min > 0, n >= 2");
  std::vector<double> g(n);
  const double step = std::log(g_min / g_max) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = g_max * std::exp(step * static_cast<double>(i));
  g.front() = g_max;
  g.back() = g_min;
  return g;
}

std::vector<double> default_decade() { return geometric_schedule(1e-2, 1e-4, 9); }

std::string to_string(Metric m) {
  switch (m) {
    case Metric::continuity:
      return "continuity";
    case Metric::derail:
      return "derail";
    case Metric::first_order_residual:
      return "first_order_residual";
    case Metric::overlap_deficit:
      return "overlap_deficit";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error("unknown metric '" + name + "'");
}

MetricProbe::MetricProbe(StateVector in, StateVector m, const LinearOperator& s, const LinearOperator& p)
    : in_(std::move(in)),
      m_(std::move(m)),
      s_(s),
      p_(p),
      coupling_(s, p),
      psi0_(tensor_product(in_, m_)) {}

double MetricProbe::continuity(double g) const { return coupling_.apply_increment(g, psi0_).state.norm(); }

double MetricProbe::derail(double g) const {
  // (I - |in><in|) annihilates the unperturbed |in> factor, so only the increment survives.
  const JointState inc = coupling_.apply_increment(g, psi0_);
  const StateVector along = project_system(inc, in_);
  const JointState parallel = tensor_product(in_, along);
  return (inc.state.amps() - parallel.state.amps() / in_.squared_norm()).norm();
}

double MetricProbe::first_order_residual(double g) const {
  const JointState inc = coupling_.apply_increment(g, psi0_);
  const JointState approx = first_order_state(in_, m_, s_, p_, g);
  return ((psi0_.state.amps() + inc.state.amps()) - approx.state.amps()).norm();
}

double MetricProbe::overlap_deficit(double g) const {
  const Complex z = inner(psi0_.state, coupling_.apply_increment(g, psi0_).state) / psi0_.state.squared_norm();
  // 1 - |1 + z| rearranged to avoid cancellation.
  const double mag = std::abs(1.0 + z);
  return (-2.0 * z.real() - std::norm(z)) / (1.0 + mag);
}

double MetricProbe::evaluate(Metric metric, double g) const {
  switch (metric) {
    case Metric::continuity:
      return continuity(g);
    case Metric::derail:
      return derail(g);
    case Metric::first_order_residual:
      return first_order_residual(g);
    case Metric::overlap_deficit:
      return overlap_deficit(g);
  }
  return 0.0;
}

double continuity_metric(const StateVector& in, const StateVector& m, const LinearOperator& s,
                         const LinearOperator& p, double g) {
  return MetricProbe(in, m, s, p).continuity(g);
}

double derail_metric(const StateVector& in, const StateVector& m, const LinearOperator& s,
                     const LinearOperator& p, double g) {
  return MetricProbe(in, m, s, p).derail(g);
}

double first_order_residual(const StateVector& in, const StateVector& m, const LinearOperator& s,
                            const LinearOperator& p, double g) {
  return MetricProbe(in, m, s, p).first_order_residual(g);
}

SweepResult sweep(const MetricProbe& probe, Metric metric, const std::vector<double>& g_values) {
  check_schedule(g_values, kMinFitPoints);
  SweepResult r;
  r.metric = metric;
  r.g_values = g_values;
  for (double g : g_values) r.metric_values.push_back(probe.evaluate(metric, g));
  const OrderFit fit = fit_order(r.g_values, r.metric_values);
  r.fitted_order = fit.order;
  r.fitted_coefficient = fit.coefficient;
  r.fit_residual = fit.residual;
  r.floored = fit.floored;
  return r;
}

std::string to_string(PresenceClass c) {
  switch (c) {
    case PresenceClass::primary:
      return "primary";
    case PresenceClass::secondary:
      return "secondary";
    case PresenceClass::none:
      return "none";
  }
  return "?";
}

PresenceClass classify_order(double order) {
  if (order == kAllFloorOrder) return PresenceClass::none;
  if (order >= 0.75 && order <= 1.25) return PresenceClass::primary;
  if (order >= 1.75 && order <= 2.5) return PresenceClass::secondary;
  std::ostringstream msg;
  msg << "unclassified leading order " << order;
  throw UnclassifiedOrderError(msg.str());
}

LimitsReport compare_limits(const PrePostSelection& sel, const LinearOperator& s,
                            const std::vector<double>& spread_schedule, const std::vector<double>& g_schedule,
                            const CompareLimitsOptions& options) {
  check_schedule(g_schedule);
  if (spread_schedule.size() < 2) throw Error("spread schedule needs at least 2 points");
  for (std::size_t i = 0; i < spread_schedule.size(); ++i) {
    if (!(spread_schedule[i] > 0.0)) throw Error("spread schedule entries must be positive");
    if (i > 0 && !(spread_schedule[i] > spread_schedule[i - 1])) throw Error("spread schedule must increase");
  }
  if (!(options.fixed_g > 0.0) || !(options.fixed_spread > 0.0)) throw Error("fixed g and spread must be positive");

  LimitsReport report;
  report.analytic = weak_value(sel, s);
  report.fixed_spread = options.fixed_spread;
  report.fixed_g = options.fixed_g;

  const Pointer fixed(PointerModel::gaussian(options.fixed_spread));
  for (double g : g_schedule) {
    const Complex w = pointer_reading(measure_once(sel, s, fixed, g), fixed);
    report.g_trajectory.push_back({g, options.fixed_spread, w, std::abs(w - report.analytic)});
  }
  report.g_extrapolated = estimate_weak_value(sel, s, fixed, g_schedule);

  for (double spread : spread_schedule) {
    const Pointer ptr(PointerModel::gaussian(spread));
    const Complex w = pointer_reading(measure_once(sel, s, ptr, options.fixed_g), ptr);
    report.spread_trajectory.push_back({options.fixed_g, spread, w, std::abs(w - report.analytic)});
  }
  return report;
}

}  // namespace tsvf

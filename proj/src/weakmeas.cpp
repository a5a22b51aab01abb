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

#include "tsvf/weakmeas.hpp"

#include <cmath>
#include <sstream>

#include "tsvf/fit.hpp"

namespace tsvf {

namespace {

Complex extrapolate(const std::vector<double>& g, const std::vector<double>& re, const std::vector<double>& im,
                    double& residual) {
  const LineFit fre = fit_line(g, re);
  const LineFit fim = fit_line(g, im);
  residual = std::max(fre.max_residual, fim.max_residual);
  return {fre.intercept, fim.intercept};
}

PostSelectedPointer post_select(const JointState& evolved, const PrePostSelection& sel, double g) {
  StateVector branch = project_system(evolved, sel.post());
  const double p = branch.squared_norm();
  if (!(p >= kDarkProbability)) {
    std::ostringstream msg;
    msg << "orthogonal post-selection at this g (g = " << g << ", probability " << p << ")";
    throw DarkPostSelectionError(msg.str());
  }
  return PostSelectedPointer{std::move(branch), p, g};
}

}  // namespace

PrePostSelection::PrePostSelection(StateVector pre, StateVector post) : pre_(std::move(pre)), post_(std::move(post)) {
  if (!pre_.is_normalized() || !post_.is_normalized()) {
    throw Error("pre- and post-selected states must be normalized");
  }
  if (pre_.dim() != post_.dim()) throw DimensionError("pre- and post-selected states differ in dimension");
  overlap_ = inner(post_, pre_);
}

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::analytic:
      return "analytic";
    case EstimateMethod::pointer_numeric:
      return "pointer_numeric";
    case EstimateMethod::first_order:
      return "first_order";
  }
  return "?";
}

double expectation(const StateVector& state, const LinearOperator& s) {
  if (!s.is_hermitian()) throw NotHermitianError("expectation requires a hermitian observable");
  return expectation_raw(state, s);
}

Complex weak_value(const PrePostSelection& sel, const LinearOperator& s) {
  if (sel.overlap_magnitude() <= kMinSelectionOverlap) {
    std::ostringstream msg;
    msg << "weak value undefined: |<out|in>| = " << sel.overlap_magnitude() << " is not above "
        << kMinSelectionOverlap;
    throw NearOrthogonalSelectionError(msg.str());
  }
  if (s.dim() != sel.pre().dim()) throw DimensionError("weak value: operator and states differ in dimension");
  return inner(sel.post(), s.apply(sel.pre())) / sel.overlap();
}

PostSelectedPointer measure_once(const PrePostSelection& sel, const LinearOperator& s, const Pointer& pointer,
                                 double g) {
  if (!std::isfinite(g)) throw Error("coupling strength must be finite");
  if (s.dim() != sel.pre().dim()) throw DimensionError("measure_once: operator and states differ in dimension");
  const JointState psi0 = tensor_product(sel.pre(), pointer.ready());
  if (g == 0.0) return post_select(psi0, sel, g);
  const CouplingGenerator coupling(eigensystem(s), pointer.generator_eigen());
  return post_select(coupling.apply(g, psi0), sel, g);
}

PostSelectedPointer measure_once(const PrePostSelection& sel, const LinearOperator& s, const PointerModel& model,
                                 double g) {
  return measure_once(sel, s, Pointer(model), g);
}

Complex pointer_reading(const PostSelectedPointer& branch, const Pointer& pointer) {
  const double g = branch.g;
  if (g == 0.0) throw Error("pointer reading needs nonzero g");
  const double re = (moments(branch.pointer_state, pointer.readout()) - pointer.readout_baseline()) /
                    (g * pointer.readout_gain());
  const double im = (moments(branch.pointer_state, pointer.generator()) - pointer.generator_baseline()) /
                    (2.0 * g * pointer.generator_variance());
  return {re, im};
}

std::vector<double> default_schedule(const PointerModel& model) {
  const double start = model.kind == PointerKind::gaussian_grid ? 0.02 * model.spread : 0.02;
  std::vector<double> g(5);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = start / static_cast<double>(1u << i);
  return g;
}

void check_schedule(const std::vector<double>& g_schedule, std::size_t min_points) {
  if (g_schedule.size() < min_points) {
    std::ostringstream msg;
    msg << "g schedule needs at least " << min_points << " points, got " << g_schedule.size();
    throw Error(msg.str());
  }
  for (std::size_t i = 0; i < g_schedule.size(); ++i) {
    if (!std::isfinite(g_schedule[i]) || !(g_schedule[i] > 0.0)) throw Error("g schedule entries must be positive");
    if (i > 0 && !(g_schedule[i] < g_schedule[i - 1])) throw Error("schedule must decrease");
  }
}

WeakValueEstimate estimate_weak_value(const PrePostSelection& sel, const LinearOperator& s, const Pointer& pointer,
                                      const std::vector<double>& g_schedule) {
  check_schedule(g_schedule);
  if (s.dim() != sel.pre().dim()) throw DimensionError("estimate: operator and states differ in dimension");
  const CouplingGenerator coupling(eigensystem(s), pointer.generator_eigen());
  const JointState psi0 = tensor_product(sel.pre(), pointer.ready());
  std::vector<double> re;
  std::vector<double> im;
  for (double g : g_schedule) {
    const Complex r = pointer_reading(post_select(coupling.apply(g, psi0), sel, g), pointer);
    re.push_back(r.real());
    im.push_back(r.imag());
  }
  WeakValueEstimate est;
  est.method = EstimateMethod::pointer_numeric;
  est.g_schedule = g_schedule;
  est.value = extrapolate(g_schedule, re, im, est.extrapolation_residual);
  return est;
}

WeakValueEstimate estimate_weak_value(const PrePostSelection& sel, const LinearOperator& s,
                                      const PointerModel& model, const std::vector<double>& g_schedule) {
  return estimate_weak_value(sel, s, Pointer(model), g_schedule);
}

WeakValueEstimate estimate_weak_value_first_order(const PrePostSelection& sel, const LinearOperator& s,
                                                  const Pointer& pointer, const std::vector<double>& g_schedule) {
  check_schedule(g_schedule);
  std::vector<double> re;
  std::vector<double> im;
  for (double g : g_schedule) {
    const JointState psi = first_order_state(sel.pre(), pointer.ready(), s, pointer.generator(), g);
    const Complex r = pointer_reading(post_select(psi, sel, g), pointer);
    re.push_back(r.real());
    im.push_back(r.imag());
  }
  WeakValueEstimate est;
  est.method = EstimateMethod::first_order;
  est.g_schedule = g_schedule;
  est.value = extrapolate(g_schedule, re, im, est.extrapolation_residual);
  return est;
}

WeakValueEstimate analytic_estimate(const PrePostSelection& sel, const LinearOperator& s) {
  WeakValueEstimate est;
  est.value = weak_value(sel, s);
  est.method = EstimateMethod::analytic;
  return est;
}

PrePostSelection time_reverse(const PrePostSelection& sel) { return PrePostSelection(sel.post(), sel.pre()); }

}  // namespace tsvf

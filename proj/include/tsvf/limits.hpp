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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tsvf/qcore.hpp"
#include "tsvf/weakmeas.hpp"

namespace tsvf {

/// Metric values at or below this are treated as identically zero and kept
/// out of log-log fits.
inline constexpr double kMetricFloor = 1e-14;
/// Fitted order reported when fewer than 4 values clear the floor: no trace
/// at any fitted order.
inline constexpr double kAllFloorOrder = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMinFitPoints = 4;

class UnclassifiedOrderError : public Error {
 public:
  using Error::Error;
};

struct OrderFit {
  double order = kAllFloorOrder;
  double coefficient = 0.0;
  /// max |log metric - fitted line| over the fitted points.
  double residual = 0.0;
  std::size_t floored = 0;

  bool all_floor() const { return order == kAllFloorOrder; }
};

/// Least-squares line through (log g, log metric); order = slope,
/// coefficient = exp(intercept). Usable points must span at least one decade.
OrderFit fit_order(std::span<const double> g_values, std::span<const double> metric_values);

/// g from 1e-2 down to 1e-4, 9 geometric points.
std::vector<double> default_decade();
/// n geometric points from g_max down to g_min.
std::vector<double> geometric_schedule(double g_max, double g_min, std::size_t n);

enum class Metric { continuity, derail, first_order_residual, overlap_deficit };
std::string to_string(Metric m);
Metric metric_from_string(const std::string& name);
inline constexpr Metric kAllMetrics[] = {Metric::continuity, Metric::derail, Metric::first_order_residual,
                                         Metric::overlap_deficit};

/// Evaluates g-dependent distances of U(g)(|in>(x)|m>) for one fixed setup.
class MetricProbe {
 public:
  MetricProbe(StateVector in, StateVector m, const LinearOperator& s, const LinearOperator& p);

  /// ||U psi0 - psi0||
  double continuity(double g) const;
  /// ||((I - |in><in|) (x) I) U psi0||
  double derail(double g) const;
  /// ||U psi0 - first_order_state(g)||
  double first_order_residual(double g) const;
  /// 1 - |<psi0|U psi0>|
  double overlap_deficit(double g) const;

  double evaluate(Metric metric, double g) const;

 private:
  StateVector in_;
  StateVector m_;
  LinearOperator s_;
  LinearOperator p_;
  CouplingGenerator coupling_;
  JointState psi0_;
};

double continuity_metric(const StateVector& in, const StateVector& m, const LinearOperator& s,
                         const LinearOperator& p, double g);
double derail_metric(const StateVector& in, const StateVector& m, const LinearOperator& s,
                     const LinearOperator& p, double g);
double first_order_residual(const StateVector& in, const StateVector& m, const LinearOperator& s,
                            const LinearOperator& p, double g);

struct SweepResult {
  Metric metric = Metric::continuity;
  std::vector<double> g_values;
  std::vector<double> metric_values;
  double fitted_order = kAllFloorOrder;
  double fitted_coefficient = 0.0;
  double fit_residual = 0.0;
  std::size_t floored = 0;
};

SweepResult sweep(const MetricProbe& probe, Metric metric, const std::vector<double>& g_values);

enum class PresenceClass { primary, secondary, none };
std::string to_string(PresenceClass c);

/// [0.75, 1.25] -> primary, [1.75, 2.5] -> secondary, all-floor -> none.
/// Anything else throws UnclassifiedOrderError.
PresenceClass classify_order(double order);

struct LimitPoint {
  double g = 0.0;
  double spread = 0.0;
  Complex estimate;
  double deviation = 0.0;
};

struct CompareLimitsOptions {
  double fixed_spread = 2.0;
  double fixed_g = 0.5;
};

struct LimitsReport {
  Complex analytic;
  double fixed_spread = 0.0;
  double fixed_g = 0.0;
  /// g -> 0 at fixed spread, in schedule order.
  std::vector<LimitPoint> g_trajectory;
  WeakValueEstimate g_extrapolated;
  /// spread -> infinity at fixed g, in schedule order.
  std::vector<LimitPoint> spread_trajectory;
};

/// Weak-value readings along g -> 0 (fixed spread) and along spread -> infinity
/// (fixed g), both with Gaussian pointers, against the analytic weak value.
LimitsReport compare_limits(const PrePostSelection& sel, const LinearOperator& s,
                            const std::vector<double>& spread_schedule, const std::vector<double>& g_schedule,
                            const CompareLimitsOptions& options = {});

}  // namespace tsvf

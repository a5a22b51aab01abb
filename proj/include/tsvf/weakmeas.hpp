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

#include <string>
#include <vector>

#include "tsvf/pointer.hpp"
#include "tsvf/qcore.hpp"

namespace tsvf {

/// Weak values need |<out|in>| above this.
inline constexpr double kMinSelectionOverlap = 1e-12;
/// measure_once reports a dark detector below this post-selection probability.
inline constexpr double kDarkProbability = 1e-300;

class NearOrthogonalSelectionError : public Error {
 public:
  using Error::Error;
};

/// Post-selection failed: the detector is dark at this coupling.
class DarkPostSelectionError : public Error {
 public:
  using Error::Error;
};

/// Pre-selected |in> and post-selected |out>, both normalized.
class PrePostSelection {
 public:
  PrePostSelection(StateVector pre, StateVector post);

  const StateVector& pre() const { return pre_; }
  const StateVector& post() const { return post_; }
  /// <out|in>
  Complex overlap() const { return overlap_; }
  double overlap_magnitude() const { return std::abs(overlap_); }

 private:
  StateVector pre_;
  StateVector post_;
  Complex overlap_;
};

/// Pointer branch after projecting the system onto <out|. Unnormalized.
struct PostSelectedPointer {
  StateVector pointer_state;
  double probability = 0.0;
  double g = 0.0;
};

enum class EstimateMethod { analytic, pointer_numeric, first_order };
std::string to_string(EstimateMethod m);

struct WeakValueEstimate {
  Complex value;
  EstimateMethod method = EstimateMethod::analytic;
  std::vector<double> g_schedule;
  double extrapolation_residual = 0.0;
};

/// <state|S|state> for hermitian S and normalized state.
double expectation(const StateVector& state, const LinearOperator& s);

/// <out|S|in> / <out|in>.
Complex weak_value(const PrePostSelection& sel, const LinearOperator& s);

/// |in>(x)|m>, evolve under exp(-i g S (x) G), project the system on <out|.
PostSelectedPointer measure_once(const PrePostSelection& sel, const LinearOperator& s, const Pointer& pointer,
                                 double g);
PostSelectedPointer measure_once(const PrePostSelection& sel, const LinearOperator& s, const PointerModel& model,
                                 double g);

/// Single-g weak-value reading of a conditional pointer state:
/// Re from the readout shift per unit g, Im from the generator shift per 2 g Var(G).
Complex pointer_reading(const PostSelectedPointer& branch, const Pointer& pointer);

/// Geometric schedule: 5 points, ratio 2, starting at 0.02 * spread (0.02 for qubits).
std::vector<double> default_schedule(const PointerModel& model);

/// Throws unless the schedule has >= min_points positive, finite, strictly decreasing entries.
void check_schedule(const std::vector<double>& g_schedule, std::size_t min_points = 4);

/// Runs measure_once over the schedule and extrapolates the per-g readings to
/// g -> 0 with a least-squares line in g.
WeakValueEstimate estimate_weak_value(const PrePostSelection& sel, const LinearOperator& s, const Pointer& pointer,
                                      const std::vector<double>& g_schedule);
WeakValueEstimate estimate_weak_value(const PrePostSelection& sel, const LinearOperator& s,
                                      const PointerModel& model, const std::vector<double>& g_schedule);

/// Same extrapolation, but every branch comes from the two-term first-order state.
WeakValueEstimate estimate_weak_value_first_order(const PrePostSelection& sel, const LinearOperator& s,
                                                  const Pointer& pointer, const std::vector<double>& g_schedule);

WeakValueEstimate analytic_estimate(const PrePostSelection& sel, const LinearOperator& s);

/// Swaps pre- and post-selection.
PrePostSelection time_reverse(const PrePostSelection& sel);

}  // namespace tsvf

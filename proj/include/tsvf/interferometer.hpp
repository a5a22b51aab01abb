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
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsvf/limits.hpp"
#include "tsvf/pointer.hpp"
#include "tsvf/qcore.hpp"

namespace tsvf {

// Single-particle mode optics: the network state is one amplitude per mode.
//
// Beam-splitter convention, fixed for every network in the library: on the
// ordered pair (a, b) a splitter of intensity transmissivity t acts as
//     [ sqrt(t)      i sqrt(1-t) ]
//     [ i sqrt(1-t)  sqrt(t)     ]
// so the reflected amplitude picks up a factor i. A phase shift multiplies
// its mode by exp(i phi).

struct BeamSplitter {
  std::size_t mode_a = 0;
  std::size_t mode_b = 0;
  double transmissivity = 0.5;
  friend bool operator==(const BeamSplitter&, const BeamSplitter&) = default;
};

struct PhaseShift {
  std::size_t mode = 0;
  double phase = 0.0;
  friend bool operator==(const PhaseShift&, const PhaseShift&) = default;
};

/// Time-slice marker: labels the modes occupied at this point of the network.
struct SliceMarker {
  std::vector<std::pair<std::string, std::size_t>> arms;
  friend bool operator==(const SliceMarker&, const SliceMarker&) = default;
};

using NetworkElement = std::variant<BeamSplitter, PhaseShift, SliceMarker>;

struct Detector {
  std::string label;
  std::size_t mode = 0;
  friend bool operator==(const Detector&, const Detector&) = default;
};

struct ArmLocation {
  std::size_t slice = 0;  // 1-based; slice 0 is the source
  std::size_t mode = 0;
};

class OpticalNetwork {
 public:
  OpticalNetwork(std::size_t n_modes, std::size_t source_mode, std::vector<NetworkElement> elements,
                 std::vector<Detector> detectors, std::string postselect_detector);

  std::size_t n_modes() const { return n_modes_; }
  std::size_t source_mode() const { return source_mode_; }
  const std::vector<NetworkElement>& elements() const { return elements_; }
  const std::vector<Detector>& detectors() const { return detectors_; }
  const std::string& postselect_detector() const { return postselect_; }
  std::size_t postselect_mode() const;

  /// Slice markers plus the implicit source slice 0.
  std::size_t slice_count() const { return slice_positions_.size() + 1; }
  /// Arms of slice k >= 1.
  const SliceMarker& slice(std::size_t k) const;
  /// First slice mentioning the label.
  std::optional<ArmLocation> find_arm(const std::string& label) const;
  /// Distinct arm labels, sorted.
  std::vector<std::string> arm_labels() const;

  /// Product of the element unitaries between slice `from` and slice `to`
  /// (slice_count() - 1 < to means the detectors).
  CMatrix unitary_between(std::size_t from, std::size_t to) const;
  CMatrix total_unitary() const { return unitary_between(0, slice_count()); }
  /// Index range [begin, end) into elements() between two slices.
  std::pair<std::size_t, std::size_t> element_range(std::size_t from, std::size_t to) const;

  friend bool operator==(const OpticalNetwork&, const OpticalNetwork&) = default;

 private:
  std::size_t n_modes_;
  std::size_t source_mode_;
  std::vector<NetworkElement> elements_;
  std::vector<Detector> detectors_;
  std::string postselect_;
  std::vector<std::size_t> slice_positions_;  // element index of each marker
};

/// Mode-space unitary of one optical element (identity for markers).
CMatrix element_unitary(const NetworkElement& element, std::size_t n_modes);

/// Nested Mach-Zehnder interferometer with modes
///   0: outer arm A, then detector D1;
///   1: arm D, inner arm B, inner output E, then detector D2;
///   2: inner arm C, inner output G towards D3;
///   3: probe X outside the interferometer, never reached.
/// Outer splitters have t = 1/3, inner ones t = 1/2. With the i-on-reflection
/// convention the inner interferometer sends everything entering from D to
/// G, so the forward wave in E vanishes; D1 is the post-selected detector.
OpticalNetwork build_nested_mzi();

/// Forward state at slice k: elements before the marker applied to the source.
StateVector propagate(const OpticalNetwork& net, std::size_t slice);
/// Backward state at slice k: the adjoint of the later elements applied to
/// the post-selected detector mode.
StateVector back_propagate(const OpticalNetwork& net, std::size_t slice);
/// <out|in> through the whole network.
Complex network_overlap(const OpticalNetwork& net);

struct TwoStateVector {
  std::size_t slice = 0;
  std::vector<std::string> arms;
  std::vector<Complex> forward;
  std::vector<Complex> backward;
};

TwoStateVector two_state_vector(const OpticalNetwork& net, std::size_t slice);

/// (Pi_arm)_w at the arm's first slice.
Complex arm_weak_value(const OpticalNetwork& net, const std::string& arm);
/// Weak value of the projector onto a set of modes at a slice.
Complex projector_weak_value(const OpticalNetwork& net, std::size_t slice, const std::vector<std::size_t>& modes);

/// How the rest of the network is instrumented during a weak-trace run.
enum class TraceEnvironment {
  /// Only the measured arm carries a pointer.
  isolated,
  /// Every other arm also carries a qubit probe (generator sigma_y, ready
  /// |+x>) coupled with the same g at its first slice.
  disturbed,
};

struct WeakTrace {
  double g = 0.0;
  /// ||Phi(g) - Phi_without_measured_coupling(g)|| / |<out|in>|
  double trace = 0.0;
  /// Post-selection probability with every coupling on.
  double probability = 0.0;
};

/// Couples the pointer to Pi_arm at the arm's slice, finishes the network,
/// post-selects on the chosen detector and returns the norm of the change the
/// measured coupling makes to the conditional pointer state. In the isolated
/// environment this is ||phi(g) - <out|in> |m>|| / |<out|in>|.
WeakTrace weak_trace(const OpticalNetwork& net, const std::string& arm, const Pointer& pointer, double g,
                     TraceEnvironment env = TraceEnvironment::disturbed);

struct ArmPresence {
  std::string arm;
  double leading_order = kAllFloorOrder;
  double coefficient = 0.0;
  double fit_residual = 0.0;
  PresenceClass classification = PresenceClass::none;
  std::vector<WeakTrace> traces;
};

struct PresenceReport {
  TraceEnvironment environment = TraceEnvironment::disturbed;
  std::vector<ArmPresence> arms;
};

/// Fits the leading order of each arm's weak trace over the schedule and
/// classifies it (first order -> primary, second -> secondary, all-floor -> none).
PresenceReport classify_presence(const OpticalNetwork& net, const std::vector<std::string>& arms,
                                 const Pointer& pointer, const std::vector<double>& g_schedule,
                                 TraceEnvironment env = TraceEnvironment::disturbed);

std::string to_string(TraceEnvironment env);

}  // namespace tsvf

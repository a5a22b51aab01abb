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

#include "tsvf/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tsvf {

namespace {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void fail(const std::string& what) { throw Error("optical network: " + what); }

// Applies one element to every column of a mode-major state.
void apply_element(const NetworkElement& element, RowMatrix& state) {
  std::visit(Overloaded{[&](const BeamSplitter& bs) {
                          const double t = std::sqrt(bs.transmissivity);
                          const Complex r = kI * std::sqrt(1.0 - bs.transmissivity);
                          const auto a = static_cast<Eigen::Index>(bs.mode_a);
                          const auto b = static_cast<Eigen::Index>(bs.mode_b);
                          const Eigen::Matrix<Complex, 1, Eigen::Dynamic> ra = state.row(a);
                          const Eigen::Matrix<Complex, 1, Eigen::Dynamic> rb = state.row(b);
                          state.row(a) = t * ra + r * rb;
                          state.row(b) = r * ra + t * rb;
                        },
                        [&](const PhaseShift& ps) {
                          state.row(static_cast<Eigen::Index>(ps.mode)) *= std::exp(kI * ps.phase);
                        },
                        [](const SliceMarker&) {}},
             element);
}

// Per-experiment register layout: mode-major rows; each row is indexed by
// (background bits b, measured pointer j) as b * ptr_dim + j.
struct ArmCoupling {
  std::string label;
  std::size_t mode = 0;
  int background_bit = -1;  // -1 for the measured arm
};

class TraceRun {
 public:
  TraceRun(const OpticalNetwork& net, const std::string& arm, const Pointer& pointer, TraceEnvironment env)
      : net_(net), pointer_(pointer), background_(PointerModel::qubit()) {
    const auto loc = net.find_arm(arm);
    if (!loc) fail("unknown arm '" + arm + "'");
    measured_slice_ = loc->slice;
    by_slice_.resize(net.slice_count());
    by_slice_[loc->slice].push_back({arm, loc->mode, -1});
    if (env == TraceEnvironment::disturbed) {
      for (const std::string& other : net.arm_labels()) {
        if (other == arm) continue;
        const auto oloc = net.find_arm(other);
        by_slice_[oloc->slice].push_back({other, oloc->mode, static_cast<int>(n_background_)});
        ++n_background_;
      }
    }
    if (n_background_ > 12) fail("too many arms for background probes");
    n_bg_states_ = std::size_t{1} << n_background_;
    ptr_dim_ = pointer.dim();
  }

  // Evolves the network; when `increment` is set the measured coupling is
  // replaced by Pi_arm (x) (V - I), giving Phi - Phi_off directly.
  CVector run(double g, bool increment) const {
    const auto cols = static_cast<Eigen::Index>(n_bg_states_ * ptr_dim_);
    RowMatrix state = RowMatrix::Zero(static_cast<Eigen::Index>(net_.n_modes()), cols);
    state.row(static_cast<Eigen::Index>(net_.source_mode())) = initial_register().transpose();

    const CMatrix bg_unitary = background_unitary(g);
    std::size_t slice = 0;
    for (const NetworkElement& element : net_.elements()) {
      if (std::holds_alternative<SliceMarker>(element)) {
        ++slice;
        couple_slice(slice, g, increment, bg_unitary, state);
      } else {
        apply_element(element, state);
      }
    }
    return state.row(static_cast<Eigen::Index>(net_.postselect_mode())).transpose();
  }

 private:
  CVector initial_register() const {
    const StateVector& bg_ready = background_.ready();
    CVector reg(static_cast<Eigen::Index>(n_bg_states_ * ptr_dim_));
    for (std::size_t b = 0; b < n_bg_states_; ++b) {
      Complex amp = 1.0;
      for (std::size_t q = 0; q < n_background_; ++q) amp *= bg_ready[(b >> q) & 1u];
      reg.segment(static_cast<Eigen::Index>(b * ptr_dim_), static_cast<Eigen::Index>(ptr_dim_)) =
          amp * pointer_.ready().amps();
    }
    return reg;
  }

  CMatrix background_unitary(double g) const {
    const Eigensystem& es = background_.generator_eigen();
    CVector phases(es.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * (g * es.values[k]));
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  }

  void couple_slice(std::size_t slice, double g, bool increment, const CMatrix& bg_unitary, RowMatrix& state) const {
    for (const ArmCoupling& c : by_slice_[slice]) {
      const auto row = static_cast<Eigen::Index>(c.mode);
      if (c.background_bit >= 0) {
        couple_background(static_cast<std::size_t>(c.background_bit), bg_unitary, state, row);
      } else {
        couple_measured(g, increment, state, row);
      }
    }
  }

  void couple_background(std::size_t bit, const CMatrix& u, RowMatrix& state, Eigen::Index row) const {
    const auto np = static_cast<Eigen::Index>(ptr_dim_);
    for (std::size_t b = 0; b < n_bg_states_; ++b) {
      if ((b >> bit) & 1u) continue;
      const std::size_t b1 = b | (std::size_t{1} << bit);
      const auto i0 = static_cast<Eigen::Index>(b * ptr_dim_);
      const auto i1 = static_cast<Eigen::Index>(b1 * ptr_dim_);
      const CVector s0 = state.row(row).segment(i0, np).transpose();
      const CVector s1 = state.row(row).segment(i1, np).transpose();
      state.row(row).segment(i0, np) = (u(0, 0) * s0 + u(0, 1) * s1).transpose();
      state.row(row).segment(i1, np) = (u(1, 0) * s0 + u(1, 1) * s1).transpose();
    }
  }

  void couple_measured(double g, bool increment, RowMatrix& state, Eigen::Index row) const {
    const auto np = static_cast<Eigen::Index>(ptr_dim_);
    const auto nb = static_cast<Eigen::Index>(n_bg_states_);
    // Column-major view of the row: x(j, b).
    CMatrix x = Eigen::Map<const CMatrix>(state.row(row).data(), np, nb);
    const Eigensystem& es = pointer_.generator_eigen();
    CMatrix y = es.vectors.adjoint() * x;
    for (Eigen::Index k = 0; k < np; ++k) {
      const double theta = g * es.values[k];
      y.row(k) *= increment ? phase_increment(theta) : std::exp(-kI * theta);
    }
    x = es.vectors * y;
    if (increment) state.setZero();
    Eigen::Map<CMatrix>(state.row(row).data(), np, nb) = x;
  }

  const OpticalNetwork& net_;
  const Pointer& pointer_;
  Pointer background_;
  std::size_t measured_slice_ = 0;
  std::vector<std::vector<ArmCoupling>> by_slice_;
  std::size_t n_background_ = 0;
  std::size_t n_bg_states_ = 1;
  std::size_t ptr_dim_ = 1;
};

}  // namespace

CMatrix element_unitary(const NetworkElement& element, std::size_t n_modes) {
  RowMatrix u = RowMatrix::Identity(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(n_modes));
  apply_element(element, u);
  return u;
}

OpticalNetwork::OpticalNetwork(std::size_t n_modes, std::size_t source_mode, std::vector<NetworkElement> elements,
                               std::vector<Detector> detectors, std::string postselect_detector)
    : n_modes_(n_modes),
      source_mode_(source_mode),
      elements_(std::move(elements)),
      detectors_(std::move(detectors)),
      postselect_(std::move(postselect_detector)) {
  if (n_modes_ == 0) fail("needs at least one mode");
  if (source_mode_ >= n_modes_) fail("source mode out of range");
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    std::visit(Overloaded{[&](const BeamSplitter& bs) {
                            if (bs.mode_a >= n_modes_ || bs.mode_b >= n_modes_) fail("beam splitter mode out of range");
                            if (bs.mode_a == bs.mode_b) fail("beam splitter needs two distinct modes");
                            if (!(bs.transmissivity > 0.0 && bs.transmissivity < 1.0)) {
                              fail("beam splitter transmissivity must lie in (0, 1)");
                            }
                          },
                          [&](const PhaseShift& ps) {
                            if (ps.mode >= n_modes_) fail("phase shift mode out of range");
                            if (!std::isfinite(ps.phase)) fail("phase must be finite");
                          },
                          [&](const SliceMarker& sm) {
                            std::set<std::string> labels;
                            std::set<std::size_t> modes;
                            for (const auto& [label, mode] : sm.arms) {
                              if (label.empty()) fail("empty arm label");
                              if (mode >= n_modes_) fail("arm '" + label + "' mode out of range");
                              if (!labels.insert(label).second) fail("arm '" + label + "' repeated within a slice");
                              if (!modes.insert(mode).second) fail("mode labeled twice within a slice");
                            }
                            slice_positions_.push_back(i);
                          }},
               elements_[i]);
  }
  std::set<std::string> labels;
  for (const Detector& d : detectors_) {
    if (d.mode >= n_modes_) fail("detector '" + d.label + "' mode out of range");
    if (!labels.insert(d.label).second) fail("detector '" + d.label + "' repeated");
  }
  if (!labels.count(postselect_)) fail("post-selection detector '" + postselect_ + "' is not a detector");
}

std::size_t OpticalNetwork::postselect_mode() const {
  for (const Detector& d : detectors_) {
    if (d.label == postselect_) return d.mode;
  }
  return 0;
}

const SliceMarker& OpticalNetwork::slice(std::size_t k) const {
  if (k == 0 || k >= slice_count()) fail("slice index out of range");
  return std::get<SliceMarker>(elements_[slice_positions_[k - 1]]);
}

std::optional<ArmLocation> OpticalNetwork::find_arm(const std::string& label) const {
  for (std::size_t k = 1; k < slice_count(); ++k) {
    for (const auto& [name, mode] : slice(k).arms) {
      if (name == label) return ArmLocation{k, mode};
    }
  }
  return std::nullopt;
}

std::vector<std::string> OpticalNetwork::arm_labels() const {
  std::set<std::string> labels;
  for (std::size_t k = 1; k < slice_count(); ++k) {
    for (const auto& arm : slice(k).arms) labels.insert(arm.first);
  }
  return {labels.begin(), labels.end()};
}

std::pair<std::size_t, std::size_t> OpticalNetwork::element_range(std::size_t from, std::size_t to) const {
  auto position = [&](std::size_t k) {
    if (k == 0) return std::size_t{0};
    if (k >= slice_count()) return elements_.size();
    return slice_positions_[k - 1];
  };
  if (from > to) fail("slice range is reversed");
  return {position(from), position(to)};
}

CMatrix OpticalNetwork::unitary_between(std::size_t from, std::size_t to) const {
  const auto [begin, end] = element_range(from, to);
  RowMatrix u = RowMatrix::Identity(static_cast<Eigen::Index>(n_modes_), static_cast<Eigen::Index>(n_modes_));
  for (std::size_t i = begin; i < end; ++i) apply_element(elements_[i], u);
  return u;
}

OpticalNetwork build_nested_mzi() {
  const double outer = 1.0 / 3.0;
  std::vector<NetworkElement> elements{
      BeamSplitter{0, 1, outer},
      SliceMarker{{{"A", 0}, {"D", 1}, {"X", 3}}},
      BeamSplitter{1, 2, 0.5},
      SliceMarker{{{"A", 0}, {"B", 1}, {"C", 2}, {"X", 3}}},
      BeamSplitter{1, 2, 0.5},
      SliceMarker{{{"A", 0}, {"E", 1}, {"G", 2}, {"X", 3}}},
      BeamSplitter{0, 1, outer},
  };
  std::vector<Detector> detectors{{"D1", 0}, {"D2", 1}, {"D3", 2}};
  return OpticalNetwork(4, 0, std::move(elements), std::move(detectors), "D1");
}

StateVector propagate(const OpticalNetwork& net, std::size_t slice) {
  if (slice >= net.slice_count()) fail("slice index out of range");
  const CMatrix u = net.unitary_between(0, slice);
  return StateVector(u.col(static_cast<Eigen::Index>(net.source_mode())));
}

StateVector back_propagate(const OpticalNetwork& net, std::size_t slice) {
  if (slice >= net.slice_count()) fail("slice index out of range");
  const CMatrix u = net.unitary_between(slice, net.slice_count());
  return StateVector(u.adjoint().col(static_cast<Eigen::Index>(net.postselect_mode())));
}

Complex network_overlap(const OpticalNetwork& net) {
  return net.total_unitary()(static_cast<Eigen::Index>(net.postselect_mode()),
                             static_cast<Eigen::Index>(net.source_mode()));
}

TwoStateVector two_state_vector(const OpticalNetwork& net, std::size_t slice) {
  TwoStateVector tsv;
  tsv.slice = slice;
  const StateVector fwd = propagate(net, slice);
  const StateVector bwd = back_propagate(net, slice);
  if (slice == 0) {
    tsv.arms.push_back("source");
    tsv.forward.push_back(fwd[net.source_mode()]);
    tsv.backward.push_back(bwd[net.source_mode()]);
    return tsv;
  }
  for (const auto& [label, mode] : net.slice(slice).arms) {
    tsv.arms.push_back(label);
    tsv.forward.push_back(fwd[mode]);
    tsv.backward.push_back(bwd[mode]);
  }
  return tsv;
}

Complex projector_weak_value(const OpticalNetwork& net, std::size_t slice, const std::vector<std::size_t>& modes) {
  const Complex overlap = network_overlap(net);
  if (std::abs(overlap) <= 1e-12) {
    std::ostringstream msg;
    msg << "dark post-selection detector '" << net.postselect_detector() << "': |<out|in>| = " << std::abs(overlap);
    throw Error(msg.str());
  }
  const StateVector fwd = propagate(net, slice);
  const StateVector bwd = back_propagate(net, slice);
  Complex sum = 0.0;
  for (std::size_t mode : modes) {
    if (mode >= net.n_modes()) fail("mode out of range");
    sum += std::conj(bwd[mode]) * fwd[mode];
  }
  return sum / overlap;
}

Complex arm_weak_value(const OpticalNetwork& net, const std::string& arm) {
  const auto loc = net.find_arm(arm);
  if (!loc) fail("unknown arm '" + arm + "'");
  return projector_weak_value(net, loc->slice, {loc->mode});
}

WeakTrace weak_trace(const OpticalNetwork& net, const std::string& arm, const Pointer& pointer, double g,
                     TraceEnvironment env) {
  if (!std::isfinite(g)) throw Error("coupling strength must be finite");
  const Complex overlap = network_overlap(net);
  if (std::abs(overlap) <= 1e-12) {
    throw Error("weak trace: post-selection detector '" + net.postselect_detector() + "' is dark at g = 0");
  }
  const TraceRun run(net, arm, pointer, env);
  WeakTrace t;
  t.g = g;
  t.trace = run.run(g, true).norm() / std::abs(overlap);
  t.probability = run.run(g, false).squaredNorm();
  return t;
}

PresenceReport classify_presence(const OpticalNetwork& net, const std::vector<std::string>& arms,
                                 const Pointer& pointer, const std::vector<double>& g_schedule,
                                 TraceEnvironment env) {
  check_schedule(g_schedule, kMinFitPoints);
  if (g_schedule.front() / g_schedule.back() < 10.0 * (1.0 - 1e-9)) {
    throw Error("presence schedule must span at least one decade of g");
  }
  PresenceReport report;
  report.environment = env;
  for (const std::string& arm : arms) {
    ArmPresence entry;
    entry.arm = arm;
    std::vector<double> values;
    bool lit = false;
    for (double g : g_schedule) {
      entry.traces.push_back(weak_trace(net, arm, pointer, g, env));
      values.push_back(entry.traces.back().trace);
      lit = lit || entry.traces.back().probability >= kDarkProbability;
    }
    if (!lit) throw DarkPostSelectionError("post-selection detector dark at every schedule point for arm " + arm);
    const OrderFit fit = fit_order(g_schedule, values);
    entry.leading_order = fit.order;
    entry.coefficient = fit.coefficient;
    entry.fit_residual = fit.residual;
    entry.classification = classify_order(fit.order);
    report.arms.push_back(std::move(entry));
  }
  return report;
}

std::string to_string(TraceEnvironment env) {
  return env == TraceEnvironment::isolated ? "isolated" : "disturbed";
}

}  // namespace tsvf

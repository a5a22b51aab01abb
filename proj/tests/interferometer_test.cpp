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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsvf/interferometer.hpp"

namespace tsvf {
namespace {

// Hand-built 4-mode splitter for the oracle below.
Eigen::Matrix4cd splitter(int a, int b, double t) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  const double r = std::sqrt(1.0 - t);
  u(a, a) = std::sqrt(t);
  u(b, b) = std::sqrt(t);
  u(a, b) = Complex(0.0, r);
  u(b, a) = Complex(0.0, r);
  return u;
}

struct NestedOracle {
  Eigen::Vector4cd fwd1, fwd2, fwd3;  // after the first, second and third splitter
  Eigen::Vector4cd bwd1, bwd2, bwd3;  // backward states at the same slices
  Complex overlap;

  NestedOracle() {
    const Eigen::Matrix4cd b1 = splitter(0, 1, 1.0 / 3.0);
    const Eigen::Matrix4cd b2 = splitter(1, 2, 0.5);
    const Eigen::Matrix4cd b3 = splitter(1, 2, 0.5);
    const Eigen::Matrix4cd b4 = splitter(0, 1, 1.0 / 3.0);
    const Eigen::Vector4cd src = Eigen::Vector4cd::Unit(0);
    const Eigen::Vector4cd det = Eigen::Vector4cd::Unit(0);
    fwd1 = b1 * src;
    fwd2 = b2 * fwd1;
    fwd3 = b3 * fwd2;
    bwd3 = b4.adjoint() * det;
    bwd2 = b3.adjoint() * bwd3;
    bwd1 = b2.adjoint() * bwd2;
    overlap = det.dot(b4 * fwd3);
  }

  Complex weak(const Eigen::Vector4cd& f, const Eigen::Vector4cd& b, int mode) const {
    return std::conj(b[mode]) * f[mode] / overlap;
  }
};

TEST(ElementUnitary, SplitterConventionAndPhase) {
  const CMatrix u = element_unitary(BeamSplitter{0, 1, 0.25}, 3);
  EXPECT_NEAR(std::abs(u(0, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(0, 1) - Complex(0.0, std::sqrt(0.75))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(1, 0) - Complex(0.0, std::sqrt(0.75))), 0.0, 1e-15);
  EXPECT_EQ(u(2, 2), Complex(1.0, 0.0));
  EXPECT_LT((u.adjoint() * u - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  const CMatrix p = element_unitary(PhaseShift{1, 0.7}, 2);
  EXPECT_LT(std::abs(p(1, 1) - std::exp(Complex(0.0, 0.7))), 1e-15);
  EXPECT_EQ(element_unitary(SliceMarker{}, 2), CMatrix::Identity(2, 2));
}

TEST(OpticalNetwork, ValidatesConstruction) {
  EXPECT_THROW(OpticalNetwork(2, 2, {}, {{"D", 0}}, "D"), Error);
  EXPECT_THROW(OpticalNetwork(2, 0, {BeamSplitter{0, 2, 0.5}}, {{"D", 0}}, "D"), Error);
  EXPECT_THROW(OpticalNetwork(2, 0, {BeamSplitter{0, 1, 1.5}}, {{"D", 0}}, "D"), Error);
  EXPECT_THROW(OpticalNetwork(2, 0, {}, {{"D", 0}}, "Q"), Error);
  EXPECT_THROW(OpticalNetwork(2, 0, {SliceMarker{{{"A", 0}, {"A", 1}}}}, {{"D", 0}}, "D"), Error);
}

TEST(NestedMzi, ArmLabelsAndSlices) {
  const OpticalNetwork net = build_nested_mzi();
  EXPECT_EQ(net.slice_count(), 4u);
  EXPECT_EQ(net.arm_labels(), (std::vector<std::string>{"A", "B", "C", "D", "E", "G", "X"}));
  EXPECT_EQ(net.find_arm("A")->slice, 1u);
  EXPECT_EQ(net.find_arm("E")->slice, 3u);
  EXPECT_EQ(net.find_arm("E")->mode, 1u);
  EXPECT_FALSE(net.find_arm("Z").has_value());
  EXPECT_EQ(net.postselect_mode(), 0u);
}

TEST(NestedMzi, MatchesHandMultipliedOracle) {
  const OpticalNetwork net = build_nested_mzi();
  const NestedOracle o;
  EXPECT_LT(std::abs(network_overlap(net) - o.overlap), 1e-14);
  EXPECT_LT(std::abs(o.overlap - 1.0 / 3.0), 1e-14);
  const std::pair<std::size_t, const Eigen::Vector4cd*> fwd[] = {{1, &o.fwd1}, {2, &o.fwd2}, {3, &o.fwd3}};
  const Eigen::Vector4cd* bwd[] = {&o.bwd1, &o.bwd2, &o.bwd3};
  for (int k = 0; k < 3; ++k) {
    const StateVector f = propagate(net, fwd[k].first);
    const StateVector b = back_propagate(net, fwd[k].first);
    EXPECT_LT((f.amps() - *fwd[k].second).norm(), 1e-14) << "slice " << k + 1;
    EXPECT_LT((b.amps() - *bwd[k]).norm(), 1e-14) << "slice " << k + 1;
  }
  EXPECT_LT(std::abs(arm_weak_value(net, "A") - o.weak(o.fwd1, o.bwd1, 0)), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "D") - o.weak(o.fwd1, o.bwd1, 1)), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "B") - o.weak(o.fwd2, o.bwd2, 1)), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "C") - o.weak(o.fwd2, o.bwd2, 2)), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "E") - o.weak(o.fwd3, o.bwd3, 1)), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "G") - o.weak(o.fwd3, o.bwd3, 2)), 1e-12);
}

TEST(NestedMzi, ForwardAndBackwardZeros) {
  const OpticalNetwork net = build_nested_mzi();
  const TwoStateVector s3 = two_state_vector(net, 3);
  ASSERT_EQ(s3.arms, (std::vector<std::string>{"A", "E", "G", "X"}));
  EXPECT_LT(std::abs(s3.forward[1]), 1e-12);   // E: no forward wave
  EXPECT_GT(std::abs(s3.backward[1]), 0.1);    // E: backward wave present
  EXPECT_LT(std::abs(s3.backward[2]), 1e-12);  // G: no backward wave
  const TwoStateVector s1 = two_state_vector(net, 1);
  EXPECT_GT(std::abs(s1.forward[1]), 0.1);   // D: forward wave present
  EXPECT_LT(std::abs(s1.backward[1]), 1e-12);  // D: no backward wave
  const TwoStateVector s0 = two_state_vector(net, 0);
  EXPECT_EQ(s0.arms, std::vector<std::string>{"source"});
}

TEST(NestedMzi, WeakValues) {
  const OpticalNetwork net = build_nested_mzi();
  EXPECT_LT(std::abs(arm_weak_value(net, "A") - 1.0), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "B") + 1.0), 1e-12);
  EXPECT_LT(std::abs(arm_weak_value(net, "C") - 1.0), 1e-12);
  for (const char* arm : {"D", "E", "G", "X"}) EXPECT_LT(std::abs(arm_weak_value(net, arm)), 1e-12) << arm;
}

TEST(NestedMzi, SliceSumRule) {
  const OpticalNetwork net = build_nested_mzi();
  for (std::size_t k = 1; k < net.slice_count(); ++k) {
    Complex sum = 0.0;
    for (const auto& [label, mode] : net.slice(k).arms) sum += projector_weak_value(net, k, {mode});
    EXPECT_LT(std::abs(sum - 1.0), 1e-12) << "slice " << k;
  }
}

TEST(WeakTrace, IsolatedEnvironmentLeavesZeroWeakValueArmsExactlyUntouched) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::qubit());
  for (const char* arm : {"D", "E", "G", "X"}) {
    EXPECT_EQ(weak_trace(net, arm, ptr, 0.01, TraceEnvironment::isolated).trace, 0.0) << arm;
  }
  EXPECT_GT(weak_trace(net, "A", ptr, 0.01, TraceEnvironment::isolated).trace, 1e-3);
}

TEST(WeakTrace, IsolatedTraceMatchesClosedForm) {
  // ||phi(g) - <out|in> m|| / |<out|in>| = |w| ||(exp(-i g G) - 1) m|| for a projector coupling
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::gaussian(2.0));
  for (double g : {0.3, 0.01}) {
    const double expected = std::abs(arm_weak_value(net, "B")) * ptr.translate_increment(ptr.ready(), g).norm();
    EXPECT_NEAR(weak_trace(net, "B", ptr, g, TraceEnvironment::isolated).trace, expected, 1e-12);
  }
}

TEST(WeakTrace, ZeroCouplingGivesZeroTrace) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::qubit());
  const WeakTrace t = weak_trace(net, "A", ptr, 0.0);
  EXPECT_EQ(t.trace, 0.0);
  EXPECT_NEAR(t.probability, 1.0 / 9.0, 1e-14);
}

TEST(WeakTrace, DarkDetectorThrows) {
  const OpticalNetwork mzi(2, 0, {BeamSplitter{0, 1, 0.5}, SliceMarker{{{"A", 0}, {"B", 1}}}, BeamSplitter{0, 1, 0.5}},
                           {{"D0", 0}, {"D1", 1}}, "D0");
  EXPECT_LT(std::abs(network_overlap(mzi)), 1e-15);
  EXPECT_THROW(weak_trace(mzi, "A", Pointer(PointerModel::qubit()), 0.01), Error);
  EXPECT_THROW(arm_weak_value(mzi, "A"), Error);
}

TEST(Presence, NestedMziClassification) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::gaussian(2.0));
  const PresenceReport r = classify_presence(net, {"A", "B", "C", "D", "E", "X"}, ptr, default_decade());
  ASSERT_EQ(r.arms.size(), 6u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.arms[i].classification, PresenceClass::primary) << r.arms[i].arm;
    EXPECT_NEAR(r.arms[i].leading_order, 1.0, 0.1);
  }
  for (std::size_t i = 3; i < 5; ++i) {
    EXPECT_EQ(r.arms[i].classification, PresenceClass::secondary) << r.arms[i].arm;
    EXPECT_NEAR(r.arms[i].leading_order, 2.0, 0.15);
  }
  EXPECT_EQ(r.arms[5].classification, PresenceClass::none);
  EXPECT_TRUE(std::isinf(r.arms[5].leading_order));
}

TEST(Presence, QubitPointerGivesSameClassification) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::qubit());
  const PresenceReport r = classify_presence(net, net.arm_labels(), ptr, default_decade());
  const std::vector<PresenceClass> expected{PresenceClass::primary,   PresenceClass::primary, PresenceClass::primary,
                                            PresenceClass::secondary, PresenceClass::secondary, PresenceClass::none,
                                            PresenceClass::none};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(r.arms[i].classification, expected[i]) << r.arms[i].arm;
}

TEST(Presence, TraceRatioGrowsAsCouplingShrinks) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::gaussian(2.0));
  const auto ratio = [&](double g) { return weak_trace(net, "A", ptr, g).trace / weak_trace(net, "E", ptr, g).trace; };
  EXPECT_GE(ratio(1e-3) / ratio(1e-2), 8.0);
  EXPECT_GE(ratio(1e-4) / ratio(1e-3), 8.0);
}

TEST(Presence, RejectsShortSchedule) {
  const OpticalNetwork net = build_nested_mzi();
  const Pointer ptr(PointerModel::qubit());
  EXPECT_THROW(classify_presence(net, {"A"}, ptr, {1e-2, 8e-3, 6e-3, 4e-3}), Error);
}

// Random three-mode networks: arms with a clearly nonzero weak value are
// first order; arms the forward wave never reaches, and the last-slice arm
// that feeds an unselected detector directly, leave no trace at all.
TEST(Presence, RandomNetworksFollowTheOrderDichotomy) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> t_dist(0.1, 0.9);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  const Pointer ptr(PointerModel::qubit());
  int checked = 0;
  while (checked < 8) {
    std::vector<NetworkElement> elements{SliceMarker{{{"S0", 0}, {"U1", 1}, {"U2", 2}}},
                                         BeamSplitter{0, 1, t_dist(rng)},
                                         PhaseShift{1, phase_dist(rng)},
                                         SliceMarker{{{"P0", 0}, {"P1", 1}, {"U3", 2}}},
                                         BeamSplitter{1, 2, t_dist(rng)},
                                         PhaseShift{2, phase_dist(rng)},
                                         SliceMarker{{{"Q0", 0}, {"Q1", 1}, {"Q2", 2}}},
                                         BeamSplitter{0, 2, t_dist(rng)}};
    const OpticalNetwork net(3, 0, elements, {{"D0", 0}, {"D1", 1}, {"D2", 2}}, "D0");
    if (std::abs(network_overlap(net)) < 0.05) continue;
    bool clear = true;
    for (const char* arm : {"P0", "P1", "Q0", "Q2"}) clear = clear && std::abs(arm_weak_value(net, arm)) > 0.1;
    if (!clear) continue;
    ++checked;
    const PresenceReport r = classify_presence(net, net.arm_labels(), ptr, default_decade());
    for (const ArmPresence& a : r.arms) {
      const bool traceless = a.arm == "U1" || a.arm == "U2" || a.arm == "U3" || a.arm == "Q1";
      EXPECT_EQ(a.classification, traceless ? PresenceClass::none : PresenceClass::primary) << a.arm;
    }
  }
}

}  // namespace
}  // namespace tsvf

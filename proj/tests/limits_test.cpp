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

#include "support.hpp"
#include "tsvf/limits.hpp"
#include "tsvf/pointer.hpp"

namespace tsvf {
namespace {

using testing::random_hermitian;
using testing::random_state;
using testing::up_x;
using testing::up_z;

std::vector<double> apply(const std::vector<double>& g, double a, double n) {
  std::vector<double> out;
  for (double x : g) out.push_back(a * std::pow(x, n));
  return out;
}

TEST(FitOrder, RecoversSyntheticQuadratic) {
  const auto g = default_decade();
  const OrderFit fit = fit_order(g, apply(g, 3.0, 2.0));
  EXPECT_NEAR(fit.order, 2.0, 0.01);
  EXPECT_NEAR(fit.coefficient, 3.0, 0.06);
  EXPECT_EQ(fit.floored, 0u);
}

TEST(FitOrder, ExactMonomialsToOneInAMillion) {
  const auto g = default_decade();
  for (double n : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (double a : {0.1, 1.0, 7.0}) {
      const OrderFit fit = fit_order(g, apply(g, a, n));
      EXPECT_NEAR(fit.order, n, 1e-6);
      EXPECT_NEAR(fit.coefficient, a, 1e-6 * a);
      EXPECT_LT(fit.residual, 1e-9);
    }
  }
}

TEST(FitOrder, AllFloorSentinel) {
  const auto g = default_decade();
  const OrderFit zero = fit_order(g, std::vector<double>(g.size(), 0.0));
  EXPECT_TRUE(zero.all_floor());
  EXPECT_EQ(zero.floored, g.size());
  std::vector<double> three(g.size(), 1e-15);
  three[0] = three[1] = three[2] = 1.0;
  EXPECT_TRUE(fit_order(g, three).all_floor());
}

TEST(FitOrder, FlooredValuesAreExcludedAndCounted) {
  const auto g = default_decade();
  auto v = apply(g, 2.0, 1.0);
  v.back() = 0.0;
  v[v.size() - 2] = 5e-15;
  const std::vector<double> head(g.begin(), g.end());
  const OrderFit fit = fit_order(head, v);
  EXPECT_EQ(fit.floored, 2u);
  EXPECT_NEAR(fit.order, 1.0, 1e-9);
}

TEST(FitOrder, RejectsShortSpanAndMismatch) {
  EXPECT_THROW(fit_order(std::vector<double>{1e-2, 8e-3, 6e-3, 4e-3}, std::vector<double>{1, 2, 3, 4}), Error);
  EXPECT_THROW(fit_order(std::vector<double>{1e-2, 1e-3}, std::vector<double>{1.0}), Error);
}

TEST(GeometricSchedule, EndpointsAndRatio) {
  const auto g = default_decade();
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-2);
  EXPECT_DOUBLE_EQ(g.back(), 1e-4);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i - 1] / g[i], std::sqrt(std::sqrt(10.0)), 1e-12);
  EXPECT_THROW(geometric_schedule(1e-4, 1e-2, 9), Error);
  EXPECT_THROW(geometric_schedule(1e-2, 1e-4, 1), Error);
}

TEST(MetricNames, RoundTrip) {
  for (Metric m : kAllMetrics) EXPECT_EQ(metric_from_string(to_string(m)), m);
  EXPECT_THROW(metric_from_string("speed"), Error);
}

class SpinProbe : public ::testing::Test {
 protected:
  Pointer ptr{PointerModel::gaussian(2.0)};
  LinearOperator sz = LinearOperator::pauli_z();
};

TEST_F(SpinProbe, ContinuityIsZeroAtZeroCoupling) {
  EXPECT_EQ(continuity_metric(up_x(), ptr.ready(), sz, ptr.generator(), 0.0), 0.0);
  EXPECT_EQ(derail_metric(up_x(), ptr.ready(), sz, ptr.generator(), 0.0), 0.0);
}

TEST_F(SpinProbe, ContinuityIsFirstOrderWithNormCoefficient) {
  const MetricProbe probe(up_x(), ptr.ready(), sz, ptr.generator());
  const SweepResult r = sweep(probe, Metric::continuity, default_decade());
  EXPECT_NEAR(r.fitted_order, 1.0, 0.05);
  // ||S in|| * ||P m|| = 1 * 1 / (2 spread)
  EXPECT_NEAR(r.fitted_coefficient, 0.25, 1e-4);
  EXPECT_NEAR(probe.continuity(1e-4) / 1e-4, 0.25, 1e-6);
}

TEST_F(SpinProbe, DerailTakesTheWholeFirstOrderTerm) {
  const MetricProbe probe(up_x(), ptr.ready(), sz, ptr.generator());
  const SweepResult r = sweep(probe, Metric::derail, default_decade());
  EXPECT_NEAR(r.fitted_order, 1.0, 0.05);
  EXPECT_NEAR(probe.derail(1e-4) / 1e-4, 0.25, 1e-6);
}

TEST_F(SpinProbe, EigenstateNeverDerails) {
  const MetricProbe probe(up_z(), ptr.ready(), sz, ptr.generator());
  for (double g : {1e-4, 1e-2, 0.5, 3.0, 40.0}) EXPECT_LE(probe.derail(g), 1e-14) << g;
}

TEST_F(SpinProbe, OverlapDeficitIsSecondOrderWhenPointerMeanVanishes) {
  ASSERT_NEAR(ptr.generator_baseline(), 0.0, 1e-14);
  const MetricProbe probe(up_x(), ptr.ready(), sz, ptr.generator());
  const SweepResult r = sweep(probe, Metric::overlap_deficit, default_decade());
  EXPECT_NEAR(r.fitted_order, 2.0, 0.05);
}

TEST_F(SpinProbe, FirstOrderResidualIsSecondOrder) {
  const MetricProbe probe(up_x(), ptr.ready(), sz, ptr.generator());
  const SweepResult r = sweep(probe, Metric::first_order_residual, default_decade());
  EXPECT_NEAR(r.fitted_order, 2.0, 0.1);
}

TEST(Metrics, BoundsAtLargeCoupling) {
  std::mt19937_64 rng(55);
  for (int i = 0; i < 20; ++i) {
    const StateVector in = random_state(rng, 3);
    const StateVector m = random_state(rng, 4);
    const LinearOperator s = random_hermitian(rng, 3);
    const LinearOperator p = random_hermitian(rng, 4);
    const MetricProbe probe(in, m, s, p);
    for (double g : {0.5, 5.0, 50.0}) {
      EXPECT_LE(probe.continuity(g), 2.0 + 1e-12);
      EXPECT_LE(probe.derail(g), 1.0 + 1e-12);
      EXPECT_GE(probe.overlap_deficit(g), 0.0);
      EXPECT_LE(probe.overlap_deficit(g), 1.0 + 1e-12);
    }
  }
}

TEST(Metrics, KilledInputStateIsUntouched) {
  CVector in(3);
  in << 1.0, 1.0, 0.0;
  CMatrix s(3, 3);
  s << 0.5, -0.5, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 1.0;
  const Pointer ptr(PointerModel::gaussian(2.0));
  const MetricProbe probe(StateVector::normalize(in), ptr.ready(), LinearOperator(s), ptr.generator());
  for (double g : {1e-4, 0.1, 1.0, 10.0}) {
    EXPECT_LE(probe.continuity(g), 1e-14);
    EXPECT_LE(probe.first_order_residual(g), 1e-14);
  }
  EXPECT_TRUE(sweep(probe, Metric::continuity, default_decade()).fitted_order == kAllFloorOrder);
}

TEST(Metrics, DerailCorrectionIsAtLeastSecondOrder) {
  std::mt19937_64 rng(66);
  const Pointer ptr(PointerModel::gaussian(2.0));
  for (int i = 0; i < 5; ++i) {
    const StateVector in = random_state(rng, 3);
    const LinearOperator s = random_hermitian(rng, 3);
    const MetricProbe probe(in, ptr.ready(), s, ptr.generator());
    const CVector s_in = s.entries() * in.amps();
    const CVector perp = s_in - in.amps() * in.amps().dot(s_in);
    const double lead = perp.norm() * ptr.generator().apply(ptr.ready()).norm();
    const auto g = default_decade();
    std::vector<double> correction;
    for (double x : g) correction.push_back(std::abs(probe.derail(x) - lead * x));
    const OrderFit fit = fit_order(g, correction);
    EXPECT_TRUE(fit.all_floor() || fit.order >= 2.0 - 0.05) << fit.order;
  }
}

TEST(Metrics, ContinuityOrderAtLeastOneOnRandomSetups) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    const std::size_t d = 2 + static_cast<std::size_t>(i % 4);
    const MetricProbe probe(random_state(rng, d), random_state(rng, 3), random_hermitian(rng, d),
                            random_hermitian(rng, 3));
    const SweepResult c = sweep(probe, Metric::continuity, default_decade());
    EXPECT_GE(c.fitted_order, 0.95);
    const SweepResult f = sweep(probe, Metric::first_order_residual, default_decade());
    EXPECT_NEAR(f.fitted_order, 2.0, 0.1);
  }
}

TEST(Sweep, RejectsBadSchedules) {
  const Pointer ptr(PointerModel::qubit());
  const MetricProbe probe(up_x(), ptr.ready(), LinearOperator::pauli_z(), ptr.generator());
  EXPECT_THROW(sweep(probe, Metric::continuity, {1e-3, 1e-2, 1e-4, 1e-5}), Error);
  EXPECT_THROW(sweep(probe, Metric::continuity, {1e-2, 1e-3, 1e-4}), Error);
}

TEST(ClassifyOrder, Bands) {
  EXPECT_EQ(classify_order(0.75), PresenceClass::primary);
  EXPECT_EQ(classify_order(1.25), PresenceClass::primary);
  EXPECT_EQ(classify_order(1.75), PresenceClass::secondary);
  EXPECT_EQ(classify_order(2.5), PresenceClass::secondary);
  EXPECT_EQ(classify_order(kAllFloorOrder), PresenceClass::none);
  EXPECT_THROW(classify_order(1.5), UnclassifiedOrderError);
  EXPECT_THROW(classify_order(0.5), UnclassifiedOrderError);
  EXPECT_THROW(classify_order(3.0), UnclassifiedOrderError);
}

TEST(CompareLimits, SpinSzConvergesBothWays) {
  const PrePostSelection sel(up_x(), up_z());
  const LimitsReport r = compare_limits(sel, LinearOperator::pauli_z(), {1, 2, 4, 8, 16, 32},
                                        default_schedule(PointerModel::gaussian(2.0)));
  EXPECT_LT(std::abs(r.analytic - 1.0), 1e-12);
  EXPECT_LE(r.g_trajectory.back().deviation, 1e-3);
  EXPECT_LE(r.spread_trajectory.back().deviation, 1e-3);
  EXPECT_LT(std::abs(r.g_extrapolated.value - 1.0), 1e-3);
}

TEST(CompareLimits, EigenstateTrajectoriesAreConstant) {
  const LinearOperator s = LinearOperator::pauli_z() * 0.5;
  const PrePostSelection sel(up_z(), up_x());
  const LimitsReport r = compare_limits(sel, s, {1, 2, 4, 8}, {0.04, 0.02, 0.01, 0.005});
  for (const auto* traj : {&r.g_trajectory, &r.spread_trajectory}) {
    for (const LimitPoint& p : *traj) EXPECT_LT(std::abs(p.estimate - 0.5), 1e-9);
  }
}

TEST(CompareLimits, SpreadDeviationDecreasesMonotonically) {
  const LinearOperator splus = (LinearOperator::pauli_z() + LinearOperator::pauli_x()) / std::sqrt(2.0);
  const PrePostSelection sel(up_x(), up_z());
  CompareLimitsOptions opts;
  opts.fixed_g = 0.5;
  const LimitsReport r = compare_limits(sel, splus, {1, 2, 4, 8, 16}, {0.04, 0.02, 0.01, 0.005}, opts);
  for (std::size_t i = 1; i < r.spread_trajectory.size(); ++i) {
    EXPECT_LT(r.spread_trajectory[i].deviation, r.spread_trajectory[i - 1].deviation);
  }
}

TEST(CompareLimits, RejectsBadSpreads) {
  const PrePostSelection sel(up_x(), up_z());
  EXPECT_THROW(compare_limits(sel, LinearOperator::pauli_z(), {2, 1}, {0.04, 0.02, 0.01, 0.005}), Error);
  EXPECT_THROW(compare_limits(sel, LinearOperator::pauli_z(), {2}, {0.04, 0.02, 0.01, 0.005}), Error);
}

}  // namespace
}  // namespace tsvf

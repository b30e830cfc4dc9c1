#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gltunnel/bend_planner.hpp"
#include "gltunnel/error.hpp"
#include "gltunnel/smoother.hpp"

using namespace gltunnel;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const TunnelError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no TunnelError thrown";
  return ErrorCode::InvalidArgument;
}

const BendPlan& default_plan() {
  static const BendPlan plan = build_plan(AmbientModel::flat(3, 0.1));
  return plan;
}

double max_plan_k(const BendPlan& plan) {
  double k = 0.0;
  for (const auto& s : plan.segments()) k = std::max(k, s.k);
  return k;
}

}  // namespace

TEST(Smoother, TotalTurnIsQuarterTurn) {
  const auto smoothed = smooth_profile(default_plan());
  EXPECT_EQ(smoothed.kind(), ProfileKind::Smoothed);
  EXPECT_NEAR(smoothed.integral(), kHalfPi, 1e-12);
  double sum = 0.0;
  for (const auto& p : smoothed.pieces()) sum += p.integral();
  EXPECT_NEAR(sum, kHalfPi, 1e-12);
}

TEST(Smoother, Contract) {
  const auto& plan = default_plan();
  const auto smoothed = smooth_profile(plan);
  const auto cert = verify_smoothed(plan, smoothed, plan.total_length / 20000);
  EXPECT_TRUE(cert.passed());
  EXPECT_NEAR(cert.theta_closure, kHalfPi, 1e-12);
  EXPECT_TRUE(cert.theta_bound_ok);
  EXPECT_LE(cert.sup_theta_dev, cert.l1_deviation);
  EXPECT_TRUE(cert.tail_ok);
  EXPECT_GT(cert.margin_smoothed.min_margin, 0.0);
  EXPECT_GT(cert.r_inf, 0.0);
}

TEST(Smoother, BelowPlanOnBend) {
  const auto& plan = default_plan();
  const auto smoothed = smooth_profile(plan);
  const auto pw = plan.profile();
  const auto segs = plan.segments();
  for (std::size_t j = 0; j <= plan.closing_index(); ++j) {
    for (int i = 0; i <= 200; ++i) {
      const double u = segs[j].delta_s * i / 200.0;
      const double ke = smoothed.k_at(j, u);
      EXPECT_LE(ke, pw.k_at(j, u) * (1 + 1e-15)) << "segment " << j << " u " << u;
      EXPECT_GE(ke, 0.0);
    }
  }
  for (const auto& p : smoothed.pieces()) {
    if (p.segment > plan.closing_index()) continue;
    // Ramp ends, where the plan jumps.
    EXPECT_LE(p.k(0.0), segs[p.segment].k);
    EXPECT_LE(p.k(p.length), segs[p.segment].k);
  }
}

TEST(Smoother, L1Deviation) {
  const auto& plan = default_plan();
  const double eta = resolve_eta(plan, {});
  const auto a = smooth_profile(plan);
  const double l1 = a.l1_distance(plan.profile());
  // The tail plateau repays what the ramps cut away, hence the factor 2.
  EXPECT_LE(l1, 2.0 * (plan.m() + 2) * eta * max_plan_k(plan));
  EXPECT_GT(l1, 0.0);

  const auto b = smooth_profile(plan, {eta / 2});
  EXPECT_LE(b.l1_distance(plan.profile()), l1);
  EXPECT_NEAR(b.integral(), kHalfPi, 1e-12);
}

TEST(Smoother, C2Joints) {
  const auto smoothed = smooth_profile(default_plan());
  const auto& pieces = smoothed.pieces();
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const auto& p = pieces[i];
    const auto& q = pieces[i + 1];
    const double scale = std::max({1.0, std::abs(p.k_begin), std::abs(p.k_end)});
    EXPECT_NEAR(p.k(p.length), q.k(0.0), 1e-12 * scale) << i;
    EXPECT_EQ(p.dk(p.length), 0.0) << i;
    EXPECT_EQ(q.dk(0.0), 0.0) << i;
    EXPECT_NEAR(p.d2k(p.length), 0.0, 1e-9 * scale / (p.length * p.length)) << i;
    EXPECT_NEAR(q.d2k(0.0), 0.0, 1e-9 * scale / (q.length * q.length)) << i;
  }
  // Starts from the straight collar.
  EXPECT_EQ(pieces.front().k(0.0), 0.0);
  EXPECT_EQ(pieces.front().k_end, 1.0);
  EXPECT_EQ(pieces.back().k(pieces.back().length), 0.0);
}

TEST(Smoother, EtaErrors) {
  const auto& plan = default_plan();
  EXPECT_EQ(code_of([&] { smooth_profile(plan, {1.0}); }), ErrorCode::EtaTooLarge);
  EXPECT_EQ(code_of([&] { smooth_profile(plan, {0.0}); }), ErrorCode::EtaTooLarge);
  EXPECT_EQ(code_of([&] { smooth_profile(plan, {-1e-20}); }), ErrorCode::EtaTooLarge);
  const double eta = resolve_eta(plan, {});
  EXPECT_EQ(code_of([&] { smooth_profile(plan, {eta * 4.0}); }), ErrorCode::EtaTooLarge);
  EXPECT_NO_THROW(smooth_profile(plan, {eta * 3.9}));
  EXPECT_EQ(code_of([&] { smooth_profile(plan, {std::nullopt, 0.0}); }), ErrorCode::InvalidArgument);
}

TEST(Smoother, SingleSegmentBend) {
  AmbientModel model = AmbientModel::flat(3, 2.37);
  model.delta = 5.0;
  const auto plan = build_plan(model);
  ASSERT_EQ(plan.m(), 1u);
  const auto smoothed = smooth_profile(plan);
  EXPECT_NEAR(smoothed.integral(), kHalfPi, 1e-12);
  const auto cert = verify_smoothed(plan, smoothed, plan.total_length / 20000);
  EXPECT_TRUE(cert.passed());
}

TEST(Smoother, AcrossDelta0) {
  for (double delta0 : {0.2, 0.05, 0.025}) {
    const auto plan = build_plan(AmbientModel::flat(3, delta0));
    const auto smoothed = smooth_profile(plan);
    EXPECT_NEAR(smoothed.integral(), kHalfPi, 1e-12) << delta0;
    const auto cert = verify_smoothed(plan, smoothed, plan.total_length / 20000);
    EXPECT_TRUE(cert.passed()) << delta0;
  }
}

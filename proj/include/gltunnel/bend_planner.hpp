#pragma once

// Piecewise circular construction of the neck profile: a unit-curvature
// start arc, the inductive bend up to theta_bar, one closing arc to pi/2 and
// a horizontal tail.

#include <cstddef>
#include <string>
#include <vector>

#include "gltunnel/curve.hpp"
#include "gltunnel/model.hpp"

namespace gltunnel {

struct S0Choice {
  double s0 = 0.0;
  double theta0 = 0.0;
  CurveState state;  ///< curve point at s0
  bool capped = false;  ///< s0 == delta0 / 2
};

/// Largest s0 <= delta0/2 such that the scalar-curvature lower bound along
/// the k = 1 arc from (t, r, theta) = (0, delta0, 0) stays >= margin on
/// [0, s0]. The bound is scanned on `grid` intervals of [0, delta0/2]; the
/// first failure is bracketed and bisected to relative tolerance 1e-10.
S0Choice choose_s0(const AmbientModel& model, double margin, std::size_t grid = 10000);

struct BendSegment {
  ArcSegment arc;
  CurveState end;  ///< breakpoint (s_i, t_i, r_i, theta_i)
  bool truncated = false;
};

struct InductiveBend {
  CurveState start;
  std::vector<BendSegment> segments;
};

/// Circular arcs with k_i = sin(theta_{i-1})/(8 r_{i-1}) and length
/// r_{i-1}/2 until theta reaches theta_bar; the last arc is shortened so that
/// it ends exactly at theta_bar.
InductiveBend inductive_bend(const CurveState& start, double theta_bar);

struct FinalArc {
  double k = 0.0;
  double delta_s = 0.0;
  double r_inf = 0.0;
};

/// Closing arc from theta_bar to pi/2 with k r_m placed at `window_position`
/// inside (1 - sin theta_bar, sin theta_bar / 4).
FinalArc final_arc(const CurveState& at_theta_bar, double theta_bar, double window_position = 0.5);

/// Contraction constant 1 - cos(theta_bar)/2 of consecutive radii.
double contraction_constant(double theta_bar);

struct PlanOptions {
  double theta_bar = 1.2;
  double margin = 0.0;
  double window_position = 0.5;
  std::size_t s0_grid = 10000;
};

class BendPlan {
 public:
  AmbientModel model;
  double theta_bar = 0.0;
  double window_position = 0.5;
  S0Choice start_arc;
  InductiveBend bend;
  FinalArc closing;
  double tail_length = 0.0;
  double r_inf = 0.0;
  double total_length = 0.0;

  double s0() const { return start_arc.s0; }
  double theta0() const { return start_arc.theta0; }
  std::size_t m() const { return bend.segments.size(); }

  /// Segments in order: start arc (0), inductive arcs (1..m), closing arc
  /// (m+1), horizontal tail (m+2).
  std::vector<ArcSegment> segments() const;
  std::size_t closing_index() const { return m() + 1; }
  std::size_t tail_index() const { return m() + 2; }
  /// Boundary states of segments(), including the initial and final point.
  const std::vector<CurveState>& knots() const { return knots_; }
  CurveState initial_state() const { return knots_.front(); }
  /// s at the end of the closing arc.
  double s_full_bend() const { return knots_.at(closing_index() + 1).s; }

  CurvatureProfile profile() const;
  ArcChain chain() const;
  CurveSamples samples(double step, const IntegrationOptions& options = {}) const;

 private:
  friend BendPlan build_plan(const AmbientModel&, const PlanOptions&);
  std::vector<CurveState> knots_;
};

/// Full construction; the model is validated first.
BendPlan build_plan(const AmbientModel& model, const PlanOptions& options = {});

struct CheckItem {
  std::string name;
  bool passed = false;
  double slack = 0.0;  ///< bound minus observed (positive = room left)
};

struct PlanCertificate {
  double contraction = 0.0;
  std::vector<CheckItem> items;
  bool passed() const;
  const CheckItem& item(const std::string& name) const;
};

/// Lemma-level inequalities of a plan. Comparisons allow 1e-12 of rounding.
PlanCertificate check_plan(const BendPlan& plan, double theta_bar);

}  // namespace gltunnel

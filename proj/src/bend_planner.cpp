#include "gltunnel/bend_planner.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "gltunnel/curvature.hpp"
#include "gltunnel/error.hpp"

namespace gltunnel {

namespace {

constexpr double kRoundingTol = 1e-12;

void check_theta_bar(double theta_bar) {
  if (!(std::sin(theta_bar) > 0.8)) {
    throw TunnelError(ErrorCode::ThetaBarTooSmall,
                      fmt::format("sin(theta_bar) = {} must exceed 4/5 for the closing-arc window "
                                  "(1 - sin theta_bar, sin theta_bar / 4) to be nonempty",
                                  std::sin(theta_bar)));
  }
  if (!(theta_bar < kHalfPi)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("theta_bar = {} must be < pi/2", theta_bar));
  }
}

}  // namespace

S0Choice choose_s0(const AmbientModel& model, double margin, std::size_t grid) {
  model.validate();
  if (!(margin >= 0.0)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("margin = {} must be >= 0", margin));
  }
  if (grid < 1) throw TunnelError(ErrorCode::InvalidArgument, "s0 grid must be >= 1");

  const CurveState origin{0.0, 0.0, model.delta0, 0.0};
  auto state_at = [&](double s) { return extend_by_arc(origin, {1.0, s}); };
  auto bound = [&](double s) { return kappa_lower_bound(state_at(s), 1.0, model).total; };

  if (bound(0.0) < margin) {
    throw TunnelError(ErrorCode::NoPositiveStart,
                      fmt::format("scalar curvature bound {} < margin {} already at s = 0",
                                  bound(0.0), margin));
  }

  const double cap = 0.5 * model.delta0;
  S0Choice out;
  out.s0 = cap;
  out.capped = true;
  for (std::size_t j = 1; j <= grid; ++j) {
    const double s = cap * static_cast<double>(j) / static_cast<double>(grid);
    if (bound(s) >= margin) continue;
    double lo = cap * static_cast<double>(j - 1) / static_cast<double>(grid);
    double hi = s;
    while (hi - lo > 1e-10 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (bound(mid) >= margin) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.s0 = lo;
    out.capped = false;
    break;
  }
  if (!(out.s0 > 0.0)) {
    throw TunnelError(ErrorCode::NoPositiveStart, "no positive initial arc length satisfies the bound");
  }
  out.state = state_at(out.s0);
  out.theta0 = out.state.theta;
  return out;
}

InductiveBend inductive_bend(const CurveState& start, double theta_bar) {
  if (!(start.theta > 0.0 && start.theta < theta_bar && theta_bar < kHalfPi)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("need 0 < theta0 = {} < theta_bar = {} < pi/2", start.theta,
                                  theta_bar));
  }
  if (!(start.r > 0.0)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("start radius {} <= 0", start.r));
  }
  const auto limit = static_cast<std::size_t>(
      std::ceil((theta_bar - start.theta) * 16.0 / std::sin(start.theta)));

  InductiveBend out;
  out.start = start;
  CurveState state = start;
  while (true) {
    const double k = std::sin(state.theta) / (8.0 * state.r);
    double ds = 0.5 * state.r;
    BendSegment seg;
    const bool last = state.theta + k * ds >= theta_bar;
    if (last) {
      ds = std::min(ds, (theta_bar - state.theta) / k);
      seg.truncated = ds < 0.5 * state.r;
    }
    seg.arc = {k, ds};
    try {
      seg.end = extend_by_arc(state, seg.arc);
    } catch (const TunnelError& e) {
      throw TunnelError(ErrorCode::AxisCrossed, e.what());
    }
    if (last) seg.end.theta = theta_bar;
    out.segments.push_back(seg);
    state = seg.end;
    if (last) break;
    if (out.segments.size() > limit + 1) {
      throw TunnelError(ErrorCode::InvalidArgument,
                        fmt::format("inductive bend exceeded {} steps", limit + 1));
    }
  }
  return out;
}

double contraction_constant(double theta_bar) { return 1.0 - 0.5 * std::cos(theta_bar); }

FinalArc final_arc(const CurveState& at_theta_bar, double theta_bar, double window_position) {
  check_theta_bar(theta_bar);
  if (!(window_position > 0.0 && window_position < 1.0)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("window_position = {} must lie in (0, 1)", window_position));
  }
  const double r_m = at_theta_bar.r;
  if (!(r_m > 0.0)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("r_m = {} <= 0", r_m));
  }
  const double sin_bar = std::sin(theta_bar);
  const double lower = 1.0 - sin_bar;
  const double upper = 0.25 * sin_bar;
  const double kr = (1.0 - window_position) * lower + window_position * upper;

  FinalArc out;
  out.k = kr / r_m;
  out.delta_s = (kHalfPi - theta_bar) / out.k;
  out.r_inf = r_m - lower / out.k;
  if (!(out.r_inf > 0.0)) {
    throw TunnelError(ErrorCode::NonpositiveRadius, fmt::format("r_inf = {}", out.r_inf));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ArcSegment> BendPlan::segments() const {
  std::vector<ArcSegment> out;
  out.reserve(m() + 3);
  out.push_back({1.0, start_arc.s0});
  for (const auto& seg : bend.segments) out.push_back(seg.arc);
  out.push_back({closing.k, closing.delta_s});
  out.push_back({0.0, tail_length});
  return out;
}

CurvatureProfile BendPlan::profile() const {
  const auto segs = segments();
  return CurvatureProfile::piecewise(segs, tail_index());
}

ArcChain BendPlan::chain() const { return ArcChain(profile(), knots_); }

CurveSamples BendPlan::samples(double step, const IntegrationOptions& options) const {
  const auto prof = profile();
  return integrate_chain(prof, ArcChain(prof, knots_), step, options);
}

BendPlan build_plan(const AmbientModel& model, const PlanOptions& options) {
  model.validate();
  check_theta_bar(options.theta_bar);

  BendPlan plan;
  plan.model = model;
  plan.theta_bar = options.theta_bar;
  plan.window_position = options.window_position;
  plan.start_arc = choose_s0(model, options.margin, options.s0_grid);
  if (!(plan.start_arc.theta0 < options.theta_bar)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("theta0 = {} already reaches theta_bar = {}",
                                  plan.start_arc.theta0, options.theta_bar));
  }
  plan.bend = inductive_bend(plan.start_arc.state, options.theta_bar);
  const CurveState& at_bar = plan.bend.segments.back().end;
  plan.closing = final_arc(at_bar, options.theta_bar, options.window_position);
  plan.tail_length = 2.0 * model.delta0;
  plan.r_inf = plan.closing.r_inf;

  auto& knots = plan.knots_;
  knots.push_back({0.0, 0.0, model.delta0, 0.0});
  knots.push_back(plan.start_arc.state);
  for (const auto& seg : plan.bend.segments) knots.push_back(seg.end);
  const CurveState full{at_bar.s + plan.closing.delta_s,
                        at_bar.t + std::cos(options.theta_bar) / plan.closing.k, plan.r_inf,
                        kHalfPi};
  knots.push_back(full);
  knots.push_back({full.s + plan.tail_length, full.t + plan.tail_length, plan.r_inf, kHalfPi});
  plan.total_length = knots.back().s;
  return plan;
}

// ---------------------------------------------------------------------------

bool PlanCertificate::passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

const CheckItem& PlanCertificate::item(const std::string& name) const {
  for (const auto& c : items) {
    if (c.name == name) return c;
  }
  throw TunnelError(ErrorCode::OutOfRange, fmt::format("no check named {}", name));
}

PlanCertificate check_plan(const BendPlan& plan, double theta_bar) {
  PlanCertificate cert;
  const double C = contraction_constant(theta_bar);
  cert.contraction = C;
  const auto& segs = plan.bend.segments;
  const std::size_t m = segs.size();
  const double r0 = plan.bend.start.r;
  const double theta0 = plan.bend.start.theta;
  const double min_step = std::sin(theta0) / 16.0;
  constexpr double inf = std::numeric_limits<double>::infinity();

  // (a) consecutive radii contract by C. A truncated last step is shorter
  // than r_{m-1}/2 and contracts less, so it is reported on its own as well.
  double max_ratio = 0.0;
  double max_full_ratio = 0.0;
  double r_prev = r0;
  for (const auto& s : segs) {
    max_ratio = std::max(max_ratio, s.end.r / r_prev);
    if (!s.truncated) max_full_ratio = std::max(max_full_ratio, s.end.r / r_prev);
    r_prev = s.end.r;
  }
  cert.items.push_back({"radius_ratio", max_ratio <= C + kRoundingTol, C - max_ratio});
  cert.items.push_back(
      {"radius_ratio_full_steps", max_full_ratio <= C + kRoundingTol, C - max_full_ratio});

  // (b) consecutive lengths contract by C.
  double max_len_ratio = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    max_len_ratio = std::max(max_len_ratio, segs[i].arc.delta_s / segs[i - 1].arc.delta_s);
  }
  cert.items.push_back({"length_ratio", max_len_ratio <= C + kRoundingTol, C - max_len_ratio});

  // (c) geometric-series bound on s_m - s0.
  double bend_length = 0.0;
  for (const auto& s : segs) bend_length += s.arc.delta_s;
  const double length_bound = 0.5 * r0 / (1.0 - C);
  cert.items.push_back(
      {"length_bound", bend_length <= length_bound + kRoundingTol, length_bound - bend_length});

  // (d) every full step turns by at least sin(theta0)/16.
  double min_increment = inf;
  double theta_prev = theta0;
  for (const auto& s : segs) {
    if (!s.truncated) min_increment = std::min(min_increment, s.end.theta - theta_prev);
    theta_prev = s.end.theta;
  }
  const double inc_slack = std::isinf(min_increment) ? inf : min_increment - min_step;
  cert.items.push_back({"angle_increment", inc_slack >= -kRoundingTol, inc_slack});

  // Angle growth theta_i >= theta0 + i sin(theta0)/16 for i <= m - 1.
  double growth_slack = inf;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double expected = theta0 + static_cast<double>(i + 1) * min_step;
    growth_slack = std::min(growth_slack, segs[i].end.theta - expected);
  }
  cert.items.push_back({"angle_growth", growth_slack >= -kRoundingTol, growth_slack});

  // Termination count.
  const double max_steps = std::ceil((theta_bar - theta0) * 16.0 / std::sin(theta0));
  cert.items.push_back({"termination", static_cast<double>(m) <= max_steps,
                        max_steps - static_cast<double>(m)});

  // (e) closing-arc length.
  const double r_m = segs.back().end.r;
  const double sin_bar = std::sin(theta_bar);
  const double closing_bound = r_m * (kHalfPi - theta_bar) / (1.0 - sin_bar);
  cert.items.push_back({"closing_length", plan.closing.delta_s <= closing_bound,
                        closing_bound - plan.closing.delta_s});

  // Closing window 1 - sin < k r_m < sin/4.
  const double kr = plan.closing.k * r_m;
  const double window_slack = std::min(kr - (1.0 - sin_bar), 0.25 * sin_bar - kr);
  cert.items.push_back({"closing_window", window_slack > 0.0, window_slack});

  // (f) k_i strictly increasing.
  double min_rel_increase = inf;
  for (std::size_t i = 1; i < m; ++i) {
    min_rel_increase = std::min(min_rel_increase, segs[i].arc.k / segs[i - 1].arc.k - 1.0);
  }
  cert.items.push_back({"curvature_increasing", min_rel_increase > 0.0, min_rel_increase});

  // Lemma 3 condition at each breakpoint from s0 on, with both one-sided k.
  const auto all = plan.segments();
  const auto& knots = plan.knots();
  double min_rel_margin = inf;
  for (std::size_t j = 1; j + 1 < knots.size(); ++j) {
    const auto& p = knots[j];
    const double sin_t = std::sin(p.theta);
    const double right = 1.0 - 4.0 * p.r * all[j].k / sin_t;
    min_rel_margin = std::min(min_rel_margin, right);
    if (j > 1) min_rel_margin = std::min(min_rel_margin, 1.0 - 4.0 * p.r * all[j - 1].k / sin_t);
  }
  cert.items.push_back({"breakpoint_margin", min_rel_margin > 0.0, min_rel_margin});

  // Full bend and positive end radius.
  const double bend_error = std::abs(knots[plan.closing_index() + 1].theta - kHalfPi);
  cert.items.push_back({"full_bend", bend_error <= kRoundingTol, kRoundingTol - bend_error});
  cert.items.push_back({"r_inf_positive", plan.r_inf > 0.0, plan.r_inf});
  return cert;
}

}  // namespace gltunnel

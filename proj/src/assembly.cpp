#include "gltunnel/assembly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <future>
#include <limits>
#include <numbers>

#include "gltunnel/error.hpp"

namespace gltunnel {

double min_kappa_exact(const CurveSamples& samples, std::size_t from_segment, int n) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& p : samples.points) {
    if (p.segment >= from_segment) out = std::min(out, kappa_exact_flat(p.state, p.k, n));
  }
  return out;
}

NeckProfile build_neck(const AmbientModel& model, const NeckOptions& options) {
  NeckProfile neck;
  neck.model = model;
  neck.options = options;
  neck.plan = build_plan(model, options.plan);
  neck.eta = resolve_eta(neck.plan, options.smoothing);
  neck.smoothed = smooth_profile(neck.plan, options.smoothing);
  neck.step = options.audit_step.value_or(neck.plan.total_length /
                                          static_cast<double>(options.audit_points));
  neck.samples = integrate_profile(neck.smoothed, neck.plan.initial_state(), neck.step);

  auto& cert = neck.certification;
  auto require = [&cert](bool ok, const std::string& name) {
    if (!ok) cert.failures.push_back(name);
  };

  cert.plan = check_plan(neck.plan, options.plan.theta_bar);
  for (const auto& item : cert.plan.items) {
    // The all-steps radius ratio fails whenever the last step is truncated;
    // nothing downstream depends on it (the full-step ratio, the length
    // ratio and the length bound are checked separately).
    if (item.name == "radius_ratio") {
      if (!item.passed) cert.advisories.push_back("plan." + item.name);
      continue;
    }
    require(item.passed, "plan." + item.name);
  }

  const double audit_step = neck.step / 10.0;
  const IntegrationOptions dense{100};
  cert.smoothed = verify_smoothed(neck.plan, neck.smoothed, audit_step, dense);
  require(std::abs(cert.smoothed.integral_k - kHalfPi) <= 1e-9, "smoothed.total_turn");
  require(std::abs(cert.smoothed.theta_closure - kHalfPi) <= 1e-9, "smoothed.theta_closure");
  require(cert.smoothed.theta_bound_ok, "smoothed.theta_deviation_bound");
  require(cert.smoothed.tail_ok, "smoothed.flat_tail");

  // Nominal and dense grids; the dense one is what gets reported.
  // s >= s0 is everything after the start arc.
  constexpr std::size_t s0 = 1;
  const auto plan_nominal = neck.plan.samples(neck.step);
  const auto plan_dense = neck.plan.samples(audit_step, dense);
  const auto smooth_dense = integrate_profile(neck.smoothed, neck.plan.initial_state(), audit_step, dense);

  const auto pw_nominal = condition_margin(plan_nominal, s0);
  const auto sm_nominal = condition_margin(neck.samples, s0);
  cert.margin_piecewise = condition_margin(plan_dense, s0);
  cert.margin_smoothed = condition_margin(smooth_dense, s0);
  require(pw_nominal.min_margin > 0.0 && cert.margin_piecewise.min_margin > 0.0,
          "margin.piecewise");
  require(sm_nominal.min_margin > 0.0 && cert.margin_smoothed.min_margin > 0.0, "margin.smoothed");

  cert.min_kappa_exact = std::min(min_kappa_exact(neck.samples, s0, model.n),
                                  min_kappa_exact(smooth_dense, s0, model.n));
  require(cert.min_kappa_exact > 0.0, "kappa.exact_flat");

  cert.min_bound_total = std::numeric_limits<double>::infinity();
  for (const CurveSamples* curve : std::initializer_list<const CurveSamples*>{&neck.samples, &smooth_dense}) {
    for (const auto& p : curve->points) {
      cert.min_bound_total =
          std::min(cert.min_bound_total, kappa_lower_bound(p.state, p.k, model).total);
    }
  }
  require(cert.min_bound_total > 0.0, "kappa.lower_bound");

  // Round end: blend from the neck cross-section to the round tube over the
  // first delta0 of the final flat stretch.
  neck.r_inf = neck.samples.back().state.r;
  const std::size_t tail = neck.plan.tail_index();
  double a = neck.samples.back().state.t;
  for (const auto& p : neck.samples.points) {
    if (p.segment == tail && p.offset >= model.delta0) {
      a = p.state.t - (p.offset - model.delta0);
      break;
    }
  }
  cert.blend_spec.a = a;
  cert.blend_spec.b = a + model.delta0;
  cert.blend_spec.epsilon = neck.r_inf;
  cert.blend_spec.c_metric = model.c_metric;
  cert.blend_spec.q = model.c_metric * neck.r_inf * neck.r_inf;
  try {
    cert.blend = end_blend(cert.blend_spec, model.n);
  } catch (const TunnelError& e) {
    cert.blend_error = e.what();
  }
  require(cert.blend.has_value(), "end_blend");
  return neck;
}

// ---------------------------------------------------------------------------

Tunnel assemble(const NeckProfile& neck1, const NeckProfile& neck2, double l) {
  if (!(l >= 0.0) || !std::isfinite(l)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("cylinder length {} must be >= 0", l));
  }
  if (neck1.model.n != neck2.model.n) {
    throw TunnelError(ErrorCode::InvalidArgument, "necks have different dimensions");
  }
  const double scale = std::max(std::abs(neck1.r_inf), std::abs(neck2.r_inf));
  if (std::abs(neck1.r_inf - neck2.r_inf) > 1e-12 * scale) {
    throw TunnelError(ErrorCode::RadiusMismatch,
                      fmt::format("r_inf {} vs {}", neck1.r_inf, neck2.r_inf));
  }
  Tunnel tunnel{neck1, neck2, l, neck1.model.n, std::max(neck1.model.delta, neck2.model.delta),
                std::max(neck1.model.delta0, neck2.model.delta0)};
  return tunnel;
}

Tunnel telescope(const NeckProfile& neck1, const NeckProfile& neck2, double L) {
  const double d0 = neck1.length() + neck2.length();
  if (!(L >= d0)) {
    throw TunnelError(ErrorCode::LTooSmall,
                      fmt::format("L = {} is below the collar distance {} of the bare tunnel", L, d0));
  }
  return assemble(neck1, neck2, L - d0);
}

std::vector<std::pair<double, double>> tunnel_profile(const Tunnel& tunnel) {
  std::vector<std::pair<double, double>> out;
  const double s1 = tunnel.neck1.length();
  const double s2 = tunnel.neck2.length();
  for (const auto& p : tunnel.neck1.samples.points) out.emplace_back(p.state.s, p.state.r);
  const auto& pts = tunnel.neck2.samples.points;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    out.emplace_back(s1 + tunnel.cylinder_length + (s2 - it->state.s), it->state.r);
  }
  return out;
}

double unit_sphere_area(int n) {
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double neck_volume(const CurveSamples& samples, int n) {
  double integral = 0.0;
  const auto& pts = samples.points;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].piece != pts[i - 1].piece) continue;
    const double ds = pts[i].offset - pts[i - 1].offset;
    const double f0 = std::pow(pts[i - 1].state.r, n - 1);
    const double f1 = std::pow(pts[i].state.r, n - 1);
    integral += 0.5 * (f0 + f1) * ds;
  }
  return unit_sphere_area(n) * integral;
}

SizeReport measure(const Tunnel& tunnel) {
  const int n = tunnel.n;
  const double sigma = unit_sphere_area(n);
  SizeReport out;
  out.neck_length = tunnel.neck1.length();
  out.neck_length_2 = tunnel.neck2.length();
  out.cylinder_length = tunnel.cylinder_length;
  out.dist_collars = out.neck_length + out.cylinder_length + out.neck_length_2;
  out.r_inf = tunnel.neck1.r_inf;

  for (const auto* neck : {&tunnel.neck1, &tunnel.neck2}) {
    for (const auto& p : neck->samples.points) out.max_radius = std::max(out.max_radius, p.state.r);
  }
  out.diam_upper = out.dist_collars + std::numbers::pi * out.max_radius;
  out.tube_radius_needed = std::numbers::pi * out.max_radius;

  out.vol_Uprime = neck_volume(tunnel.neck1.samples, n) + neck_volume(tunnel.neck2.samples, n) +
                   sigma * std::pow(out.r_inf, n - 1) * tunnel.cylinder_length;
  out.vol_Uprime_bound = sigma * std::pow(tunnel.delta0, n - 1) * out.dist_collars;

  const double collar = sigma * (std::pow(tunnel.delta, n) - std::pow(tunnel.delta0, n)) / n;
  const double c_metric = std::max(tunnel.neck1.model.c_metric, tunnel.neck2.model.c_metric);
  const double spread = c_metric * tunnel.delta * tunnel.delta;
  out.vol_U = out.vol_Uprime + 2.0 * collar;
  out.vol_U_low = out.vol_Uprime + 2.0 * collar * (1.0 - spread);
  out.vol_U_high = out.vol_Uprime + 2.0 * collar * (1.0 + spread);

  const auto& c1 = tunnel.neck1.certification;
  const auto& c2 = tunnel.neck2.certification;
  out.min_kappa_exact = std::min(c1.min_kappa_exact, c2.min_kappa_exact);
  out.min_bound_total = std::min(c1.min_bound_total, c2.min_bound_total);
  out.min_condition_margin =
      std::min(c1.margin_smoothed.min_margin, c2.margin_smoothed.min_margin);
  out.blend_passed = c1.blend.has_value() && c2.blend.has_value();
  out.certified = c1.certified() && c2.certified() && out.min_condition_margin > 0.0 &&
                  out.min_kappa_exact > 0.0 && out.blend_passed;
  return out;
}

NeighborhoodResult neighborhood_check(const Tunnel& tunnel) {
  double max_r = 0.0;
  for (const auto* neck : {&tunnel.neck1, &tunnel.neck2}) {
    for (const auto& p : neck->samples.points) max_r = std::max(max_r, p.state.r);
  }
  NeighborhoodResult out;
  out.slack = 2.0 * std::numbers::pi * tunnel.delta - std::numbers::pi * max_r;
  out.passed = out.slack >= 0.0;
  return out;
}

// ---------------------------------------------------------------------------

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw TunnelError(ErrorCode::InvalidArgument, "x and y differ in length");
  }
  if (x.size() < 2) {
    throw TunnelError(ErrorCode::InsufficientGrid,
                      fmt::format("a log-log fit needs >= 2 points, got {}", x.size()));
  }
  const auto rows = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(rows, 2);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    const double yi = y[static_cast<std::size_t>(i)];
    if (!(xi > 0.0) || !(yi > 0.0)) {
      throw TunnelError(ErrorCode::InvalidArgument,
                        fmt::format("log-log fit needs positive data, got ({}, {})", xi, yi));
    }
    design(i, 0) = 1.0;
    design(i, 1) = std::log(xi);
    rhs(i) = std::log(yi);
  }
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < 2) {
    throw TunnelError(ErrorCode::InsufficientGrid, "log-log fit needs two distinct abscissae");
  }
  const Eigen::Vector2d coef = qr.solve(rhs);
  const Eigen::VectorXd residual = rhs - design * coef;

  LogLogFit fit;
  fit.intercept = coef(0);
  fit.slope = coef(1);
  fit.rms_residual = std::sqrt(residual.squaredNorm() / static_cast<double>(rows));
  fit.max_residual = residual.cwiseAbs().maxCoeff();
  fit.points = x.size();
  return fit;
}

bool SweepResult::all_certified() const {
  return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.certified; });
}

SweepResult scaling_sweep(const AmbientModel& base, std::span<const double> delta0_grid,
                          const NeckOptions& options, bool parallel) {
  if (delta0_grid.size() < 2) {
    throw TunnelError(ErrorCode::InsufficientGrid,
                      fmt::format("sweep needs >= 2 delta0 values, got {}", delta0_grid.size()));
  }
  base.validate();
  auto run = [&base, &options](double delta0) {
    AmbientModel model = base;
    model.delta0 = delta0;
    model.delta = base.delta * delta0 / base.delta0;
    const NeckProfile neck = build_neck(model, options);
    const SizeReport size = measure(assemble(neck, neck, 0.0));
    SweepPoint point;
    point.delta0 = delta0;
    point.neck_length = size.neck_length;
    point.diam_upper = size.diam_upper;
    point.vol_Uprime = size.vol_Uprime;
    point.r_inf = neck.r_inf;
    point.m = neck.plan.m();
    point.certified = size.certified;
    point.failures = neck.certification.failures;
    return point;
  };

  SweepResult out;
  if (parallel) {
    std::vector<std::future<SweepPoint>> jobs;
    for (double d : delta0_grid) jobs.push_back(std::async(std::launch::async, run, d));
    for (auto& job : jobs) out.points.push_back(job.get());
  } else {
    for (double d : delta0_grid) out.points.push_back(run(d));
  }

  std::vector<double> x, len, diam, vol;
  for (const auto& p : out.points) {
    x.push_back(p.delta0);
    len.push_back(p.neck_length);
    diam.push_back(p.diam_upper);
    vol.push_back(p.vol_Uprime);
  }
  out.length = fit_loglog(x, len);
  out.diameter = fit_loglog(x, diam);
  out.volume = fit_loglog(x, vol);
  return out;
}

}  // namespace gltunnel

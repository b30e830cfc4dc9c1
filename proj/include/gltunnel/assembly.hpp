#pragma once

// Necks, tunnels and their size estimates.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gltunnel/bend_planner.hpp"
#include "gltunnel/curvature.hpp"
#include "gltunnel/smoother.hpp"

namespace gltunnel {

struct NeckOptions {
  PlanOptions plan;
  SmoothingParams smoothing;
  /// Nominal sample spacing; defaults to S / audit_points. Every certified
  /// inequality is also checked on a grid ten times denser.
  std::optional<double> audit_step;
  std::size_t audit_points = 10000;
};

struct NeckCertification {
  PlanCertificate plan;
  SmoothedCertificate smoothed;
  MarginReport margin_piecewise;  ///< dense audit, s >= s0
  MarginReport margin_smoothed;   ///< dense audit, s >= s0
  double min_kappa_exact = 0.0;   ///< flat exact scalar curvature, s >= s0
  double min_bound_total = 0.0;   ///< lower-bound estimator over the whole neck
  EndBlendSpec blend_spec;
  std::optional<BlendResult> blend;
  std::string blend_error;
  /// Names of failed checks, in evaluation order.
  std::vector<std::string> failures;
  /// Failed checks that do not block certification.
  std::vector<std::string> advisories;

  bool certified() const { return failures.empty(); }
};

struct NeckProfile {
  AmbientModel model;
  NeckOptions options;
  BendPlan plan;
  CurvatureProfile smoothed;
  CurveSamples samples;  ///< smoothed curve on the nominal grid
  double step = 0.0;
  double eta = 0.0;
  double r_inf = 0.0;  ///< radius of the round end of the smoothed curve
  NeckCertification certification;

  double length() const { return plan.total_length; }
};

/// Builds, smooths and certifies one neck. Construction errors throw;
/// certification failures are recorded in `certification.failures`.
NeckProfile build_neck(const AmbientModel& model, const NeckOptions& options = {});

/// Minimum of kappa_exact_flat over the samples in segments >= from_segment.
double min_kappa_exact(const CurveSamples& samples, std::size_t from_segment, int n);

struct Tunnel {
  NeckProfile neck1;
  NeckProfile neck2;
  double cylinder_length = 0.0;
  int n = 3;
  double delta = 0.0;
  double delta0 = 0.0;
};

/// Neck, round cylinder of length l, mirrored neck. Throws RadiusMismatch.
Tunnel assemble(const NeckProfile& neck1, const NeckProfile& neck2, double l);

/// Chooses the cylinder length so that the collar distance is exactly L.
/// Throws LTooSmall when L is below the l = 0 distance.
Tunnel telescope(const NeckProfile& neck1, const NeckProfile& neck2, double L);

/// (axial arc length from the first collar, radius) along the whole tunnel.
std::vector<std::pair<double, double>> tunnel_profile(const Tunnel& tunnel);

/// Area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
double unit_sphere_area(int n);

/// sigma_{n-1} * integral of r^{n-1} ds over a sampled neck.
double neck_volume(const CurveSamples& samples, int n);

struct SizeReport {
  double neck_length = 0.0;  ///< S of the first neck
  double neck_length_2 = 0.0;
  double cylinder_length = 0.0;
  double dist_collars = 0.0;
  double max_radius = 0.0;
  double diam_upper = 0.0;
  double vol_Uprime = 0.0;
  double vol_Uprime_bound = 0.0;  ///< sigma delta0^{n-1} (total axial length)
  double vol_U = 0.0;
  double vol_U_low = 0.0;   ///< collar bracket for non-flat models
  double vol_U_high = 0.0;
  double tube_radius_needed = 0.0;
  double r_inf = 0.0;
  double min_kappa_exact = 0.0;
  double min_bound_total = 0.0;
  double min_condition_margin = 0.0;
  bool blend_passed = false;
  bool certified = false;
};

SizeReport measure(const Tunnel& tunnel);

struct NeighborhoodResult {
  bool passed = false;
  double slack = 0.0;  ///< 2 pi delta - pi max r
};

NeighborhoodResult neighborhood_check(const Tunnel& tunnel);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log x, log y). Throws InsufficientGrid.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SweepPoint {
  double delta0 = 0.0;
  double neck_length = 0.0;
  double diam_upper = 0.0;
  double vol_Uprime = 0.0;
  double r_inf = 0.0;
  std::size_t m = 0;
  bool certified = false;
  std::vector<std::string> failures;
};

struct SweepResult {
  std::vector<SweepPoint> points;  ///< in grid order
  LogLogFit length;
  LogLogFit diameter;
  LogLogFit volume;
  bool all_certified() const;
};

/// One neck per delta0 (delta scaled along), tunnel with l = 0, log-log fits
/// of S, diam_upper and vol_Uprime against delta0. Points run concurrently
/// when `parallel` is set; results are reported in grid order.
SweepResult scaling_sweep(const AmbientModel& base, std::span<const double> delta0_grid,
                          const NeckOptions& options = {}, bool parallel = true);

}  // namespace gltunnel

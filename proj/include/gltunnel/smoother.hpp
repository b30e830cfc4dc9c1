#pragma once

#include <optional>

#include "gltunnel/bend_planner.hpp"
#include "gltunnel/curvature.hpp"
#include "gltunnel/curve.hpp"

namespace gltunnel {

/// Every jump of the piecewise curvature is bridged by a quintic ramp of
/// width eta placed inside the neighbour with the larger curvature, so the
/// smoothed curvature never exceeds the plan.
struct SmoothingParams {
  /// Defaults to (shortest segment up to the closing arc) / 8.
  std::optional<double> eta;
  /// The tail drop to zero must finish within drop_fraction * delta0.
  double drop_fraction = 0.5;

  void validate() const;
};

/// The transition width used for `plan`. Throws EtaTooLarge unless
/// 0 < eta < (shortest segment) / 2.
double resolve_eta(const BendPlan& plan, const SmoothingParams& params);

/// C^2 curvature profile below the plan's piecewise curvature on
/// [0, s_{m+1}], continuing at k_{m+1} into the tail for a plateau whose
/// length is solved so that the total turn is exactly pi/2, then dropping to
/// zero. Throws EtaTooLarge or NormalizationFailed.
CurvatureProfile smooth_profile(const BendPlan& plan, const SmoothingParams& params = {});

struct SmoothedCertificate {
  double integral_k = 0.0;      ///< exact integral of k_eta over [0, S]
  double theta_closure = 0.0;   ///< integrated theta at S
  double l1_deviation = 0.0;    ///< integral of |k_eta - k|
  double sup_theta_dev = 0.0;
  double sup_r_dev = 0.0;
  double sup_t_dev = 0.0;
  bool theta_bound_ok = false;  ///< sup |theta_eta - theta| <= l1_deviation

  MarginReport margin_piecewise;
  MarginReport margin_smoothed;
  double margin_lipschitz = 0.0;
  double margin_floor = 0.0;  ///< min piecewise margin - lipschitz * l1_deviation
  bool margin_ok = false;

  double tail_r_variation = 0.0;  ///< max |r - r_inf| on the last delta0 of the tail
  double r_inf = 0.0;
  bool tail_ok = false;

  bool passed() const;
};

/// Integrates both curves on the same segment-local grid and checks the
/// smoothing contract.
SmoothedCertificate verify_smoothed(const BendPlan& plan, const CurvatureProfile& smoothed, double step,
                                    const IntegrationOptions& options = {});

}  // namespace gltunnel

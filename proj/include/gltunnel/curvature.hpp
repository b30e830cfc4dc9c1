#pragma once

// Scalar-curvature certificates for the neck hypersurface of revolution.

#include <concepts>
#include <cstddef>

#include "gltunnel/curve.hpp"
#include "gltunnel/model.hpp"

namespace gltunnel {

struct KappaBreakdown {
  double total = 0.0;
  double term_ambient = 0.0;  ///< kappa_D_min - 2 ric_sup sin^2
  double term_sphere = 0.0;   ///< (n-1)(n-2)(1/r^2 - c1) sin^2
  double term_bend = 0.0;     ///< -(n-1)(1/r + c2 r) k sin
  double condition_margin = 0.0;  ///< sin(theta)/(4r) - k
};

/// Lower bound for the scalar curvature at a point of the neck, valid when the
/// model constants bound the true error terms.
KappaBreakdown kappa_lower_bound(const CurveState& state, double k, const AmbientModel& model);

/// sin(theta)/(4r) - k.
double lemma_margin(const CurveState& state, double k);

struct MarginReport {
  double min_margin = 0.0;
  /// min of 1 - 4 r k / sin(theta), scale free.
  double min_relative = 0.0;
  double argmin_s = 0.0;
  std::size_t argmin_index = 0;
  std::size_t argmin_segment = 0;
  std::size_t count = 0;
};

/// Minimum of sin(theta)/(4r) - k over the samples in segments >= from_segment.
/// Region membership goes by segment, not by the s label, which cannot
/// resolve sub-ulp pieces.
MarginReport condition_margin(const CurveSamples& samples, std::size_t from_segment);

/// Exact scalar curvature of the hypersurface of revolution of the profile in
/// flat R^n x R: (n-1)(n-2) sin^2/r^2 - 2(n-1) k sin/r.
double kappa_exact_flat(const CurveState& state, double k, int n);

/// Scalar curvature of rho(t)^2 g_{S^{n-1}} + dt^2.
double kappa_warped(double rho, double drho, double d2rho, int n);

template <typename F>
concept RadiusFunction = requires(const F& f, double t) {
  { f.value(t) } -> std::convertible_to<double>;
  { f.d1(t) } -> std::convertible_to<double>;
  { f.d2(t) } -> std::convertible_to<double>;
};

template <RadiusFunction F>
double kappa_warped(const F& rho, double t, int n) {
  return kappa_warped(rho.value(t), rho.d1(t), rho.d2(t), n);
}

/// Rotationally symmetric end blend from the neck cross-section of relative
/// radius deviation q to the round tube of radius epsilon.
struct EndBlendSpec {
  double a = 0.0;        ///< blend start (t coordinate)
  double b = 0.0;        ///< blend end; b - a is the cutoff length delta0
  double epsilon = 0.0;  ///< round radius r_inf
  double q = 0.0;        ///< relative radius deviation at t = a
  double c_metric = 0.0; ///< |q| <= c_metric epsilon^2 is required
};

/// Cutoff psi(u): quintic smoothstep on [0, 3/4], 1 afterwards.
double blend_psi(double u);
double blend_psi_d1(double u);
double blend_psi_d2(double u);
inline constexpr double kBlendPsiEnd = 0.75;

/// rho(t) = epsilon (1 + q (1 - psi((t - a)/(b - a)))).
class BlendedRadius {
 public:
  explicit BlendedRadius(const EndBlendSpec& spec) : spec_(spec) {}
  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;

 private:
  EndBlendSpec spec_;
};

struct BlendResult {
  double min_kappa = 0.0;
  double argmin_t = 0.0;
  double kappa_round = 0.0;  ///< (n-1)(n-2)/epsilon^2
  double phi_d1_sup = 0.0;   ///< sup |phi'| = sup|psi'| / delta0
  double phi_d2_sup = 0.0;   ///< sup |phi''| = sup|psi''| / delta0^2
  double max_relative_deviation = 0.0;  ///< max |rho/epsilon - 1|
  bool positive = false;
};

/// Evaluates the blend on `grid` + 1 uniform points of [a, b] plus the cutoff
/// knots. Throws InvalidArgument if |q| > c_metric epsilon^2 or epsilon is not
/// in (0, b - a].
BlendResult evaluate_end_blend(const EndBlendSpec& spec, int n, std::size_t grid = 10000);

/// As evaluate_end_blend, and throws BlendNotPositive if min kappa <= 0.
BlendResult end_blend(const EndBlendSpec& spec, int n, std::size_t grid = 10000);

}  // namespace gltunnel

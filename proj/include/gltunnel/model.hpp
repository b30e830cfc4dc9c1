#pragma once

namespace gltunnel {

/// Ambient data of the ball D around a surgery point: dimension, curvature
/// bounds, the constants replacing the O(1)/O(r) terms of the scalar curvature
/// expansion, and the two radii. Lengths are absolute.
struct AmbientModel {
  int n = 3;
  double kappa_D_min = 1.0;  ///< lower bound for the scalar curvature of D
  double ric_sup = 0.0;      ///< bound for |Ric(d/dr, d/dr)|
  double c1 = 0.0;           ///< O(1) term in the sphere coefficient
  double c2 = 0.0;           ///< O(r) term in the bend coefficient
  double c_metric = 0.0;     ///< relative radius deviation per epsilon^2 of small geodesic spheres
  double delta = 0.2;        ///< outer collar radius
  double delta0 = 0.1;       ///< inner radius, where the neck starts
  double safety_factor = 0.0;  ///< multiplies every negative term of the bound by (1 + safety_factor)

  /// Throws TunnelError(InvalidArgument) naming the first violated invariant.
  void validate() const;

  /// Flat ball: all O-terms vanish.
  static AmbientModel flat(int n, double delta0, double kappa_D_min = 1.0);
};

}  // namespace gltunnel

#pragma once

#include <algorithm>

namespace gltunnel::smoothstep {

// Quintic smoothstep S(u) = 10u^3 - 15u^4 + 6u^5 on [0,1], clamped outside.
// S, S', S'' vanish at u = 0 and S' , S'' vanish at u = 1.

inline double value(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

inline double d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}

inline double d2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

/// Integral of S over [0, u], u clamped to [0,1].
inline double integral(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const double u4 = u * u * u * u;
  return u4 * (2.5 + u * (-3.0 + u));
}

// Closed-form sup norms used for the derivative bookkeeping of blends.
inline constexpr double kD1Sup = 1.875;                      // S'(1/2)
inline constexpr double kD2Sup = 5.773502691896257645;       // S''(1/2 - sqrt(3)/6) = 10/sqrt(3)

}  // namespace gltunnel::smoothstep

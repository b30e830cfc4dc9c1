#include "gltunnel/curvature.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "gltunnel/error.hpp"
#include "gltunnel/smoothstep.hpp"

namespace gltunnel {

KappaBreakdown kappa_lower_bound(const CurveState& state, double k, const AmbientModel& model) {
  const double grow = 1.0 + model.safety_factor;
  const double n = model.n;
  const double sin_t = std::sin(state.theta);
  const double sin2 = sin_t * sin_t;
  const double inv_r = 1.0 / state.r;

  KappaBreakdown out;
  out.term_ambient = model.kappa_D_min - grow * 2.0 * model.ric_sup * sin2;
  out.term_sphere = (n - 1.0) * (n - 2.0) * (inv_r * inv_r - grow * model.c1) * sin2;
  out.term_bend = -grow * (n - 1.0) * (inv_r + model.c2 * state.r) * k * sin_t;
  out.total = out.term_ambient + out.term_sphere + out.term_bend;
  out.condition_margin = lemma_margin(state, k);
  return out;
}

double lemma_margin(const CurveState& state, double k) {
  return std::sin(state.theta) / (4.0 * state.r) - k;
}

MarginReport condition_margin(const CurveSamples& samples, std::size_t from_segment) {
  MarginReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_relative = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    const auto& p = samples.points[i];
    if (p.segment < from_segment) continue;
    const double margin = lemma_margin(p.state, p.k);
    const double sin_t = std::sin(p.state.theta);
    const double relative = sin_t > 0.0 ? 1.0 - 4.0 * p.state.r * p.k / sin_t
                                        : -std::numeric_limits<double>::infinity();
    ++report.count;
    report.min_relative = std::min(report.min_relative, relative);
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.argmin_s = p.state.s;
      report.argmin_index = i;
      report.argmin_segment = p.segment;
    }
  }
  return report;
}

double kappa_exact_flat(const CurveState& state, double k, int n) {
  const double x = std::sin(state.theta) / state.r;
  return (n - 1.0) * ((n - 2.0) * x * x - 2.0 * k * x);
}

double kappa_warped(double rho, double drho, double d2rho, int n) {
  return (n - 1.0) * ((n - 2.0) * (1.0 - drho * drho) / (rho * rho) - 2.0 * d2rho / rho);
}

// ---------------------------------------------------------------------------

double blend_psi(double u) { return smoothstep::value(u / kBlendPsiEnd); }
double blend_psi_d1(double u) { return smoothstep::d1(u / kBlendPsiEnd) / kBlendPsiEnd; }
double blend_psi_d2(double u) {
  return smoothstep::d2(u / kBlendPsiEnd) / (kBlendPsiEnd * kBlendPsiEnd);
}

double BlendedRadius::value(double t) const {
  const double len = spec_.b - spec_.a;
  return spec_.epsilon * (1.0 + spec_.q * (1.0 - blend_psi((t - spec_.a) / len)));
}

double BlendedRadius::d1(double t) const {
  const double len = spec_.b - spec_.a;
  return -spec_.epsilon * spec_.q * blend_psi_d1((t - spec_.a) / len) / len;
}

double BlendedRadius::d2(double t) const {
  const double len = spec_.b - spec_.a;
  return -spec_.epsilon * spec_.q * blend_psi_d2((t - spec_.a) / len) / (len * len);
}

BlendResult evaluate_end_blend(const EndBlendSpec& spec, int n, std::size_t grid) {
  const double len = spec.b - spec.a;
  if (!(len > 0.0)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("blend [{}, {}] is empty", spec.a, spec.b));
  }
  if (!(spec.epsilon > 0.0) || spec.epsilon > len * (1.0 + 1e-12)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("epsilon = {} must lie in (0, delta0 = {}]", spec.epsilon, len));
  }
  const double q_max = spec.c_metric * spec.epsilon * spec.epsilon;
  if (std::abs(spec.q) > q_max * (1.0 + 1e-12)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("|q| = {} exceeds c_metric * epsilon^2 = {}", std::abs(spec.q), q_max));
  }
  if (!(1.0 + spec.q > 0.0)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("q = {} gives a nonpositive radius", spec.q));
  }
  if (grid < 2) throw TunnelError(ErrorCode::InvalidArgument, "blend grid needs >= 2 intervals");

  const BlendedRadius rho(spec);
  BlendResult out;
  out.kappa_round = (n - 1.0) * (n - 2.0) / (spec.epsilon * spec.epsilon);
  out.phi_d1_sup = smoothstep::kD1Sup / kBlendPsiEnd / len;
  out.phi_d2_sup = smoothstep::kD2Sup / (kBlendPsiEnd * kBlendPsiEnd) / (len * len);
  out.min_kappa = std::numeric_limits<double>::infinity();

  auto visit = [&](double u) {
    const double t = spec.a + u * len;
    const double kappa = kappa_warped(rho, t, n);
    out.max_relative_deviation =
        std::max(out.max_relative_deviation, std::abs(rho.value(t) / spec.epsilon - 1.0));
    if (kappa < out.min_kappa) {
      out.min_kappa = kappa;
      out.argmin_t = t;
    }
  };
  for (std::size_t j = 0; j <= grid; ++j) visit(static_cast<double>(j) / static_cast<double>(grid));
  // Extremal points of psi'' and the end of the cutoff.
  const double root = std::sqrt(3.0) / 6.0;
  visit(kBlendPsiEnd * (0.5 - root));
  visit(kBlendPsiEnd * (0.5 + root));
  visit(kBlendPsiEnd);

  out.positive = out.min_kappa > 0.0;
  return out;
}

BlendResult end_blend(const EndBlendSpec& spec, int n, std::size_t grid) {
  BlendResult out = evaluate_end_blend(spec, n, grid);
  if (!out.positive) {
    throw TunnelError(ErrorCode::BlendNotPositive,
                      fmt::format("min scalar curvature {} at t = {} over the end blend; delta0 too "
                                  "large for c_metric",
                                  out.min_kappa, out.argmin_t));
  }
  return out;
}

}  // namespace gltunnel

#include "gltunnel/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "gltunnel/error.hpp"

namespace gltunnel {

void SmoothingParams::validate() const {
  if (eta && !(*eta > 0.0 && std::isfinite(*eta))) {
    throw TunnelError(ErrorCode::EtaTooLarge, fmt::format("eta = {} must be > 0", *eta));
  }
  if (!(drop_fraction > 0.0 && drop_fraction <= 1.0)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("drop_fraction = {} must lie in (0, 1]", drop_fraction));
  }
}

double resolve_eta(const BendPlan& plan, const SmoothingParams& params) {
  params.validate();
  const auto segs = plan.segments();
  double shortest = segs[0].delta_s;
  for (std::size_t j = 1; j <= plan.closing_index(); ++j) {
    shortest = std::min(shortest, segs[j].delta_s);
  }
  const double eta = params.eta.value_or(shortest / 8.0);
  if (!(eta < 0.5 * shortest)) {
    throw TunnelError(ErrorCode::EtaTooLarge,
                      fmt::format("eta = {} must be below half the shortest segment ({}) so that "
                                  "transitions do not overlap",
                                  eta, shortest));
  }
  return eta;
}

namespace {

struct TailLayout {
  double plateau = 0.0;
  double drop = 0.0;
};

void append_tail(std::vector<CurvaturePiece>& pieces, std::size_t tail, double k_closing,
                 double tail_length, const TailLayout& layout) {
  double offset = 0.0;
  if (layout.plateau > 0.0) {
    pieces.push_back({tail, offset, layout.plateau, k_closing, k_closing, PieceShape::Constant});
    offset += layout.plateau;
  }
  pieces.push_back({tail, offset, layout.drop, k_closing, 0.0, PieceShape::Ramp});
  offset += layout.drop;
  pieces.push_back({tail, offset, tail_length - offset, 0.0, 0.0, PieceShape::Constant});
}

double total_integral(const std::vector<CurvaturePiece>& pieces) {
  double total = 0.0;
  for (const auto& p : pieces) total += p.integral();
  return total;
}

}  // namespace

CurvatureProfile smooth_profile(const BendPlan& plan, const SmoothingParams& params) {
  const double eta = resolve_eta(plan, params);
  const auto segs = plan.segments();
  const std::size_t closing = plan.closing_index();
  const std::size_t tail = plan.tail_index();

  std::vector<CurvaturePiece> pieces;
  std::vector<double> lengths;
  for (const auto& s : segs) lengths.push_back(s.delta_s);

  for (std::size_t j = 0; j <= closing; ++j) {
    const double len = segs[j].delta_s;
    const double k = segs[j].k;
    const double left = j == 0 ? 0.0 : segs[j - 1].k;
    const double w_start = left < k ? eta : 0.0;
    double right = k;
    double w_end = 0.0;
    if (j < closing && segs[j + 1].k < k) {
      right = segs[j + 1].k;
      w_end = eta;
    }
    double offset = 0.0;
    if (w_start > 0.0) {
      pieces.push_back({j, offset, w_start, left, k, PieceShape::Ramp});
      offset += w_start;
    }
    pieces.push_back({j, offset, len - w_start - w_end, k, k, PieceShape::Constant});
    offset += len - w_start - w_end;
    if (w_end > 0.0) pieces.push_back({j, offset, w_end, k, right, PieceShape::Ramp});
  }

  const double k_closing = segs[closing].k;
  const double tail_length = segs[tail].delta_s;
  const double window = params.drop_fraction * plan.model.delta0;

  TailLayout layout;
  layout.drop = eta;
  auto residual = [&](const TailLayout& l) {
    auto trial = pieces;
    append_tail(trial, tail, k_closing, tail_length, l);
    return total_integral(trial) - kHalfPi;
  };

  // Secant iteration on the plateau length; the residual is affine in it.
  double p0 = 0.0;
  double f0 = residual({p0, layout.drop});
  if (f0 < 0.0) {
    double p1 = -f0 / k_closing;
    double f1 = residual({p1, layout.drop});
    for (int iter = 0; iter < 30 && std::abs(f1) > 1e-15 && f1 != f0; ++iter) {
      const double next = std::max(0.0, p1 - f1 * (p1 - p0) / (f1 - f0));
      p0 = p1;
      f0 = f1;
      p1 = next;
      f1 = residual({p1, layout.drop});
    }
    layout.plateau = p1;
  } else {
    // The deficit is smaller than half a ramp: drop straight away with a
    // narrower ramp.
    const double missing = kHalfPi - total_integral(pieces);
    layout.drop = 2.0 * missing / k_closing;
  }
  if (!(layout.drop > 0.0) || layout.plateau + layout.drop > window) {
    throw TunnelError(ErrorCode::NormalizationFailed,
                      fmt::format("tail needs plateau {} + drop {} but only {} is available; "
                                  "reduce eta or enlarge drop_fraction",
                                  layout.plateau, layout.drop, window));
  }
  append_tail(pieces, tail, k_closing, tail_length, layout);
  const std::size_t horizontal = pieces.size() - 1;
  const double err = total_integral(pieces) - kHalfPi;
  if (std::abs(err) > 1e-12) {
    throw TunnelError(ErrorCode::NormalizationFailed,
                      fmt::format("total turn misses pi/2 by {}", err));
  }
  return CurvatureProfile::smoothed(std::move(lengths), std::move(pieces), horizontal);
}

// ---------------------------------------------------------------------------

bool SmoothedCertificate::passed() const {
  return std::abs(integral_k - kHalfPi) <= 1e-9 && std::abs(theta_closure - kHalfPi) <= 1e-9 &&
         theta_bound_ok && margin_ok && tail_ok;
}

SmoothedCertificate verify_smoothed(const BendPlan& plan, const CurvatureProfile& smoothed,
                                    double step, const IntegrationOptions& options) {
  SmoothedCertificate cert;
  const auto piecewise = plan.profile();
  const ArcChain chain(piecewise, plan.knots());
  const auto curve = integrate_profile(smoothed, plan.initial_state(), step, options);

  cert.integral_k = smoothed.integral();
  cert.theta_closure = curve.theta_closure;
  cert.l1_deviation = piecewise.l1_distance(smoothed);

  const std::size_t closing = plan.closing_index();
  const double total = plan.total_length;
  double lipschitz = 0.0;
  for (const auto& p : curve.points) {
    const CurveState ref = chain.at(p.segment, p.offset);
    cert.sup_theta_dev = std::max(cert.sup_theta_dev, std::abs(p.state.theta - ref.theta));
    cert.sup_r_dev = std::max(cert.sup_r_dev, std::abs(p.state.r - ref.r));
    cert.sup_t_dev = std::max(cert.sup_t_dev, std::abs(p.state.t - ref.t));
    if (p.segment >= 1 && p.segment <= closing) {
      // |d margin/d theta| <= 1/(4r), |d margin/d r| <= 1/(4r^2); |dr| <= S * l1.
      const double r_lo = std::min(p.state.r, ref.r);
      lipschitz = std::max(lipschitz, 0.25 / r_lo + 0.25 * total / (r_lo * r_lo));
    }
  }
  cert.theta_bound_ok = cert.sup_theta_dev <= cert.l1_deviation + 1e-9;

  cert.margin_piecewise = condition_margin(plan.samples(step, options), 1);
  cert.margin_smoothed = condition_margin(curve, 1);
  cert.margin_lipschitz = lipschitz;
  cert.margin_floor = cert.margin_piecewise.min_margin - lipschitz * cert.l1_deviation;
  cert.margin_ok = cert.margin_smoothed.count > 0 && cert.margin_smoothed.min_margin > 0.0;

  const std::size_t tail = plan.tail_index();
  const double flat_from = plan.model.delta0;
  bool have_ref = false;
  for (const auto& p : curve.points) {
    if (p.segment != tail || p.offset < flat_from) continue;
    if (!have_ref) {
      cert.r_inf = p.state.r;
      have_ref = true;
    }
    cert.tail_r_variation = std::max(cert.tail_r_variation, std::abs(p.state.r - cert.r_inf));
  }
  cert.tail_ok = have_ref && cert.tail_r_variation <= 1e-12;
  return cert;
}

}  // namespace gltunnel

#include "gltunnel/curve.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "gltunnel/error.hpp"
#include "gltunnel/smoothstep.hpp"

namespace gltunnel {

double cos_normal(double theta) {
  if (theta > std::numbers::pi / 4.0) return std::sin(kHalfPi - theta);
  return std::cos(theta);
}

CurveState extend_by_arc(const CurveState& state, const ArcSegment& seg) {
  if (!(state.r > 0.0)) {
    throw TunnelError(ErrorCode::NonpositiveRadius, fmt::format("start radius {} <= 0", state.r));
  }
  if (!(seg.delta_s >= 0.0) || !std::isfinite(seg.delta_s) || !std::isfinite(seg.k)) {
    throw TunnelError(ErrorCode::InvalidArgument,
                      fmt::format("arc segment k={} delta_s={}", seg.k, seg.delta_s));
  }
  // cos a - cos b and sin b - sin a through the half-angle forms; stable as k -> 0.
  const double half = 0.5 * seg.k * seg.delta_s;
  const double chord = seg.k == 0.0 ? seg.delta_s : 2.0 * std::sin(half) / seg.k;
  const double mid = state.theta + half;

  CurveState next;
  next.s = state.s + seg.delta_s;
  next.theta = state.theta + seg.k * seg.delta_s;
  next.t = state.t + chord * std::sin(mid);
  next.r = state.r - chord * cos_normal(mid);
  if (!(next.r > 0.0)) {
    throw TunnelError(ErrorCode::NonpositiveRadius,
                      fmt::format("radius {} after arc k={} delta_s={} crossed the axis", next.r,
                                  seg.k, seg.delta_s));
  }
  return next;
}

// ---------------------------------------------------------------------------

double CurvaturePiece::k(double u) const {
  if (shape == PieceShape::Constant) return k_begin;
  return k_begin + (k_end - k_begin) * smoothstep::value(u / length);
}

double CurvaturePiece::dk(double u) const {
  if (shape == PieceShape::Constant) return 0.0;
  return (k_end - k_begin) / length * smoothstep::d1(u / length);
}

double CurvaturePiece::d2k(double u) const {
  if (shape == PieceShape::Constant) return 0.0;
  return (k_end - k_begin) / (length * length) * smoothstep::d2(u / length);
}

double CurvaturePiece::integral_to(double u) const {
  u = std::clamp(u, 0.0, length);
  if (shape == PieceShape::Constant) return k_begin * u;
  return k_begin * u + (k_end - k_begin) * length * smoothstep::integral(u / length);
}

// ---------------------------------------------------------------------------

namespace {

void check_tiling(const std::vector<double>& lengths, const std::vector<CurvaturePiece>& pieces) {
  if (lengths.empty() || pieces.empty()) {
    throw TunnelError(ErrorCode::InvalidArgument, "profile needs at least one segment and piece");
  }
  for (double len : lengths) {
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw TunnelError(ErrorCode::InvalidArgument, fmt::format("segment length {}", len));
    }
  }
  std::size_t segment = 0;
  double covered = 0.0;
  for (const auto& p : pieces) {
    if (!(p.length > 0.0)) {
      throw TunnelError(ErrorCode::InvalidArgument, fmt::format("piece length {}", p.length));
    }
    if (p.segment != segment) {
      if (p.segment != segment + 1) {
        throw TunnelError(ErrorCode::InvalidArgument, "pieces skip a segment");
      }
      if (std::abs(covered - lengths[segment]) > 1e-12 * lengths[segment]) {
        throw TunnelError(ErrorCode::InvalidArgument,
                          fmt::format("segment {} covered {} of {}", segment, covered,
                                      lengths[segment]));
      }
      segment = p.segment;
      covered = 0.0;
    }
    covered += p.length;
  }
  if (segment + 1 != lengths.size() ||
      std::abs(covered - lengths[segment]) > 1e-12 * lengths[segment]) {
    throw TunnelError(ErrorCode::InvalidArgument, "pieces do not tile the last segment");
  }
}

}  // namespace

CurvatureProfile CurvatureProfile::piecewise(std::span<const ArcSegment> segments,
                                             std::optional<std::size_t> horizontal_from) {
  CurvatureProfile profile;
  profile.kind_ = ProfileKind::PiecewiseConstant;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    profile.segment_lengths_.push_back(segments[i].delta_s);
    profile.pieces_.push_back({i, 0.0, segments[i].delta_s, segments[i].k, segments[i].k,
                               PieceShape::Constant});
  }
  check_tiling(profile.segment_lengths_, profile.pieces_);
  if (horizontal_from) {
    for (std::size_t i = *horizontal_from; i < segments.size(); ++i) {
      if (segments[i].k != 0.0) {
        throw TunnelError(ErrorCode::InvalidArgument, "horizontal segment with nonzero k");
      }
    }
  }
  profile.horizontal_from_ = horizontal_from;
  return profile;
}

CurvatureProfile CurvatureProfile::smoothed(std::vector<double> segment_lengths,
                                            std::vector<CurvaturePiece> pieces,
                                            std::optional<std::size_t> horizontal_from) {
  check_tiling(segment_lengths, pieces);
  if (horizontal_from) {
    for (std::size_t i = *horizontal_from; i < pieces.size(); ++i) {
      if (pieces[i].k_begin != 0.0 || pieces[i].k_end != 0.0) {
        throw TunnelError(ErrorCode::InvalidArgument, "horizontal piece with nonzero k");
      }
    }
  }
  CurvatureProfile profile;
  profile.kind_ = ProfileKind::Smoothed;
  profile.segment_lengths_ = std::move(segment_lengths);
  profile.pieces_ = std::move(pieces);
  profile.horizontal_from_ = horizontal_from;
  return profile;
}

double CurvatureProfile::total_length() const {
  double total = 0.0;
  for (double len : segment_lengths_) total += len;
  return total;
}

double CurvatureProfile::integral() const {
  double total = 0.0;
  for (const auto& p : pieces_) total += p.integral();
  return total;
}

double CurvatureProfile::k_at(std::size_t segment, double offset) const {
  const CurvaturePiece* last = nullptr;
  for (const auto& p : pieces_) {
    if (p.segment < segment) continue;
    if (p.segment > segment) break;
    last = &p;
    if (offset < p.offset + p.length) return p.k(offset - p.offset);
  }
  if (last == nullptr) {
    throw TunnelError(ErrorCode::OutOfRange, fmt::format("segment {}", segment));
  }
  return last->k(last->length);
}

double CurvatureProfile::l1_distance(const CurvatureProfile& other) const {
  if (segment_count() != other.segment_count()) {
    throw TunnelError(ErrorCode::InvalidArgument, "profiles have different segment counts");
  }
  auto pieces_of = [](const CurvatureProfile& p, std::size_t seg) {
    std::vector<const CurvaturePiece*> out;
    for (const auto& piece : p.pieces_) {
      if (piece.segment == seg) out.push_back(&piece);
    }
    return out;
  };
  // Integral over [a, b] of a piece given in segment coordinates.
  auto integrate = [](const CurvaturePiece& p, double a, double b) {
    return p.integral_to(b - p.offset) - p.integral_to(a - p.offset);
  };

  double total = 0.0;
  for (std::size_t seg = 0; seg < segment_count(); ++seg) {
    const auto mine = pieces_of(*this, seg);
    const auto theirs = pieces_of(other, seg);
    std::vector<double> cuts{0.0, segment_lengths_[seg]};
    for (const auto* p : mine) cuts.push_back(p->offset);
    for (const auto* p : theirs) cuts.push_back(p->offset);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto locate = [](const std::vector<const CurvaturePiece*>& ps, double x) {
      const CurvaturePiece* hit = ps.front();
      for (const auto* p : ps) {
        if (p->offset <= x) hit = p;
      }
      return hit;
    };
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      const auto* p = locate(mine, mid);
      const auto* q = locate(theirs, mid);
      // Both are monotone smoothsteps or constants here; check for a sign
      // change before using the exact signed integral.
      constexpr int kProbe = 32;
      int sign = 0;
      bool mixed = false;
      for (int j = 0; j <= kProbe; ++j) {
        const double x = a + (b - a) * j / kProbe;
        const double d = p->k(x - p->offset) - q->k(x - q->offset);
        const int sj = (d > 0) - (d < 0);
        if (sj == 0) continue;
        if (sign == 0) sign = sj;
        if (sj != sign) mixed = true;
      }
      if (!mixed) {
        total += std::abs(integrate(*p, a, b) - integrate(*q, a, b));
        continue;
      }
      // Composite Simpson on |difference|.
      constexpr int kSub = 4096;
      const double h = (b - a) / kSub;
      double acc = 0.0;
      for (int j = 0; j <= kSub; ++j) {
        const double x = a + h * j;
        const double w = (j == 0 || j == kSub) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        acc += w * std::abs(p->k(x - p->offset) - q->k(x - q->offset));
      }
      total += acc * h / 3.0;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

ArcChain::ArcChain(const CurvatureProfile& profile, const CurveState& initial) {
  if (profile.kind() != ProfileKind::PiecewiseConstant) {
    throw TunnelError(ErrorCode::InvalidArgument, "ArcChain needs a piecewise-constant profile");
  }
  starts_.reserve(profile.segment_count() + 1);
  starts_.push_back(initial);
  const auto horizontal = profile.horizontal_from();
  for (std::size_t i = 0; i < profile.segment_count(); ++i) {
    const auto& piece = profile.pieces()[i];
    ks_.push_back(piece.k_begin);
    CurveState start = starts_.back();
    if (horizontal && i >= *horizontal) start.theta = kHalfPi;
    starts_.back() = start;
    starts_.push_back(extend_by_arc(start, {piece.k_begin, piece.length}));
  }
}

ArcChain::ArcChain(const CurvatureProfile& profile, std::vector<CurveState> knots)
    : starts_(std::move(knots)) {
  if (profile.kind() != ProfileKind::PiecewiseConstant ||
      starts_.size() != profile.segment_count() + 1) {
    throw TunnelError(ErrorCode::InvalidArgument, "knots do not match the piecewise profile");
  }
  for (const auto& piece : profile.pieces()) ks_.push_back(piece.k_begin);
}

CurveState ArcChain::at(std::size_t segment, double offset) const {
  if (segment >= ks_.size()) {
    throw TunnelError(ErrorCode::OutOfRange, fmt::format("segment {}", segment));
  }
  if (offset <= 0.0) return starts_[segment];
  return extend_by_arc(starts_[segment], {ks_[segment], offset});
}

// ---------------------------------------------------------------------------

namespace {

std::size_t steps_for(double length, double step, std::size_t min_steps) {
  const double n = std::ceil(length / step);
  return std::max<std::size_t>(min_steps, n > 0 ? static_cast<std::size_t>(n) : 1);
}

void check_step(const CurvatureProfile& profile, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw TunnelError(ErrorCode::InvalidArgument, fmt::format("step {} must be > 0", step));
  }
  if (step > profile.total_length()) {
    throw TunnelError(ErrorCode::StepTooLarge,
                      fmt::format("step {} exceeds total length {}", step, profile.total_length()));
  }
}

std::vector<double> segment_labels(const CurvatureProfile& profile, double s0) {
  std::vector<double> labels{s0};
  for (double len : profile.segment_lengths()) labels.push_back(labels.back() + len);
  return labels;
}

using Vec3 = Eigen::Vector3d;  // (theta, t, r)

CurveSamples integrate_smoothed(const CurvatureProfile& profile, const CurveState& initial,
                                double step, const IntegrationOptions& options) {
  CurveSamples out;
  out.step = step;
  const auto labels = segment_labels(profile, initial.s);
  const auto horizontal = profile.horizontal_from();

  Vec3 y(initial.theta, initial.t, initial.r);
  out.theta_closure = initial.theta;
  bool snapped = false;

  const auto& pieces = profile.pieces();
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    const auto& piece = pieces[pi];
    if (horizontal && pi >= *horizontal && !snapped) {
      out.theta_closure = y(0);
      y(0) = kHalfPi;
      snapped = true;
    }
    const std::size_t n = steps_for(piece.length, step, options.min_steps_per_piece);
    const double h = piece.length / static_cast<double>(n);
    auto emit = [&](std::size_t i, const CurveState& c) {
      const double u = i == n ? piece.length : h * static_cast<double>(i);
      CurveSample sample;
      sample.segment = piece.segment;
      sample.piece = pi;
      sample.offset = piece.offset + u;
      sample.state = {labels[piece.segment] + sample.offset, c.t, c.r, c.theta};
      sample.k = piece.k(u);
      sample.piece_end = i == n;
      if (!(c.r > 0.0)) {
        throw TunnelError(ErrorCode::NonpositiveRadius,
                          fmt::format("radius {} at s={}", c.r, sample.state.s));
      }
      out.points.push_back(sample);
    };

    if (piece.shape == PieceShape::Constant) {
      // Exact arcs from the piece start: no truncation error, and rounding
      // does not accumulate along the piece.
      const CurveState start{0.0, y(1), y(2), y(0)};
      emit(0, start);
      CurveState c = start;
      for (std::size_t i = 1; i <= n; ++i) {
        const double u = i == n ? piece.length : h * static_cast<double>(i);
        c = extend_by_arc(start, {piece.k_begin, u});
        emit(i, c);
      }
      y = Vec3(c.theta, c.t, c.r);
      continue;
    }

    auto rhs = [&piece](double u, const Vec3& state) {
      return Vec3(piece.k(u), std::sin(state(0)), -cos_normal(state(0)));
    };
    emit(0, {0.0, y(1), y(2), y(0)});
    for (std::size_t i = 0; i < n; ++i) {
      const double u = h * static_cast<double>(i);
      const Vec3 k1 = rhs(u, y);
      const Vec3 k2 = rhs(u + 0.5 * h, y + 0.5 * h * k1);
      const Vec3 k3 = rhs(u + 0.5 * h, y + 0.5 * h * k2);
      const Vec3 k4 = rhs(u + h, y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      emit(i + 1, {0.0, y(1), y(2), y(0)});
    }
  }
  if (!snapped) out.theta_closure = y(0);
  return out;
}

}  // namespace

CurveSamples integrate_chain(const CurvatureProfile& profile, const ArcChain& chain, double step,
                             const IntegrationOptions& options) {
  check_step(profile, step);
  CurveSamples out;
  out.step = step;
  const auto& pieces = profile.pieces();
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    const auto& piece = pieces[pi];
    const CurveState& start = chain.segment_start(piece.segment);
    const std::size_t n = steps_for(piece.length, step, options.min_steps_per_piece);
    const double h = piece.length / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
      CurveSample sample;
      sample.segment = piece.segment;
      sample.piece = pi;
      sample.k = piece.k_begin;
      sample.piece_end = i == n;
      if (i == 0) {
        sample.offset = 0.0;
        sample.state = start;
      } else if (i == n) {
        sample.offset = piece.length;
        sample.state = chain.segment_start(piece.segment + 1);
      } else {
        sample.offset = h * static_cast<double>(i);
        sample.state = extend_by_arc(start, {piece.k_begin, sample.offset});
      }
      out.points.push_back(sample);
    }
  }
  out.theta_closure = out.points.back().state.theta;
  return out;
}

CurveSamples integrate_profile(const CurvatureProfile& profile, const CurveState& initial,
                               double step, const IntegrationOptions& options) {
  check_step(profile, step);
  if (profile.kind() == ProfileKind::PiecewiseConstant) {
    const ArcChain chain(profile, initial);
    return integrate_chain(profile, chain, step, options);
  }
  return integrate_smoothed(profile, initial, step, options);
}

// ---------------------------------------------------------------------------

namespace {

template <typename Field>
double interpolate(const CurveSamples& samples, double s, Field field) {
  if (samples.points.empty()) throw TunnelError(ErrorCode::OutOfRange, "no samples");
  const auto& pts = samples.points;
  if (s < pts.front().state.s || s > pts.back().state.s || std::isnan(s)) {
    throw TunnelError(ErrorCode::OutOfRange,
                      fmt::format("s={} outside [{}, {}]", s, pts.front().state.s,
                                  pts.back().state.s));
  }
  auto hi = std::upper_bound(pts.begin(), pts.end(), s,
                             [](double v, const CurveSample& p) { return v < p.state.s; });
  if (hi == pts.end()) return field(pts.back().state);
  const auto lo = std::prev(hi);
  const double span = hi->state.s - lo->state.s;
  if (!(span > 0.0)) return field(lo->state);
  const double w = (s - lo->state.s) / span;
  return (1.0 - w) * field(lo->state) + w * field(hi->state);
}

}  // namespace

double theta_at(const CurveSamples& samples, double s) {
  return interpolate(samples, s, [](const CurveState& c) { return c.theta; });
}
double r_at(const CurveSamples& samples, double s) {
  return interpolate(samples, s, [](const CurveState& c) { return c.r; });
}
double t_at(const CurveSamples& samples, double s) {
  return interpolate(samples, s, [](const CurveState& c) { return c.t; });
}

}  // namespace gltunnel

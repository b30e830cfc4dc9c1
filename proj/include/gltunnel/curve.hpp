#pragma once

// Planar profile curves prescribed by their geodesic curvature k(s).
//
// The curve gamma(s) = (t(s), r(s)) has unit tangent (sin theta, -cos theta)
// and theta' = k. Every profile is a list of segments; each segment is split
// into C^2 pieces. Positions are addressed by (segment, local offset) so that
// segments many orders of magnitude shorter than the total length remain
// resolved; the absolute arc length s is carried as a label only.

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace gltunnel {

class ArcChain;

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// cos(theta) evaluated as sin(pi/2 - theta) above pi/4, so that the double
/// kHalfPi is exactly horizontal.
double cos_normal(double theta);

struct CurveState {
  double s = 0.0;      ///< arc length label
  double t = 0.0;      ///< horizontal coordinate
  double r = 0.0;      ///< distance to the rotation axis, > 0
  double theta = 0.0;  ///< angle between the normal and the t-axis
};

struct ArcSegment {
  double k = 0.0;
  double delta_s = 0.0;
};

/// Exact circular-arc update of `state` by `seg`.
/// Throws TunnelError(NonpositiveRadius) if the new radius is <= 0.
CurveState extend_by_arc(const CurveState& state, const ArcSegment& seg);

enum class PieceShape { Constant, Ramp };

/// A piece of a curvature profile on [offset, offset + length] of its parent
/// segment. Ramps follow the quintic smoothstep from k_begin to k_end.
struct CurvaturePiece {
  std::size_t segment = 0;
  double offset = 0.0;
  double length = 0.0;
  double k_begin = 0.0;
  double k_end = 0.0;
  PieceShape shape = PieceShape::Constant;

  double k(double u) const;
  double dk(double u) const;
  double d2k(double u) const;
  /// Integral of k over [0, u] in local piece coordinates.
  double integral_to(double u) const;
  double integral() const { return integral_to(length); }
};

enum class ProfileKind { PiecewiseConstant, Smoothed };

class CurvatureProfile {
 public:
  /// One constant piece per segment. Segments from `horizontal_from` on must
  /// have k == 0 and are traversed horizontally.
  static CurvatureProfile piecewise(std::span<const ArcSegment> segments,
                                    std::optional<std::size_t> horizontal_from = std::nullopt);

  /// Pieces must tile each segment in order. If `horizontal_from` is set, the
  /// piece with that index and all later ones carry k == 0 and the curve is
  /// horizontal there (theta == pi/2 exactly).
  static CurvatureProfile smoothed(std::vector<double> segment_lengths,
                                   std::vector<CurvaturePiece> pieces,
                                   std::optional<std::size_t> horizontal_from = std::nullopt);

  ProfileKind kind() const { return kind_; }
  const std::vector<CurvaturePiece>& pieces() const { return pieces_; }
  const std::vector<double>& segment_lengths() const { return segment_lengths_; }
  std::size_t segment_count() const { return segment_lengths_.size(); }
  std::optional<std::size_t> horizontal_from() const { return horizontal_from_; }

  double total_length() const;
  /// Exact integral of k over the whole profile.
  double integral() const;
  /// k at a segment-local position; at an interior piece boundary the right
  /// piece wins.
  double k_at(std::size_t segment, double offset) const;
  /// Exact integral of |k - other.k| when both profiles share segment lengths.
  double l1_distance(const CurvatureProfile& other) const;

 private:
  ProfileKind kind_ = ProfileKind::PiecewiseConstant;
  std::vector<double> segment_lengths_;
  std::vector<CurvaturePiece> pieces_;
  std::optional<std::size_t> horizontal_from_;
};

struct CurveSample {
  CurveState state;
  double k = 0.0;
  std::size_t segment = 0;
  std::size_t piece = 0;
  double offset = 0.0;     ///< position inside `segment`
  bool piece_end = false;  ///< last node of its piece (k is the left limit)
};

struct CurveSamples {
  std::vector<CurveSample> points;
  double step = 0.0;
  /// Integrated theta at the end of the profile before any horizontal snap.
  double theta_closure = 0.0;

  const CurveSample& front() const { return points.front(); }
  const CurveSample& back() const { return points.back(); }
  std::size_t size() const { return points.size(); }
};

struct IntegrationOptions {
  /// Minimum number of uniform steps per piece.
  std::size_t min_steps_per_piece = 10;
};

/// Samples the curve defined by `profile` starting at `initial`. Piecewise
/// constant profiles are evaluated in closed form; smoothed profiles are
/// integrated with classical fixed-step RK4 on a grid aligned to every piece
/// boundary with spacing <= min(step, piece length / min_steps_per_piece).
/// Constant-curvature pieces are evaluated as exact arcs from the piece
/// start; ramps are integrated with classical RK4 on the same grid.
CurveSamples integrate_profile(const CurvatureProfile& profile, const CurveState& initial,
                               double step, const IntegrationOptions& options = {});

/// Samples a piecewise-constant profile from an explicit chain of boundary
/// states.
CurveSamples integrate_chain(const CurvatureProfile& profile, const ArcChain& chain, double step,
                             const IntegrationOptions& options = {});

double theta_at(const CurveSamples& samples, double s);
double r_at(const CurveSamples& samples, double s);
double t_at(const CurveSamples& samples, double s);

/// Closed-form evaluator for piecewise-constant profiles at segment-local
/// positions.
class ArcChain {
 public:
  ArcChain(const CurvatureProfile& piecewise_profile, const CurveState& initial);
  /// Uses precomputed segment boundary states (segment_count() + 1 of them).
  ArcChain(const CurvatureProfile& piecewise_profile, std::vector<CurveState> knots);

  const CurveState& segment_start(std::size_t segment) const { return starts_.at(segment); }
  const std::vector<CurveState>& segment_starts() const { return starts_; }
  double k(std::size_t segment) const { return ks_.at(segment); }
  CurveState at(std::size_t segment, double offset) const;
  const CurveState& end() const { return starts_.back(); }

 private:
  std::vector<CurveState> starts_;  // one per segment plus the end state
  std::vector<double> ks_;
};

}  // namespace gltunnel

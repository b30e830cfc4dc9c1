#include "gltunnel/output.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>

#include "gltunnel/error.hpp"

namespace gltunnel::output {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string curve_csv(const CurveSamples& samples, const AmbientModel& model) {
  std::string out = "s,t,r,theta,k,kappa_exact_flat,kappa_lower_bound,condition_margin\n";
  for (const auto& p : samples.points) {
    const auto bound = kappa_lower_bound(p.state, p.k, model);
    fmt::format_to(std::back_inserter(out), "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                   p.state.s, p.state.t, p.state.r, p.state.theta, p.k,
                   kappa_exact_flat(p.state, p.k, model.n), bound.total, bound.condition_margin);
  }
  return out;
}

namespace {

Json margin_json(const MarginReport& m) {
  return Json{{"min_margin", m.min_margin},       {"min_relative", m.min_relative},
              {"argmin_s", m.argmin_s},           {"argmin_segment", m.argmin_segment},
              {"samples", m.count}};
}

Json fit_json(const LogLogFit& f) {
  return Json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"rms_residual", f.rms_residual},
              {"max_residual", f.max_residual},
              {"points", f.points}};
}

}  // namespace

Json certificate_json(const NeckProfile& neck, const Json& config) {
  const auto& plan = neck.plan;
  const auto& cert = neck.certification;

  Json items = Json::array();
  for (const auto& item : cert.plan.items) {
    items.push_back({{"name", item.name}, {"passed", item.passed}, {"slack", item.slack}});
  }
  Json breakpoints = Json::array();
  const auto segs = plan.segments();
  const auto& knots = plan.knots();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    breakpoints.push_back({{"s", knots[i].s},
                           {"t", knots[i].t},
                           {"r", knots[i].r},
                           {"theta", knots[i].theta},
                           {"k_right", i < segs.size() ? segs[i].k : 0.0}});
  }

  Json blend{{"a", cert.blend_spec.a},
             {"b", cert.blend_spec.b},
             {"epsilon", cert.blend_spec.epsilon},
             {"q", cert.blend_spec.q},
             {"c_metric", cert.blend_spec.c_metric},
             {"positive", cert.blend.has_value()}};
  if (cert.blend) {
    blend["min_kappa"] = cert.blend->min_kappa;
    blend["argmin_t"] = cert.blend->argmin_t;
    blend["kappa_round"] = cert.blend->kappa_round;
    blend["phi_d1_sup"] = cert.blend->phi_d1_sup;
    blend["phi_d2_sup"] = cert.blend->phi_d2_sup;
    blend["max_relative_deviation"] = cert.blend->max_relative_deviation;
  } else {
    blend["error"] = cert.blend_error;
  }

  const auto& sm = cert.smoothed;
  Json out;
  out["certified"] = cert.certified();
  out["failures"] = cert.failures;
  out["advisories"] = cert.advisories;
  out["config"] = config;
  out["plan"] = {{"s0", plan.s0()},
                 {"theta0", plan.theta0()},
                 {"s0_capped", plan.start_arc.capped},
                 {"m", plan.m()},
                 {"theta_bar", plan.theta_bar},
                 {"contraction", cert.plan.contraction},
                 {"k_final", plan.closing.k},
                 {"delta_s_final", plan.closing.delta_s},
                 {"tail_length", plan.tail_length},
                 {"r_inf", plan.r_inf},
                 {"total_length", plan.total_length},
                 {"checks", items},
                 {"breakpoints", breakpoints}};
  out["smoothing"] = {{"eta", neck.eta},
                      {"integral_k", sm.integral_k},
                      {"theta_closure", sm.theta_closure},
                      {"l1_deviation", sm.l1_deviation},
                      {"sup_theta_dev", sm.sup_theta_dev},
                      {"sup_r_dev", sm.sup_r_dev},
                      {"sup_t_dev", sm.sup_t_dev},
                      {"theta_bound_ok", sm.theta_bound_ok},
                      {"margin_lipschitz", sm.margin_lipschitz},
                      {"margin_floor", sm.margin_floor},
                      {"tail_r_variation", sm.tail_r_variation},
                      {"tail_ok", sm.tail_ok},
                      {"r_inf", neck.r_inf}};
  out["condition_margin"] = {{"piecewise", margin_json(cert.margin_piecewise)},
                             {"smoothed", margin_json(cert.margin_smoothed)}};
  out["scalar_curvature"] = {{"n", neck.model.n},
                             {"min_exact_flat", cert.min_kappa_exact},
                             {"min_lower_bound", cert.min_bound_total}};
  out["end_blend"] = blend;
  out["sampling"] = {{"step", neck.step},
                     {"audit_step", neck.step / 10.0},
                     {"samples", neck.samples.size()}};
  return out;
}

Json size_report_json(const SizeReport& size, const NeighborhoodResult& hood) {
  return Json{{"certified", size.certified},
              {"neck_length", size.neck_length},
              {"neck_length_2", size.neck_length_2},
              {"cylinder_length", size.cylinder_length},
              {"dist_collars", size.dist_collars},
              {"max_radius", size.max_radius},
              {"diam_upper", size.diam_upper},
              {"vol_Uprime", size.vol_Uprime},
              {"vol_Uprime_bound", size.vol_Uprime_bound},
              {"vol_U", size.vol_U},
              {"vol_U_bracket", {size.vol_U_low, size.vol_U_high}},
              {"tube_radius_needed", size.tube_radius_needed},
              {"r_inf", size.r_inf},
              {"min_kappa_exact", size.min_kappa_exact},
              {"min_bound_total", size.min_bound_total},
              {"min_condition_margin", size.min_condition_margin},
              {"end_blend_passed", size.blend_passed},
              {"neighborhood", {{"passed", hood.passed}, {"slack", hood.slack}}}};
}

Json sweep_json(const SweepResult& sweep, double tol_length, double tol_volume, int n) {
  Json points = Json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"delta0", p.delta0},
                      {"m", p.m},
                      {"neck_length", p.neck_length},
                      {"diam_upper", p.diam_upper},
                      {"vol_Uprime", p.vol_Uprime},
                      {"r_inf", p.r_inf},
                      {"certified", p.certified},
                      {"failures", p.failures}});
  }
  const bool length_ok = std::abs(sweep.length.slope - 1.0) <= tol_length;
  const bool diam_ok = std::abs(sweep.diameter.slope - 1.0) <= tol_length;
  const bool vol_ok = std::abs(sweep.volume.slope - n) <= tol_volume;
  return Json{{"points", points},
              {"fits",
               {{"neck_length", fit_json(sweep.length)},
                {"diam_upper", fit_json(sweep.diameter)},
                {"vol_Uprime", fit_json(sweep.volume)}}},
              {"expected", {{"neck_length", 1}, {"diam_upper", 1}, {"vol_Uprime", n}}},
              {"tolerance", {{"length", tol_length}, {"volume", tol_volume}}},
              {"slopes_ok", length_ok && diam_ok && vol_ok},
              {"all_certified", sweep.all_certified()}};
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "delta0,m,neck_length,diam_upper,vol_Uprime,r_inf,certified\n";
  for (const auto& p : sweep.points) {
    fmt::format_to(std::back_inserter(out), "{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                   p.delta0, p.m, p.neck_length, p.diam_upper, p.vol_Uprime, p.r_inf,
                   p.certified ? 1 : 0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 56.0;
constexpr double kBottom = 56.0;

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

Frame frame_for(const std::vector<std::pair<double, double>>& pts) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& [x, y] : pts) {
    f.x0 = std::min(f.x0, x);
    f.x1 = std::max(f.x1, x);
    f.y0 = std::min(f.y0, y);
    f.y1 = std::max(f.y1, y);
  }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1.0;
  const double pad = 0.04 * (f.y1 - f.y0);
  f.y0 -= pad;
  f.y1 += pad;
  return f;
}

// At most ~max_points, always keeping the last point.
std::vector<std::pair<double, double>> thin(const std::vector<std::pair<double, double>>& pts,
                                            std::size_t max_points = 2000) {
  if (pts.size() <= max_points) return pts;
  const std::size_t stride = (pts.size() + max_points - 1) / max_points;
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < pts.size(); i += stride) out.push_back(pts[i]);
  if (out.back() != pts.back()) out.push_back(pts.back());
  return out;
}

std::string open_svg(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2:.1f}\" y=\"22\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kLeft, title);
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string out = fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n",
                   f.px(x), kHeight - kBottom + 16.0, x);
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                   kLeft - 6.0, f.py(y) + 4.0, y);
  }
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                 0.5 * (kLeft + kWidth - kRight), kHeight - 14.0, xlabel);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"16\" y=\"{:.1f}\" transform=\"rotate(-90 16 {:.1f})\" "
                 "text-anchor=\"middle\">{}</text>\n",
                 0.5 * (kTop + kHeight - kBottom), 0.5 * (kTop + kHeight - kBottom), ylabel);
  return out;
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts,
                     const std::string& color, double width = 1.5) {
  std::string out = fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"",
                                color, width);
  for (const auto& [x, y] : thin(pts)) {
    fmt::format_to(std::back_inserter(out), "{:.2f},{:.2f} ", f.px(x), f.py(y));
  }
  out += "\"/>\n";
  return out;
}

std::string annotation(const NeckProfile& neck) {
  return fmt::format(
      "<text x=\"{:.1f}\" y=\"42\">delta0 = {:.6g}, theta_bar = {:.6g}, r_inf = {:.6g}, m = {}</text>\n",
      kLeft, neck.model.delta0, neck.plan.theta_bar, neck.r_inf, neck.plan.m());
}

}  // namespace

std::string profile_svg(const NeckProfile& neck) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : neck.samples.points) pts.emplace_back(p.state.t, p.state.r);
  const Frame f = frame_for(pts);
  std::string out = open_svg("neck profile (t, r)");
  out += annotation(neck);
  out += axes(f, "t", "r");
  out += polyline(f, pts, "#1f4e9c", 2.0);
  out += "</svg>\n";
  return out;
}

std::string curvature_svg(const NeckProfile& neck) {
  // Both curves are drawn against s, which is flat where the bend piles up;
  // the segment index is a readable alternative abscissa.
  std::vector<std::pair<double, double>> smooth;
  for (const auto& p : neck.samples.points) {
    if (p.k > 0.0) {
      smooth.emplace_back(static_cast<double>(p.segment) + p.offset / neck.smoothed.segment_lengths()[p.segment],
                          std::log10(p.k));
    }
  }
  std::vector<std::pair<double, double>> plan;
  const auto segs = neck.plan.segments();
  for (std::size_t j = 0; j < segs.size(); ++j) {
    if (segs[j].k > 0.0) {
      plan.emplace_back(static_cast<double>(j), std::log10(segs[j].k));
      plan.emplace_back(static_cast<double>(j + 1), std::log10(segs[j].k));
    }
  }
  auto all = smooth;
  all.insert(all.end(), plan.begin(), plan.end());
  const Frame f = frame_for(all);
  std::string out = open_svg("geodesic curvature, log10 k");
  out += annotation(neck);
  out += axes(f, "segment index + offset / segment length", "log10 k");
  out += polyline(f, plan, "#b0b0b0", 3.0);
  out += polyline(f, smooth, "#c0392b", 1.2);
  out += "</svg>\n";
  return out;
}

std::string sweep_svg(const SweepResult& sweep) {
  std::vector<std::pair<double, double>> len, diam, vol;
  for (const auto& p : sweep.points) {
    const double x = std::log10(p.delta0);
    len.emplace_back(x, std::log10(p.neck_length));
    diam.emplace_back(x, std::log10(p.diam_upper));
    vol.emplace_back(x, std::log10(p.vol_Uprime));
  }
  auto all = len;
  all.insert(all.end(), diam.begin(), diam.end());
  all.insert(all.end(), vol.begin(), vol.end());
  const Frame f = frame_for(all);
  std::string out = open_svg("scaling against delta0 (log10)");
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{:.1f}\" y=\"42\">slopes: S {:.5f}, diam {:.5f}, vol {:.5f}</text>\n",
                 kLeft, sweep.length.slope, sweep.diameter.slope, sweep.volume.slope);
  out += axes(f, "log10 delta0", "log10 value");
  const std::pair<const char*, const std::vector<std::pair<double, double>>*> series[] = {
      {"#1f4e9c", &len}, {"#27864a", &diam}, {"#c0392b", &vol}};
  for (const auto& [color, pts] : series) {
    out += polyline(f, *pts, color);
    for (const auto& [x, y] : *pts) {
      fmt::format_to(std::back_inserter(out), "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n",
                     f.px(x), f.py(y), color);
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace gltunnel::output

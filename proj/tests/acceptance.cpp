// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gltunnel/assembly.hpp"
#include "gltunnel/bend_planner.hpp"
#include "gltunnel/curvature.hpp"
#include "gltunnel/smoother.hpp"

using namespace gltunnel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  fmt::print("[{}] {:>2} {}: {}\n", o.passed ? "PASS" : "FAIL", id, title, o.detail);
  std::fflush(stdout);
  if (!o.passed) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AmbientModel flat_model(double delta0) {
  AmbientModel m = AmbientModel::flat(3, delta0);
  m.delta = 2 * delta0;
  return m;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const NeckProfile neck = build_neck(flat_model(0.1));
  const double elapsed = seconds_since(t0);
  const double pw = neck.certification.margin_piecewise.min_margin;
  const double sm = neck.certification.margin_smoothed.min_margin;
  Outcome o;
  o.passed = pw > 0.0 && sm > 0.0 && elapsed < 5.0;
  o.detail = fmt::format("min margin piecewise {:.6g}, smoothed {:.6g}, runtime {:.3f} s", pw, sm, elapsed);
  return o;
}

Outcome criterion2() {
  const NeckProfile neck = build_neck(flat_model(0.1));
  const CurveSamples dense =
      integrate_profile(neck.smoothed, neck.plan.initial_state(), neck.step / 10, {100});
  Outcome o;
  std::string mins;
  for (int n = 3; n <= 7; ++n) {
    const double lo = std::min(min_kappa_exact(neck.samples, 1, n), min_kappa_exact(dense, 1, n));
    if (!(lo > 0.0)) o.passed = false;
    mins += fmt::format("{}{}:{:.4g}", mins.empty() ? "" : " ", n, lo);
  }

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t bad = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const int n = 3 + static_cast<int>(unit(rng) * 8);
    const double r = std::pow(10.0, -8.0 + 8.0 * unit(rng));
    const double th = kHalfPi * (1e-9 + (1 - 1e-9) * unit(rng));
    const double k = unit(rng) * std::sin(th) / (4 * r);
    const CurveState s{0, 0, r, th};
    if (!(lemma_margin(s, k) > 0.0)) continue;
    if (!(kappa_exact_flat(s, k, n) > 0.0)) ++bad;
  }
  if (bad) o.passed = false;
  o.detail = fmt::format("min kappa_exact over s >= s0 by n [{}]; implication violations {}/{}", mins, bad, trials);
  return o;
}

struct GridPoint {
  double delta0, theta_bar;
};

std::vector<GridPoint> plan_grid() {
  std::vector<GridPoint> g;
  for (double d : {0.2, 0.1, 0.05, 0.02}) {
    for (double tb : {0.95, 1.1, 1.25, 1.4, 1.49}) g.push_back({d, tb});
  }
  return g;
}

Outcome criterion3() {
  Outcome o;
  int ratio_bad = 0, ratio_bad_truncated = 0, length_bad = 0;
  double worst = -1.0;
  GridPoint worst_at{};
  for (const auto& gp : plan_grid()) {
    const BendPlan plan = build_plan(flat_model(gp.delta0), {gp.theta_bar});
    const double C = contraction_constant(gp.theta_bar);
    const auto& knots = plan.knots();
    const std::size_t m = plan.m();
    // knots[1] is (s0, r0); knots[1 + i] ends inductive segment i.
    for (std::size_t i = 1; i <= m; ++i) {
      const double ratio = knots[1 + i].r / knots[i].r;
      if (ratio > C + 1e-12) {
        ++ratio_bad;
        if (plan.bend.segments[i - 1].truncated) ++ratio_bad_truncated;
        if (ratio - C > worst) {
          worst = ratio - C;
          worst_at = gp;
        }
      }
    }
    const double s_m = knots[1 + m].s;
    if (s_m > plan.s0() + knots[1].r / (2 * (1 - C)) + 1e-12) ++length_bad;
  }
  o.passed = ratio_bad == 0 && length_bad == 0;
  o.detail = fmt::format("{} plans; radius ratio violations {} ({} on the truncated last step", plan_grid().size(),
                         ratio_bad, ratio_bad_truncated);
  if (ratio_bad) {
    o.detail += fmt::format(", worst excess {:.4f} at delta0={} theta_bar={}", worst, worst_at.delta0,
                            worst_at.theta_bar);
  }
  o.detail += fmt::format("); length bound violations {}", length_bad);
  return o;
}

Outcome criterion4() {
  Outcome o;
  int bad = 0, checked = 0;
  double min_slack = INFINITY;
  for (const auto& gp : plan_grid()) {
    const BendPlan plan = build_plan(flat_model(gp.delta0), {gp.theta_bar});
    const double floor = std::sin(plan.theta0()) / 16;
    const auto& knots = plan.knots();
    for (std::size_t i = 1; i <= plan.m(); ++i) {
      if (plan.bend.segments[i - 1].truncated) continue;
      ++checked;
      const double slack = knots[1 + i].theta - knots[i].theta - floor;
      min_slack = std::min(min_slack, slack);
      if (slack < -1e-12) ++bad;
    }
  }
  o.passed = bad == 0 && checked > 0;
  o.detail = fmt::format("{} untruncated segments, violations {}, min slack {:.3g}", checked, bad, min_slack);
  return o;
}

Outcome criterion5() {
  const NeckProfile neck = build_neck(flat_model(0.1));
  const auto cert = verify_smoothed(neck.plan, neck.smoothed, neck.step);
  const double e_int = std::abs(cert.integral_k - kHalfPi);
  const double e_close = std::abs(cert.theta_closure - kHalfPi);
  const double e_theta = cert.sup_theta_dev - cert.l1_deviation;
  Outcome o;
  o.passed = e_int <= 1e-9 && e_close <= 1e-9 && e_theta <= 1e-9 && cert.tail_r_variation <= 1e-12;
  o.detail = fmt::format(
      "|int k - pi/2| {:.3g}, |theta(S) - pi/2| {:.3g}, sup|dtheta| {:.3g} <= l1 {:.3g}, tail r variation {:.3g}",
      e_int, e_close, cert.sup_theta_dev, cert.l1_deviation, cert.tail_r_variation);
  return o;
}

// Natural cubic spline through (j, y_j), j = 0..N-1.
class CubicSpline {
 public:
  explicit CubicSpline(std::vector<double> y) : y_(std::move(y)), m_(y_.size(), 0.0) {
    const auto n = static_cast<Eigen::Index>(y_.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    A(0, 0) = A(n - 1, n - 1) = 1.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      A(i, i - 1) = 1.0;
      A(i, i) = 4.0;
      A(i, i + 1) = 1.0;
      b(i) = 6.0 * (y_[i + 1] - 2 * y_[i] + y_[i - 1]);
    }
    const Eigen::VectorXd sol = A.partialPivLu().solve(b);
    for (Eigen::Index i = 0; i < n; ++i) m_[i] = sol(i);
  }
  double value(double t) const {
    const auto [i, u] = locate(t);
    const double a = 1 - u;
    return a * y_[i] + u * y_[i + 1] + ((a * a * a - a) * m_[i] + (u * u * u - u) * m_[i + 1]) / 6.0;
  }
  double d1(double t) const {
    const auto [i, u] = locate(t);
    const double a = 1 - u;
    return y_[i + 1] - y_[i] + (-(3 * a * a - 1) * m_[i] + (3 * u * u - 1) * m_[i + 1]) / 6.0;
  }
  double d2(double t) const {
    const auto [i, u] = locate(t);
    return (1 - u) * m_[i] + u * m_[i + 1];
  }

 private:
  std::pair<std::size_t, double> locate(double t) const {
    auto i = static_cast<std::size_t>(std::floor(t));
    i = std::min(i, y_.size() - 2);
    return {i, t - static_cast<double>(i)};
  }
  std::vector<double> y_;
  std::vector<double> m_;
};

Outcome criterion6() {
  double worst_closed = 0.0;
  for (int n = 3; n <= 7; ++n) {
    for (double rho : {1e-3, 0.1, 1.0, 7.0}) {
      const double cyl = (n - 1.0) * (n - 2.0) / (rho * rho);
      worst_closed = std::max(worst_closed, std::abs(kappa_warped(rho, 0.0, 0.0, n) / cyl - 1));
      for (double x : {0.1, 0.7, 1.3}) {
        // Round sphere of radius R = rho: rho(t) = R sin(t/R).
        const double t = x * rho;
        const double v = rho * std::sin(t / rho), d = std::cos(t / rho), dd = -std::sin(t / rho) / rho;
        const double sph = n * (n - 1.0) / (rho * rho);
        worst_closed = std::max(worst_closed, std::abs(kappa_warped(v, d, dd, n) / sph - 1));
      }
    }
  }

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_fd = 0.0;
  const double h = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(8);
    for (auto& v : y) v = 0.5 + unit(rng);
    const CubicSpline rho(y);
    const int n = 3 + trial % 5;
    for (int j = 0; j < 7; ++j) {
      // Inside a spline piece the central differences are exact up to rounding.
      const double t = j + 0.2 + 0.6 * unit(rng);
      const double v = rho.value(t);
      const double d = (rho.value(t + h) - rho.value(t - h)) / (2 * h);
      const double dd = (rho.value(t + h) - 2 * v + rho.value(t - h)) / (h * h);
      const double fd = kappa_warped(v, d, dd, n);
      const double an = kappa_warped(rho, t, n);
      const double scale = std::max(std::abs(an), (n - 1.0) / (v * v));
      worst_fd = std::max(worst_fd, std::abs(fd - an) / scale);
    }
  }
  Outcome o;
  o.passed = worst_closed <= 1e-10 && worst_fd <= 1e-6;
  o.detail = fmt::format("closed forms max rel err {:.3g}; 100 random splines vs finite differences max rel err {:.3g}",
                         worst_closed, worst_fd);
  return o;
}

Outcome criterion7() {
  AmbientModel m = flat_model(0.1);
  m.c_metric = 1.0;
  const NeckProfile neck = build_neck(m);
  Outcome o;
  const auto& blend = neck.certification.blend;
  o.passed = blend.has_value() && blend->positive && neck.certification.blend_spec.q > 0.0;
  o.detail = blend ? fmt::format("c_metric=1: q={:.3g}, eps={:.3g}, min kappa {:.6g}", neck.certification.blend_spec.q,
                                 neck.r_inf, blend->min_kappa)
                   : "c_metric=1: " + neck.certification.blend_error;

  // c_metric = 10 at the worst admissible radius epsilon = delta0/2: largest
  // grid value below which every tested delta0 is positive.
  const std::vector<double> grid{0.1, 0.05, 0.025, 0.0125};
  std::vector<bool> ok;
  std::string mins;
  for (double d0 : grid) {
    const double eps = d0 / 2;
    const auto res = evaluate_end_blend({0.0, d0, eps, 10.0 * eps * eps, 10.0}, 3);
    ok.push_back(res.positive);
    mins += fmt::format("{}{:.4g}", mins.empty() ? "" : ",", res.min_kappa * eps * eps);
  }
  std::optional<double> star;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool rest = true;
    for (std::size_t j = i; j < grid.size(); ++j) rest = rest && ok[j];
    if (rest) {
      star = grid[i];
      break;
    }
  }
  if (!star) o.passed = false;
  o.detail += fmt::format("; c_metric=10, eps=delta0/2: min kappa*eps^2 [{}], ", mins);
  o.detail += star ? fmt::format("positive for all delta0 <= {}", *star) : "no delta0* in grid";
  return o;
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> grid{0.1, 0.05, 0.025, 0.0125};
  const SweepResult sw = scaling_sweep(flat_model(0.1), grid);
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.passed = std::abs(sw.volume.slope - 3) <= 0.05 && std::abs(sw.length.slope - 1) <= 0.02 &&
             std::abs(sw.diameter.slope - 1) <= 0.02 && elapsed < 30.0;
  o.detail = fmt::format("slopes vol {:.6f}, length {:.6f}, diam {:.6f}; all certified {}; runtime {:.2f} s",
                         sw.volume.slope, sw.length.slope, sw.diameter.slope, sw.all_certified(), elapsed);
  return o;
}

Outcome criterion9() {
  const AmbientModel m = flat_model(0.02);
  const NeckProfile neck = build_neck(m);
  Outcome o;
  double worst_len = 0.0, min_slack = INFINITY;
  std::optional<double> constant;
  double worst_bound = 0.0;
  std::string ratios;
  for (double L : {0.5, 1.0, 2.0}) {
    const Tunnel tunnel = telescope(neck, neck, L);
    const SizeReport rep = measure(tunnel);
    worst_len = std::max(worst_len, std::abs(rep.dist_collars - L) / L);
    const auto nb = neighborhood_check(tunnel);
    min_slack = std::min(min_slack, nb.slack - std::numbers::pi * m.delta);
    if (!nb.passed) o.passed = false;
    const double per = rep.vol_U / (L * m.delta * m.delta);
    if (!constant) constant = per;
    worst_bound = std::max(worst_bound, per / *constant);
    ratios += fmt::format("{}{:.4g}", ratios.empty() ? "" : ",", per);
  }
  if (worst_len > 1e-10 || min_slack < 0.0 || worst_bound > 1.05) o.passed = false;
  o.detail = fmt::format(
      "max |dist - L|/L {:.3g}; min slack - pi delta {:.4g}; vol_U/(L delta^2) [{}], max over fitted constant {:.4f}",
      worst_len, min_slack, ratios, worst_bound);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "gltunnel_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << fmt::format("{{\"output_dir\": \"{}\", \"delta0_grid\": [0.1, 0.05]}}\n",
                                    (dir / "out").string());

  const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"build", {"curve.csv", "certificate.json"}}, {"sweep", {"sweep.csv", "sweep.json"}}};
  std::size_t compared = 0;
  for (const auto& [cmd, files] : runs) {
    std::vector<std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      const std::string line =
          fmt::format("\"{}\" {} --quiet --config \"{}\"", GLTUNNEL_CLI_PATH, cmd, cfg.string());
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        o.passed = false;
        o.detail = fmt::format("{} exited with status {}", cmd, status);
        return o;
      }
      for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string bytes = slurp(dir / "out" / files[i]);
        if (pass == 0) {
          first.push_back(bytes);
        } else {
          ++compared;
          if (bytes.empty() || bytes != first[i]) {
            o.passed = false;
            o.detail += files[i] + " differs; ";
          }
        }
      }
    }
  }
  if (o.passed) o.detail = fmt::format("{} files byte-identical across two runs", compared);
  return o;
}

void guarded(int id, const std::string& title, const std::function<Outcome()>& fn) {
  try {
    report(id, title, fn());
  } catch (const std::exception& e) {
    report(id, title, {false, std::string("exception: ") + e.what()});
  }
}

}  // namespace

int main() {
  guarded(1, "condition margin on default neck", criterion1);
  guarded(2, "exact scalar curvature positive", criterion2);
  guarded(3, "radius contraction and length bound", criterion3);
  guarded(4, "angle increments", criterion4);
  guarded(5, "smoothing contract", criterion5);
  guarded(6, "warped product oracle", criterion6);
  guarded(7, "end blend positivity", criterion7);
  guarded(8, "scaling exponents", criterion8);
  guarded(9, "telescoping", criterion9);
  guarded(10, "determinism", criterion10);
  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}

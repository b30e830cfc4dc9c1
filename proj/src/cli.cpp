#include "gltunnel/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include "gltunnel/error.hpp"
#include "gltunnel/output.hpp"

namespace gltunnel::cli {

namespace {

const std::set<std::string> kKeys = {
    "n", "kappa_D_min", "ric_sup", "c1", "c2", "c_metric", "delta", "delta0", "safety_factor",
    "theta_bar", "window_position", "eta", "drop_fraction", "margin", "audit_step", "L",
    "cylinder_length", "delta0_grid", "sweep_tolerance_length", "sweep_tolerance_volume",
    "output_dir"};

double number(const nlohmann::json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", key));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(fmt::format("{}: must be finite", key));
  return x;
}

std::optional<double> optional_number(const nlohmann::json& doc, const std::string& key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return number(doc, key, 0.0);
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) throw ConfigError(fmt::format("{}: unknown key", key));
  }

  RunConfig c;
  auto& m = c.model;
  if (doc.contains("n")) {
    const auto& v = doc.at("n");
    require(v.is_number_integer(), "n", "expected an integer");
    m.n = v.get<int>();
  }
  m.kappa_D_min = number(doc, "kappa_D_min", m.kappa_D_min);
  m.ric_sup = number(doc, "ric_sup", m.ric_sup);
  m.c1 = number(doc, "c1", m.c1);
  m.c2 = number(doc, "c2", m.c2);
  m.c_metric = number(doc, "c_metric", m.c_metric);
  m.delta = number(doc, "delta", m.delta);
  m.delta0 = number(doc, "delta0", m.delta0);
  m.safety_factor = number(doc, "safety_factor", m.safety_factor);
  try {
    m.validate();
  } catch (const TunnelError& e) {
    throw ConfigError(e.what());
  }

  auto& plan = c.neck.plan;
  plan.theta_bar = number(doc, "theta_bar", plan.theta_bar);
  require(std::sin(plan.theta_bar) > 0.8,
          "theta_bar",
          fmt::format("sin(theta_bar) = {:.6g} must exceed 4/5, otherwise the closing-arc window "
                      "(1 - sin theta_bar, sin theta_bar / 4) is empty",
                      std::sin(plan.theta_bar)));
  require(plan.theta_bar < std::numbers::pi / 2.0, "theta_bar", "must be below pi/2");
  plan.window_position = number(doc, "window_position", plan.window_position);
  require(plan.window_position > 0.0 && plan.window_position < 1.0, "window_position",
          "must lie in (0, 1)");
  plan.margin = number(doc, "margin", plan.margin);
  require(plan.margin >= 0.0, "margin", "must be >= 0");

  auto& sm = c.neck.smoothing;
  sm.eta = optional_number(doc, "eta");
  require(!sm.eta || *sm.eta > 0.0, "eta", "must be > 0");
  sm.drop_fraction = number(doc, "drop_fraction", sm.drop_fraction);
  require(sm.drop_fraction > 0.0 && sm.drop_fraction <= 1.0, "drop_fraction", "must lie in (0, 1]");

  c.neck.audit_step = optional_number(doc, "audit_step");
  require(!c.neck.audit_step || *c.neck.audit_step > 0.0, "audit_step", "must be > 0");

  c.L = optional_number(doc, "L");
  require(!c.L || *c.L > 0.0, "L", "must be > 0");
  c.cylinder_length = number(doc, "cylinder_length", c.cylinder_length);
  require(c.cylinder_length >= 0.0, "cylinder_length", "must be >= 0");

  if (doc.contains("delta0_grid") && !doc.at("delta0_grid").is_null()) {
    const auto& grid = doc.at("delta0_grid");
    require(grid.is_array(), "delta0_grid", "expected an array of numbers");
    for (const auto& v : grid) {
      require(v.is_number(), "delta0_grid", "expected an array of numbers");
      const double d = v.get<double>();
      require(std::isfinite(d) && d > 0.0, "delta0_grid", "entries must be > 0");
      c.delta0_grid.push_back(d);
    }
  }
  c.sweep_tolerance_length = number(doc, "sweep_tolerance_length", c.sweep_tolerance_length);
  c.sweep_tolerance_volume = number(doc, "sweep_tolerance_volume", c.sweep_tolerance_volume);
  require(c.sweep_tolerance_length > 0.0, "sweep_tolerance_length", "must be > 0");
  require(c.sweep_tolerance_volume > 0.0, "sweep_tolerance_volume", "must be > 0");

  if (doc.contains("output_dir")) {
    require(doc.at("output_dir").is_string(), "output_dir", "expected a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open {}", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  return parse_config(doc);
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
  ordered_json out;
  out["n"] = c.model.n;
  out["kappa_D_min"] = c.model.kappa_D_min;
  out["ric_sup"] = c.model.ric_sup;
  out["c1"] = c.model.c1;
  out["c2"] = c.model.c2;
  out["c_metric"] = c.model.c_metric;
  out["delta"] = c.model.delta;
  out["delta0"] = c.model.delta0;
  out["safety_factor"] = c.model.safety_factor;
  out["theta_bar"] = c.neck.plan.theta_bar;
  out["window_position"] = c.neck.plan.window_position;
  out["eta"] = opt(c.neck.smoothing.eta);
  out["drop_fraction"] = c.neck.smoothing.drop_fraction;
  out["margin"] = c.neck.plan.margin;
  out["audit_step"] = opt(c.neck.audit_step);
  out["L"] = opt(c.L);
  out["cylinder_length"] = c.cylinder_length;
  out["delta0_grid"] = c.delta0_grid;
  out["sweep_tolerance_length"] = c.sweep_tolerance_length;
  out["sweep_tolerance_volume"] = c.sweep_tolerance_volume;
  out["output_dir"] = c.output_dir;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::filesystem::path prepare_dir(const RunConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json(const std::filesystem::path& path, const output::Json& j) {
  output::write_atomic(path, j.dump(2) + "\n");
}

int report_neck(const NeckProfile& neck) {
  const auto& f = neck.certification.failures;
  if (f.empty()) return kCertified;
  std::cerr << "certification failed: " << f.front();
  if (f.front() == "end_blend" && !neck.certification.blend_error.empty()) {
    std::cerr << " (" << neck.certification.blend_error << ")";
  }
  std::cerr << "\n";
  return kFailed;
}

}  // namespace

int cmd_build(const RunConfig& config, bool quiet) {
  const NeckProfile neck = build_neck(config.model, config.neck);
  const auto dir = prepare_dir(config);
  output::write_atomic(dir / "curve.csv", output::curve_csv(neck.samples, config.model));
  write_json(dir / "certificate.json", output::certificate_json(neck, config_to_json(config)));
  output::write_atomic(dir / "profile.svg", output::profile_svg(neck));
  output::write_atomic(dir / "curvature.svg", output::curvature_svg(neck));
  if (!quiet) {
    fmt::print("s0 = {:.6g}, m = {}, S = {:.10g}, r_inf = {:.6g}\n", neck.plan.s0(), neck.plan.m(),
               neck.length(), neck.r_inf);
    fmt::print("min condition margin (smoothed) = {:.6g}, min kappa_exact = {:.6g}\n",
               neck.certification.margin_smoothed.min_margin, neck.certification.min_kappa_exact);
    fmt::print("certified: {}\n", neck.certification.certified() ? "yes" : "no");
  }
  return report_neck(neck);
}

namespace {

int write_size(const RunConfig& config, const Tunnel& tunnel, const std::string& name, bool quiet,
               output::Json extra = output::Json::object()) {
  const SizeReport size = measure(tunnel);
  const NeighborhoodResult hood = neighborhood_check(tunnel);
  output::Json j = output::size_report_json(size, hood);
  for (auto& [k, v] : extra.items()) j[k] = v;
  j["config"] = config_to_json(config);
  const auto dir = prepare_dir(config);
  write_json(dir / name, j);
  if (!quiet) {
    fmt::print("dist_collars = {:.10g}, diam_upper = {:.10g}, vol_Uprime = {:.6g}, vol_U = {:.6g}\n",
               size.dist_collars, size.diam_upper, size.vol_Uprime, size.vol_U);
    fmt::print("neighborhood slack = {:.6g}, certified: {}\n", hood.slack,
               size.certified ? "yes" : "no");
  }
  const int code = report_neck(tunnel.neck1);
  if (code != kCertified) return code;
  if (!size.certified) {
    std::cerr << "certification failed: size report\n";
    return kFailed;
  }
  if (!hood.passed) {
    std::cerr << "certification failed: neighborhood_check\n";
    return kFailed;
  }
  return kCertified;
}

}  // namespace

int cmd_measure(const RunConfig& config, bool quiet) {
  const NeckProfile neck = build_neck(config.model, config.neck);
  const Tunnel tunnel = config.L ? telescope(neck, neck, *config.L)
                                 : assemble(neck, neck, config.cylinder_length);
  return write_size(config, tunnel, "size_report.json", quiet);
}

int cmd_telescope(const RunConfig& config, bool quiet) {
  if (!config.L) throw ConfigError("L: required by telescope");
  const NeckProfile neck = build_neck(config.model, config.neck);
  const Tunnel tunnel = telescope(neck, neck, *config.L);
  // The construction wants the l = 0 tunnel to be small against L.
  const SizeReport bare = measure(assemble(neck, neck, 0.0));
  output::Json extra{{"L", *config.L},
                     {"diam_upper_at_l0", bare.diam_upper},
                     {"diam_at_l0_below_half_L", bare.diam_upper < 0.5 * *config.L}};
  return write_size(config, tunnel, "telescope.json", quiet, extra);
}

int cmd_sweep(const RunConfig& config, bool quiet) {
  if (config.delta0_grid.size() < 2) {
    throw ConfigError("delta0_grid: sweep needs at least two values");
  }
  const SweepResult sweep = scaling_sweep(config.model, config.delta0_grid, config.neck);
  const auto dir = prepare_dir(config);
  const auto j = output::sweep_json(sweep, config.sweep_tolerance_length,
                                    config.sweep_tolerance_volume, config.model.n);
  auto full = j;
  full["config"] = config_to_json(config);
  output::write_atomic(dir / "sweep.csv", output::sweep_csv(sweep));
  write_json(dir / "sweep.json", full);
  output::write_atomic(dir / "sweep.svg", output::sweep_svg(sweep));
  if (!quiet) {
    fmt::print("slopes: S {:.6f}, diam_upper {:.6f}, vol_Uprime {:.6f} (expected 1, 1, {})\n",
               sweep.length.slope, sweep.diameter.slope, sweep.volume.slope, config.model.n);
  }
  for (const auto& p : sweep.points) {
    if (!p.certified) {
      std::cerr << fmt::format("certification failed at delta0 = {}: {}\n", p.delta0,
                               p.failures.empty() ? "size report" : p.failures.front());
      return kFailed;
    }
  }
  if (!j.at("slopes_ok").get<bool>()) {
    std::cerr << "scaling slopes outside tolerance\n";
    return kFailed;
  }
  return kCertified;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Gromov-Lawson tunnel construction and certification"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string out;
    double audit_step = 0.0;
    bool quiet = false;
  };
  Flags flags;
  auto add = [&app, &flags](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file (defaults when omitted)");
    sub->add_option("--out", flags.out, "output directory, overrides output_dir");
    sub->add_option("--audit-step", flags.audit_step, "nominal sample spacing, overrides audit_step")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", flags.quiet, "no summary on stdout");
    return sub;
  };
  auto* build = add("build", "build, smooth and certify one neck; write curve, certificate, plots");
  auto* meas = add("measure", "assemble a tunnel and write its size report");
  auto* sweep = add("sweep", "scaling sweep over delta0_grid");
  auto* tele = add("telescope", "telescope a tunnel to collar distance L");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  RunConfig config;
  try {
    config = flags.config.empty() ? parse_config(nlohmann::json::object()) : load_config(flags.config);
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (flags.audit_step > 0.0) config.neck.audit_step = flags.audit_step;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (build->parsed()) return cmd_build(config, flags.quiet);
    if (meas->parsed()) return cmd_measure(config, flags.quiet);
    if (sweep->parsed()) return cmd_sweep(config, flags.quiet);
    if (tele->parsed()) return cmd_telescope(config, flags.quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TunnelError& e) {
    std::cerr << e.what() << "\n";
    // Parameters that only turn out infeasible once the plan exists.
    const bool config = e.code() == ErrorCode::EtaTooLarge || e.code() == ErrorCode::ThetaBarTooSmall;
    return config ? kConfigError : kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kConfigError;
}

}  // namespace gltunnel::cli

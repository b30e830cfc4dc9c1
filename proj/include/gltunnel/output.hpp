#pragma once

// File writers shared by the command line front end. Everything here is a
// pure function of its inputs so identical runs give identical bytes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gltunnel/assembly.hpp"

namespace gltunnel::output {

using Json = nlohmann::ordered_json;

/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// s,t,r,theta,k,kappa_exact_flat,kappa_lower_bound,condition_margin
std::string curve_csv(const CurveSamples& samples, const AmbientModel& model);

Json certificate_json(const NeckProfile& neck, const Json& config);
Json size_report_json(const SizeReport& size, const NeighborhoodResult& hood);
Json sweep_json(const SweepResult& sweep, double tol_length, double tol_volume, int n);
std::string sweep_csv(const SweepResult& sweep);

/// (t, r) profile of the neck.
std::string profile_svg(const NeckProfile& neck);
/// log10 k against s, piecewise plan and smoothed profile.
std::string curvature_svg(const NeckProfile& neck);
/// log-log plot of S, diam_upper and vol_Uprime against delta0.
std::string sweep_svg(const SweepResult& sweep);

}  // namespace gltunnel::output

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Text formats: spectrum CSV, time-series manifest, concentration series, and
// the JSON run configuration.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/isotherm.hpp"
#include "thinfilm/lamp.hpp"
#include "thinfilm/legacy.hpp"
#include "thinfilm/lod.hpp"

namespace thinfilm::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view spectrum_header = "wavelength_nm,reflectance";
inline constexpr std::string_view manifest_header = "timestamp_s,path,is_reference";
inline constexpr std::string_view series_header = "concentration,unit,response";

// Shortest-safe round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

namespace detail {

// Lines without their LF / CRLF terminator; a leading UTF-8 BOM is dropped.
inline std::vector<std::string> split_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (line.ends_with('\r')) line.remove_suffix(1);
    lines.emplace_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.starts_with('+')) s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what);
}

inline void expect_header(const std::vector<std::string>& lines, std::string_view header, const std::string& source) {
  if (lines.empty()) parse_fail(source, 1, "empty file, expected header '" + std::string(header) + "'");
  if (lines.front() != header)
    parse_fail(source, 1, "expected header '" + std::string(header) + "', found '" + lines.front() + "'");
}

}  // namespace detail

inline film::Spectrum parse_spectrum(std::string_view text, const std::string& source = "<spectrum>") {
  const auto lines = detail::split_lines(text);
  detail::expect_header(lines, spectrum_header, source);
  std::vector<double> wl, r;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_fields(lines[i]);
    if (fields.size() != 2) detail::parse_fail(source, i + 1, "expected 2 fields");
    const auto a = detail::parse_number(fields[0]);
    const auto b = detail::parse_number(fields[1]);
    if (!a || !b) detail::parse_fail(source, i + 1, "non-numeric value in '" + lines[i] + "'");
    wl.push_back(*a);
    r.push_back(*b);
  }
  try {
    return film::Spectrum(std::move(wl), std::move(r));
  } catch (const Error& e) {
    fail(ErrorKind::parse, source + ": " + e.what());
  }
}

inline std::string format_spectrum(const film::Spectrum& s) {
  std::string out(spectrum_header);
  out += '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += format_double(s.wavelengths_nm()[i]);
    out += ',';
    out += format_double(s.reflectance()[i]);
    out += '\n';
  }
  return out;
}

inline film::Spectrum read_spectrum(const fs::path& path) { return parse_spectrum(read_text(path), path.string()); }

inline void write_spectrum(const fs::path& path, const film::Spectrum& s) { write_text(path, format_spectrum(s)); }

struct ManifestEntry {
  double timestamp_s = 0.0;
  fs::path path;  // resolved against the manifest's directory
  bool is_reference = false;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::size_t reference_index = 0;
};

// Exactly one row is the reference; timestamps are non-decreasing.
inline Manifest parse_manifest(std::string_view text, const fs::path& base_dir, const std::string& source = "<manifest>") {
  const auto lines = detail::split_lines(text);
  detail::expect_header(lines, manifest_header, source);
  Manifest m;
  std::optional<std::size_t> ref;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_fields(lines[i]);
    if (fields.size() != 3) detail::parse_fail(source, i + 1, "expected 3 fields");
    const auto t = detail::parse_number(fields[0]);
    if (!t) detail::parse_fail(source, i + 1, "non-numeric timestamp");
    const auto p = detail::trim(fields[1]);
    if (p.empty()) detail::parse_fail(source, i + 1, "empty path");
    const auto flag = detail::trim(fields[2]);
    bool is_ref = false;
    if (flag == "1" || flag == "true") is_ref = true;
    else if (flag != "0" && flag != "false" && !flag.empty())
      detail::parse_fail(source, i + 1, "is_reference must be 0, 1, true or false");
    if (!m.entries.empty() && *t < m.entries.back().timestamp_s)
      detail::parse_fail(source, i + 1, "timestamps must be non-decreasing");
    if (is_ref) {
      if (ref) detail::parse_fail(source, i + 1, "more than one reference entry");
      ref = m.entries.size();
    }
    fs::path path{std::string(p)};
    if (path.is_relative()) path = base_dir / path;
    m.entries.push_back(ManifestEntry{*t, std::move(path), is_ref});
  }
  if (m.entries.empty()) fail(ErrorKind::parse, source + ": manifest has no entries");
  if (!ref) fail(ErrorKind::parse, source + ": manifest has no reference entry");
  m.reference_index = *ref;
  for (const auto& e : m.entries)
    if (!fs::exists(e.path)) fail(ErrorKind::io, source + ": spectrum '" + e.path.string() + "' does not exist");
  return m;
}

inline Manifest read_manifest(const fs::path& path) {
  return parse_manifest(read_text(path), path.parent_path(), path.string());
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out(manifest_header);
  out += '\n';
  for (const auto& e : entries)
    out += format_double(e.timestamp_s) + ',' + e.path.generic_string() + ',' + (e.is_reference ? "1" : "0") + '\n';
  return out;
}

inline isotherm::ConcentrationSeries parse_series(std::string_view text, isotherm::ConcentrationUnit display_unit,
                                                  const std::string& source = "<series>") {
  const auto lines = detail::split_lines(text);
  detail::expect_header(lines, series_header, source);
  std::vector<isotherm::ConcentrationSeries::Row> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_fields(lines[i]);
    if (fields.size() != 3) detail::parse_fail(source, i + 1, "expected 3 fields");
    const auto c = detail::parse_number(fields[0]);
    const auto y = detail::parse_number(fields[2]);
    if (!c || !y) detail::parse_fail(source, i + 1, "non-numeric value in '" + lines[i] + "'");
    isotherm::ConcentrationUnit unit{};
    try {
      unit = isotherm::parse_unit(std::string(detail::trim(fields[1])));
    } catch (const Error& e) {
      detail::parse_fail(source, i + 1, e.what());
    }
    rows.push_back({*c, unit, *y});
  }
  if (rows.empty()) fail(ErrorKind::parse, source + ": no data rows");
  return isotherm::ConcentrationSeries::from_rows(rows, display_unit);
}

inline isotherm::ConcentrationSeries read_series(const fs::path& path, isotherm::ConcentrationUnit display_unit) {
  return parse_series(read_text(path), display_unit, path.string());
}

// Everything a command may need, with defaults for every field.
struct RunConfig {
  film::FilmStack stack{};
  double wl_start_nm = 500.0;
  double wl_stop_nm = 800.0;
  double wl_step_nm = 0.5;
  grid::WavelengthRange range{};
  film::NoiseModel noise = film::NoiseModel::white(27.7, 0);
  bool calibrate_gradients = true;
  lod::GradientTargets gradient_targets{};
  legacy::RiftsConfig rifts{};
  legacy::IawConfig iaw{};
  lamp::LampConfig lamp{};
  std::size_t n_trials = 1000;
  double calibration_delta_n = 1e-3;
  double linearity_tolerance = 0.10;
  unsigned threads = 0;
  double simulate_delta_n = 0.0;
  bool simulate_noisy = true;
  std::optional<std::uint64_t> seed;

  std::vector<double> wavelengths() const { return film::uniform_wavelengths(wl_start_nm, wl_stop_nm, wl_step_nm); }

  void apply_range(const grid::WavelengthRange& r) {
    range = r;
    rifts.range = r;
    iaw.range = r;
    lamp.range = r;
  }

  lod::LodStudyConfig study(lod::Method method, std::uint64_t master_seed) const {
    lod::LodStudyConfig cfg;
    cfg.stack = stack;
    cfg.wavelengths = wavelengths();
    cfg.noise = noise;
    cfg.noise.seed = master_seed;
    cfg.n_trials = n_trials;
    cfg.calibration_delta_n = calibration_delta_n;
    cfg.linearity_tolerance = linearity_tolerance;
    cfg.method = method;
    cfg.rifts = rifts;
    cfg.iaw = iaw;
    cfg.lamp = lamp;
    cfg.threads = threads;
    if (calibrate_gradients) cfg = lod::calibrate_gradients(std::move(cfg), gradient_targets);
    return cfg;
  }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& key, const std::string& what) {
  fail(ErrorKind::argument, "config: '" + key + "' " + what);
}

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) config_fail(where, "must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto name : known) ok = ok || k == name;
    if (!ok) config_fail(where.empty() ? k : where + "." + k, "is not a recognized key");
  }
}

inline double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) config_fail(where + "." + key, "must be a number");
  return v.get<double>();
}

inline std::uint64_t get_unsigned(const json& obj, const std::string& where, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) config_fail(where + "." + key, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) config_fail(where + "." + key, "must be true or false");
  return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) config_fail(where + "." + key, "must be a string");
  return v.get<std::string>();
}

inline grid::Baseline parse_baseline(const std::string& s, const std::string& where) {
  if (s == "mean") return grid::Baseline::mean;
  if (s == "linear") return grid::Baseline::linear;
  if (s == "quadratic") return grid::Baseline::quadratic;
  config_fail(where, "must be mean, linear or quadratic");
}

inline const char* baseline_name(grid::Baseline b) {
  switch (b) {
    case grid::Baseline::mean: return "mean";
    case grid::Baseline::linear: return "linear";
    case grid::Baseline::quadratic: return "quadratic";
  }
  return "?";
}

}  // namespace detail

inline grid::WavelengthRange parse_range(std::string_view text) {
  const auto fields = detail::split_fields(text);
  if (fields.size() != 2) fail(ErrorKind::argument, "range must be 'lo,hi' in nm");
  const auto lo = detail::parse_number(fields[0]);
  const auto hi = detail::parse_number(fields[1]);
  if (!lo || !hi) fail(ErrorKind::argument, "range must be 'lo,hi' in nm");
  grid::WavelengthRange r{*lo, *hi};
  r.validate();
  return r;
}

inline RunConfig parse_run_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::argument, std::string("config: invalid JSON: ") + e.what());
  }
  using detail::get_bool;
  using detail::get_number;
  using detail::get_string;
  using detail::get_unsigned;
  detail::reject_unknown(root, "",
                         {"film", "wavelengths", "range", "noise", "gradients", "rifts", "iaw", "lamp", "lod",
                          "simulate", "seed"});
  RunConfig c;
  if (root.contains("film")) {
    const auto& f = root["film"];
    detail::reject_unknown(f, "film", {"ambient_index", "film_index", "thickness_nm", "substrate_index"});
    c.stack.ambient_index = get_number(f, "film", "ambient_index", c.stack.ambient_index);
    c.stack.film_index = get_number(f, "film", "film_index", c.stack.film_index);
    c.stack.film_thickness_nm = get_number(f, "film", "thickness_nm", c.stack.film_thickness_nm);
    if (f.contains("substrate_index")) {
      const auto& s = f["substrate_index"];
      if (s.is_number()) c.stack.substrate_index = {s.get<double>(), 0.0};
      else if (s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number())
        c.stack.substrate_index = {s[0].get<double>(), s[1].get<double>()};
      else detail::config_fail("film.substrate_index", "must be a number or [real, imag]");
    }
  }
  if (root.contains("wavelengths")) {
    const auto& w = root["wavelengths"];
    detail::reject_unknown(w, "wavelengths", {"start_nm", "stop_nm", "step_nm"});
    c.wl_start_nm = get_number(w, "wavelengths", "start_nm", c.wl_start_nm);
    c.wl_stop_nm = get_number(w, "wavelengths", "stop_nm", c.wl_stop_nm);
    c.wl_step_nm = get_number(w, "wavelengths", "step_nm", c.wl_step_nm);
  }
  if (root.contains("range")) {
    const auto& r = root["range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      detail::config_fail("range", "must be [lo_nm, hi_nm]");
    grid::WavelengthRange wr{r[0].get<double>(), r[1].get<double>()};
    wr.validate();
    c.apply_range(wr);
  }
  if (root.contains("noise")) {
    const auto& n = root["noise"];
    detail::reject_unknown(n, "noise", {"target_snr_db", "gaussian_sigma", "offset_ramp_magnitude", "amplitude_ramp_gain"});
    if (n.contains("target_snr_db") && n.contains("gaussian_sigma"))
      detail::config_fail("noise", "sets both target_snr_db and gaussian_sigma");
    if (n.contains("gaussian_sigma")) {
      c.noise.target_snr_db.reset();
      c.noise.gaussian_sigma = get_number(n, "noise", "gaussian_sigma", 0.0);
    } else if (n.contains("target_snr_db")) {
      c.noise.target_snr_db = get_number(n, "noise", "target_snr_db", 27.7);
    }
    c.noise.offset_ramp_magnitude = get_number(n, "noise", "offset_ramp_magnitude", 0.0);
    c.noise.amplitude_ramp_gain = get_number(n, "noise", "amplitude_ramp_gain", 0.0);
  }
  if (root.contains("gradients")) {
    const auto& g = root["gradients"];
    detail::reject_unknown(g, "gradients", {"calibrate", "offset_snr_db", "amplitude_snr_db"});
    c.calibrate_gradients = get_bool(g, "gradients", "calibrate", c.calibrate_gradients);
    c.gradient_targets.offset_snr_db = get_number(g, "gradients", "offset_snr_db", c.gradient_targets.offset_snr_db);
    c.gradient_targets.amplitude_snr_db =
        get_number(g, "gradients", "amplitude_snr_db", c.gradient_targets.amplitude_snr_db);
  }
  if (root.contains("rifts")) {
    const auto& r = root["rifts"];
    detail::reject_unknown(r, "rifts",
                           {"n_points", "pad_exponent", "low_cutoff_nm", "max_eot_nm", "refine_peak",
                            "spline_boundary", "baseline"});
    c.rifts.n_points = get_unsigned(r, "rifts", "n_points", c.rifts.n_points);
    c.rifts.pad_exponent = static_cast<unsigned>(get_unsigned(r, "rifts", "pad_exponent", c.rifts.pad_exponent));
    c.rifts.low_cutoff_nm = get_number(r, "rifts", "low_cutoff_nm", c.rifts.low_cutoff_nm);
    c.rifts.max_eot_nm = get_number(r, "rifts", "max_eot_nm", c.rifts.max_eot_nm);
    c.rifts.refine_peak = get_bool(r, "rifts", "refine_peak", c.rifts.refine_peak);
    const auto boundary = get_string(r, "rifts", "spline_boundary", "not_a_knot");
    if (boundary == "not_a_knot") c.rifts.spline_boundary = grid::SplineBoundary::not_a_knot;
    else if (boundary == "natural") c.rifts.spline_boundary = grid::SplineBoundary::natural;
    else detail::config_fail("rifts.spline_boundary", "must be not_a_knot or natural");
    c.rifts.baseline = detail::parse_baseline(get_string(r, "rifts", "baseline", "mean"), "rifts.baseline");
  }
  if (root.contains("iaw")) {
    const auto& i = root["iaw"];
    detail::reject_unknown(i, "iaw", {"rule"});
    const auto rule = get_string(i, "iaw", "rule", "mean_abs");
    if (rule == "mean_abs") c.iaw.rule = legacy::IawRule::mean_abs;
    else if (rule == "sum_abs") c.iaw.rule = legacy::IawRule::sum_abs;
    else detail::config_fail("iaw.rule", "must be mean_abs or sum_abs");
  }
  if (root.contains("lamp")) {
    const auto& l = root["lamp"];
    detail::reject_unknown(l, "lamp",
                           {"n_points", "pad_exponent", "low_cutoff_nm", "max_eot_nm", "wavelet_width_scale",
                            "edge_trim_fraction", "wavelet_source", "baseline"});
    c.lamp.n_points = get_unsigned(l, "lamp", "n_points", c.lamp.n_points);
    c.lamp.pad_exponent = static_cast<unsigned>(get_unsigned(l, "lamp", "pad_exponent", c.lamp.pad_exponent));
    c.lamp.low_cutoff_nm = get_number(l, "lamp", "low_cutoff_nm", c.lamp.low_cutoff_nm);
    c.lamp.max_eot_nm = get_number(l, "lamp", "max_eot_nm", c.lamp.max_eot_nm);
    c.lamp.wavelet_width_scale = get_number(l, "lamp", "wavelet_width_scale", c.lamp.wavelet_width_scale);
    c.lamp.edge_trim_fraction = get_number(l, "lamp", "edge_trim_fraction", c.lamp.edge_trim_fraction);
    const auto source = get_string(l, "lamp", "wavelet_source", "per_spectrum");
    if (source == "per_spectrum") c.lamp.wavelet_source = lamp::WaveletSource::per_spectrum;
    else if (source == "reference") c.lamp.wavelet_source = lamp::WaveletSource::reference;
    else detail::config_fail("lamp.wavelet_source", "must be per_spectrum or reference");
    c.lamp.baseline = detail::parse_baseline(get_string(l, "lamp", "baseline", "quadratic"), "lamp.baseline");
    c.lamp.validate();
  }
  if (root.contains("lod")) {
    const auto& l = root["lod"];
    detail::reject_unknown(l, "lod", {"n_trials", "calibration_delta_n", "linearity_tolerance", "threads"});
    c.n_trials = get_unsigned(l, "lod", "n_trials", c.n_trials);
    c.calibration_delta_n = get_number(l, "lod", "calibration_delta_n", c.calibration_delta_n);
    c.linearity_tolerance = get_number(l, "lod", "linearity_tolerance", c.linearity_tolerance);
    c.threads = static_cast<unsigned>(get_unsigned(l, "lod", "threads", c.threads));
  }
  if (root.contains("simulate")) {
    const auto& s = root["simulate"];
    detail::reject_unknown(s, "simulate", {"delta_n", "noisy"});
    c.simulate_delta_n = get_number(s, "simulate", "delta_n", c.simulate_delta_n);
    c.simulate_noisy = get_bool(s, "simulate", "noisy", c.simulate_noisy);
  }
  if (root.contains("seed")) c.seed = get_unsigned(root, "", "seed", 0);
  try {
    c.stack.validate();
    c.noise.validate();
    (void)c.wavelengths();
  } catch (const Error& e) {
    fail(ErrorKind::argument, std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig read_run_config(const fs::path& path) { return parse_run_config(read_text(path)); }

}  // namespace thinfilm::io

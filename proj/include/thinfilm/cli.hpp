// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Command implementations behind the thinfilm executable. Each command writes
// its result to --out (or stdout), diagnostics to the error stream, and
// returns a process exit code.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/io.hpp"
#include "thinfilm/isotherm.hpp"
#include "thinfilm/lamp.hpp"
#include "thinfilm/legacy.hpp"
#include "thinfilm/lod.hpp"
#include "thinfilm/svg.hpp"

namespace thinfilm::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,  // I/O and anything unclassified
  exit_usage = 2,    // bad arguments or configuration
  exit_parse = 3,
  exit_alignment = 4,
  exit_processing = 5,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return exit_usage;
    case ErrorKind::parse: return exit_parse;
    case ErrorKind::alignment: return exit_alignment;
    case ErrorKind::io: return exit_failure;
    default: return exit_processing;
  }
}

enum class Format { json, csv };

struct GlobalOptions {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> range;
  std::optional<fs::path> out;
  Format format = Format::json;
};

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

inline std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

// Loaded configuration with --range applied and the seed resolved: --seed,
// then the config's seed, then entropy. The seed is always echoed.
struct Context {
  io::RunConfig config;
  std::uint64_t seed = 0;
  Format format = Format::json;
  std::optional<fs::path> out;
};

inline Context make_context(const GlobalOptions& opts, Streams io, bool needs_seed) {
  Context ctx;
  if (opts.config) ctx.config = io::read_run_config(*opts.config);
  if (opts.range) ctx.config.apply_range(io::parse_range(*opts.range));
  ctx.format = opts.format;
  ctx.out = opts.out;
  if (needs_seed) {
    if (opts.seed) ctx.seed = *opts.seed;
    else if (ctx.config.seed) ctx.seed = *ctx.config.seed;
    else {
      ctx.seed = entropy_seed();
      io.err << "seed drawn from entropy: " << ctx.seed << '\n';
    }
    io.err << "seed: " << ctx.seed << '\n';
  }
  return ctx;
}

inline void emit(const Context& ctx, Streams io, const std::string& text) {
  if (ctx.out) io::write_text(*ctx.out, text);
  else io.out << text;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::string num(double v) { return io::format_double(v); }

// Runs `body`, mapping library errors to exit codes with a message.
template <class F>
int guarded(Streams io, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    io.err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

struct SimulateOptions {
  std::optional<double> delta_n;
  std::optional<bool> noisy;
  std::optional<fs::path> clean_out;
};

inline int cmd_simulate(const GlobalOptions& opts, const SimulateOptions& sim, Streams io = {}) {
  return guarded(io, [&] {
    const Context ctx = make_context(opts, io, true);
    const auto& cfg = ctx.config;
    const double dn = sim.delta_n.value_or(cfg.simulate_delta_n);
    const bool noisy = sim.noisy.value_or(cfg.simulate_noisy);
    const auto wl = cfg.wavelengths();
    const auto clean = film::simulate_reflectance(cfg.stack.with_index_change(dn), wl);
    film::Spectrum result = clean;
    std::optional<double> snr;
    if (noisy) {
      film::NoiseModel model = cfg.noise;
      model.seed = ctx.seed;
      result = film::add_noise(clean, model);
      snr = film::measure_snr(clean, result);
    }
    if (sim.clean_out) io::write_spectrum(*sim.clean_out, clean);
    emit(ctx, io, io::format_spectrum(result));
    io.err << "points: " << result.size() << ", delta_n: " << num(dn) << ", snr_db: "
           << (noisy ? (snr ? num(*snr) : std::string("inf")) : std::string("none (clean)")) << '\n';
    return int{exit_ok};
  });
}

struct ProcessRow {
  std::string analyte;
  double signal = 0.0;
  std::optional<double> eot_nm;
  std::optional<double> delta_eot_nm;
  std::optional<double> delta_phase_rad;
  std::string error;
};

// Signal of one analyte against a prepared reference.
class Processor {
 public:
  Processor(lod::Method method, const io::RunConfig& cfg, film::Spectrum reference)
      : method_(method), cfg_(cfg), reference_(std::move(reference)) {
    if (method_ == lod::Method::rifts) reference_eot_ = legacy::rifts_eot(reference_, cfg_.rifts);
    if (method_ == lod::Method::lamp) reference_trace_ = lamp::lamp_phase(reference_, cfg_.lamp);
  }

  ProcessRow process(const film::Spectrum& analyte) const {
    ProcessRow row;
    switch (method_) {
      case lod::Method::rifts: {
        const double eot = legacy::rifts_eot(analyte, cfg_.rifts);
        row.eot_nm = eot;
        row.delta_eot_nm = eot - reference_eot_;
        row.signal = *row.delta_eot_nm;
        break;
      }
      case lod::Method::iaw: row.signal = legacy::iaw(reference_, analyte, cfg_.iaw); break;
      case lod::Method::lamp: {
        const auto trace = lamp::lamp_analyte_phase(*reference_trace_, analyte, cfg_.lamp);
        const auto r = lamp::lamp_compare(*reference_trace_, trace, cfg_.lamp);
        row.delta_phase_rad = r.mean_phase_rad;
        row.delta_eot_nm = r.delta_eot_nm;
        row.signal = r.mean_phase_rad;
        break;
      }
    }
    return row;
  }

 private:
  lod::Method method_;
  io::RunConfig cfg_;
  film::Spectrum reference_;
  double reference_eot_ = 0.0;
  std::optional<lamp::PhaseTrace> reference_trace_;
};

inline std::string format_process(const std::vector<ProcessRow>& rows, lod::Method method, Format format) {
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::string out;
  if (format == Format::csv) {
    out = "analyte,method,signal,eot_nm,delta_eot_nm,delta_phase_rad,error\n";
    for (const auto& r : rows)
      out += csv_field(r.analyte) + ',' + lod::to_string(method) + ',' + (r.error.empty() ? num(r.signal) : "") +
             ',' + opt(r.eot_nm) + ',' + opt(r.delta_eot_nm) + ',' + opt(r.delta_phase_rad) + ',' +
             csv_field(r.error) + '\n';
    return out;
  }
  for (const auto& r : rows) {
    ordered_json j;
    j["analyte"] = r.analyte;
    j["method"] = lod::to_string(method);
    if (!r.error.empty()) {
      j["error"] = r.error;
    } else {
      j["signal"] = r.signal;
      if (r.eot_nm) j["eot_nm"] = *r.eot_nm;
      if (r.delta_eot_nm) j["delta_eot_nm"] = *r.delta_eot_nm;
      if (r.delta_phase_rad) j["delta_phase_rad"] = *r.delta_phase_rad;
    }
    out += j.dump() + '\n';
  }
  return out;
}

inline int cmd_process(const GlobalOptions& opts, const std::string& method_name, const fs::path& reference,
                       const std::vector<fs::path>& analytes, Streams io = {}) {
  return guarded(io, [&] {
    const Context ctx = make_context(opts, io, false);
    const auto method = lod::parse_method(method_name);
    if (analytes.empty()) fail(ErrorKind::argument, "process: at least one analyte file is required");
    const Processor proc(method, ctx.config, io::read_spectrum(reference));
    std::vector<ProcessRow> rows;
    int code = exit_ok;
    for (const auto& path : analytes) {
      ProcessRow row;
      try {
        row = proc.process(io::read_spectrum(path));
      } catch (const Error& e) {
        row = ProcessRow{};
        row.error = std::string(to_string(e.kind())) + ": " + e.what();
        io.err << "error in '" << path.string() << "' (" << to_string(e.kind()) << "): " << e.what() << '\n';
        if (code == exit_ok) code = exit_code_for(e.kind());
      }
      row.analyte = path.string();
      rows.push_back(std::move(row));
    }
    emit(ctx, io, format_process(rows, method, ctx.format));
    return code;
  });
}

struct TimeseriesOptions {
  std::vector<std::string> methods{"rifts", "iaw", "lamp"};
  bool normalize = false;
  std::optional<fs::path> svg;
};

// Affine map of a series onto [0, 1]; a constant series maps to 0.
inline std::vector<double> min_max_normalize(const std::vector<double>& v) {
  if (v.empty()) return v;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, b = *hi;
  std::vector<double> out(v.size(), 0.0);
  if (b > a)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - a) / (b - a);
  return out;
}

inline int cmd_timeseries(const GlobalOptions& opts, const fs::path& manifest_path, const TimeseriesOptions& ts,
                          Streams io = {}) {
  return guarded(io, [&] {
    const Context ctx = make_context(opts, io, false);
    const auto manifest = io::read_manifest(manifest_path);
    std::vector<lod::Method> methods;
    for (const auto& m : ts.methods) methods.push_back(lod::parse_method(m));
    if (methods.empty()) fail(ErrorKind::argument, "timeseries: no methods selected");

    std::vector<film::Spectrum> spectra;
    for (const auto& e : manifest.entries) {
      try {
        spectra.push_back(io::read_spectrum(e.path));
      } catch (const Error& err) {
        fail(err.kind(), "timeseries: spectrum at t=" + num(e.timestamp_s) + " s: " + err.what());
      }
    }
    const auto& reference = spectra[manifest.reference_index];
    std::vector<std::vector<double>> columns;
    for (lod::Method m : methods) {
      const Processor proc(m, ctx.config, reference);
      std::vector<double> col;
      for (std::size_t i = 0; i < spectra.size(); ++i) {
        try {
          col.push_back(proc.process(spectra[i]).signal);
        } catch (const Error& err) {
          fail(err.kind(), "timeseries: " + std::string(lod::to_string(m)) + " failed at t=" +
                               num(manifest.entries[i].timestamp_s) + " s: " + err.what());
        }
      }
      columns.push_back(ts.normalize ? min_max_normalize(col) : std::move(col));
    }

    std::string out;
    if (ctx.format == Format::csv) {
      out = "timestamp_s";
      for (lod::Method m : methods) out += std::string(",") + lod::to_string(m);
      out += '\n';
      for (std::size_t i = 0; i < spectra.size(); ++i) {
        out += num(manifest.entries[i].timestamp_s);
        for (const auto& col : columns) out += ',' + num(col[i]);
        out += '\n';
      }
    } else {
      ordered_json j;
      j["normalized"] = ts.normalize;
      j["reference_timestamp_s"] = manifest.entries[manifest.reference_index].timestamp_s;
      std::vector<double> times;
      for (const auto& e : manifest.entries) times.push_back(e.timestamp_s);
      j["timestamp_s"] = times;
      for (std::size_t k = 0; k < methods.size(); ++k) j["signals"][lod::to_string(methods[k])] = columns[k];
      out = j.dump(2) + '\n';
    }
    emit(ctx, io, out);

    if (ts.svg) {
      std::vector<svg::Series> series;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        svg::Series s{lod::to_string(methods[k]), {}, columns[k]};
        for (const auto& e : manifest.entries) s.x.push_back(e.timestamp_s);
        series.push_back(std::move(s));
      }
      io::write_text(*ts.svg, svg::line_plot(series, "Signal versus time", "time (s)",
                                             ts.normalize ? "normalized signal" : "signal"));
    }
    return int{exit_ok};
  });
}

struct LodTableOptions {
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
};

inline int cmd_lod_table(const GlobalOptions& opts, const LodTableOptions& lt, Streams io = {}) {
  return guarded(io, [&] {
    Context ctx = make_context(opts, io, true);
    if (lt.trials) ctx.config.n_trials = *lt.trials;
    if (lt.threads) ctx.config.threads = *lt.threads;
    const auto start = std::chrono::steady_clock::now();
    const auto base = ctx.config.study(lod::Method::lamp, ctx.seed);
    const auto table = lod::run_lod_table(base);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool any_failed = false;
    std::string out;
    if (ctx.format == Format::csv) {
      out = "method,gradient,lod_riu,sigma_blank,delta_g,slope,half_slope,blank_mean,shifted_mean,seed,n_trials,error\n";
    }
    ordered_json cells = ordered_json::array();
    for (lod::Method m : lod::all_methods)
      for (lod::Gradient g : lod::all_gradients) {
        const auto& cell = table.at(m, g);
        any_failed = any_failed || !cell.result;
        if (ctx.format == Format::csv) {
          out += std::string(lod::to_string(m)) + ',' + lod::to_string(g) + ',';
          if (cell.result) {
            const auto& r = *cell.result;
            out += num(r.lod_riu) + ',' + num(r.sigma_blank) + ',' + num(r.delta_g) + ',' + num(r.slope) + ',' +
                   num(r.half_slope) + ',' + num(r.blank_mean) + ',' + num(r.shifted_mean);
          } else {
            out += ",,,,,,";
          }
          out += ',' + std::to_string(ctx.seed) + ',' + std::to_string(base.n_trials) + ',' + csv_field(cell.error) +
                 '\n';
        } else {
          ordered_json c;
          c["method"] = lod::to_string(m);
          c["gradient"] = lod::to_string(g);
          if (cell.result) {
            const auto& r = *cell.result;
            c["lod_riu"] = r.lod_riu;
            c["sigma_blank"] = r.sigma_blank;
            c["delta_g"] = r.delta_g;
            c["slope"] = r.slope;
            c["half_slope"] = r.half_slope;
            c["blank_mean"] = r.blank_mean;
            c["shifted_mean"] = r.shifted_mean;
          } else {
            c["error"] = cell.error;
          }
          c["seed"] = ctx.seed;
          cells.push_back(std::move(c));
        }
      }
    if (ctx.format == Format::json) {
      ordered_json j;
      j["seed"] = ctx.seed;
      j["trial_seed_rule"] = "splitmix64(seed, trial index)";
      j["n_trials"] = base.n_trials;
      j["calibration_delta_n"] = base.calibration_delta_n;
      j["white_sigma"] = table.white_sigma;
      j["offset_ramp_magnitude"] = table.offset_ramp_magnitude;
      j["amplitude_ramp_gain"] = table.amplitude_ramp_gain;
      j["cells"] = std::move(cells);
      j["runtime_s"] = runtime;
      out = j.dump(2) + '\n';
    }
    emit(ctx, io, out);
    io.err << "lod-table runtime: " << runtime << " s\n";
    return any_failed ? int{exit_processing} : int{exit_ok};
  });
}

struct FitOptions {
  double sigma_blank = 0.0;
  std::string unit = "uM";
  std::size_t curve_points = 200;
  std::optional<fs::path> curve_out;
};

inline int cmd_fit(const GlobalOptions& opts, const fs::path& series_path, const FitOptions& fo, Streams io = {}) {
  return guarded(io, [&] {
    const Context ctx = make_context(opts, io, false);
    if (!(fo.sigma_blank > 0.0)) fail(ErrorKind::argument, "fit: --sigma-blank must be positive");
    if (fo.curve_points < 2) fail(ErrorKind::argument, "fit: --curve-points must be >= 2");
    const auto unit = isotherm::parse_unit(fo.unit);
    const auto series = io::read_series(series_path, unit);
    const auto fit = isotherm::fit_redlich_peterson(series);
    const double threshold = 3.3 * fo.sigma_blank;
    std::optional<double> lod;
    std::string lod_error;
    try {
      lod = isotherm::lod_concentration(fit.model, threshold);
    } catch (const Error& e) {
      lod_error = e.what();
      io.err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    }
    for (const auto& w : fit.warnings) io.err << "warning: " << w << '\n';

    // Curve sampled log-uniformly over the positive concentrations, plus C = 0.
    double c_lo = 0.0;
    for (std::size_t g = 0; g < series.groups().size() && c_lo == 0.0; ++g) c_lo = series.concentration(g);
    const double c_hi = series.concentration(series.groups().size() - 1);
    std::vector<std::pair<double, double>> curve{{0.0, fit.model.intercept}};
    for (std::size_t k = 0; k < fo.curve_points; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(fo.curve_points - 1);
      const double c = c_lo * std::pow(c_hi / c_lo, t);
      curve.emplace_back(c, isotherm::model_eval(fit.model, c));
    }
    std::string curve_csv = "concentration,theta\n";
    for (const auto& [c, th] : curve) curve_csv += num(c) + ',' + num(th) + '\n';
    if (fo.curve_out) io::write_text(*fo.curve_out, curve_csv);

    std::string out;
    if (ctx.format == Format::csv) {
      out = "parameter,value\n";
      out += "unit," + std::string(isotherm::to_string(unit)) + '\n';
      out += "intercept," + num(fit.model.intercept) + '\n';
      out += "A," + num(fit.model.a) + '\n';
      out += "B," + num(fit.model.b) + '\n';
      out += "beta," + num(fit.model.beta) + '\n';
      out += "chi2," + num(fit.chi2) + '\n';
      out += "reduced_chi2," + num(fit.reduced_chi2) + '\n';
      out += "threshold," + num(threshold) + '\n';
      out += "lod_concentration," + (lod ? num(*lod) : std::string()) + '\n';
      out += "lod_concentration_molar," + (lod ? num(*lod * isotherm::molar_per_unit(unit)) : std::string()) + '\n';
    } else {
      ordered_json j;
      j["unit"] = isotherm::to_string(unit);
      j["intercept"] = fit.model.intercept;
      j["A"] = fit.model.a;
      j["B"] = fit.model.b;
      j["beta"] = fit.model.beta;
      j["chi2"] = fit.chi2;
      j["reduced_chi2"] = fit.reduced_chi2;
      j["iterations"] = fit.iterations;
      j["start_beta"] = fit.start_beta;
      if (fit.covariance) j["covariance"] = *fit.covariance;
      j["warnings"] = fit.warnings;
      j["threshold"] = threshold;
      if (lod) {
        j["lod_concentration"] = *lod;
        j["lod_concentration_molar"] = *lod * isotherm::molar_per_unit(unit);
      } else {
        j["lod_error"] = lod_error;
      }
      ordered_json c = ordered_json::array();
      for (const auto& [conc, th] : curve) c.push_back({{"concentration", conc}, {"theta", th}});
      j["curve"] = std::move(c);
      out = j.dump(2) + '\n';
    }
    emit(ctx, io, out);
    return lod ? int{exit_ok} : int{exit_processing};
  });
}

inline int cmd_snr(const GlobalOptions& opts, const fs::path& clean, const fs::path& noisy, Streams io = {}) {
  return guarded(io, [&] {
    const Context ctx = make_context(opts, io, false);
    const auto snr = film::measure_snr(io::read_spectrum(clean), io::read_spectrum(noisy));
    std::string out;
    if (ctx.format == Format::csv) {
      out = "snr_db\n" + (snr ? num(*snr) : std::string("inf")) + '\n';
    } else {
      ordered_json j;
      if (snr) j["snr_db"] = *snr;
      else j["snr_db"] = nullptr;
      j["no_noise"] = !snr.has_value();
      out = j.dump() + '\n';
    }
    emit(ctx, io, out);
    return int{exit_ok};
  });
}

}  // namespace thinfilm::cli

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#include <CLI11.hpp>

#include "thinfilm/cli.hpp"

namespace cli = thinfilm::cli;

int main(int argc, char** argv) {
  CLI::App app{"Thin-film interferometric biosensor signal processing"};
  app.fallthrough();
  app.require_subcommand(1);

  cli::GlobalOptions global;
  std::string format = "json";
  app.add_option("--config", global.config, "JSON run configuration");
  app.add_option("--seed", global.seed, "Master random seed (drawn from entropy when omitted)");
  app.add_option("--range", global.range, "Spectral range 'lo,hi' in nm");
  app.add_option("--out", global.out, "Output file (stdout when omitted)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  cli::SimulateOptions sim;
  bool clean = false;
  auto* simulate = app.add_subcommand("simulate", "Write a simulated reflectance spectrum as CSV");
  simulate->add_option("--delta-n", sim.delta_n, "Film index change");
  simulate->add_flag("--clean", clean, "Omit noise");
  simulate->add_option("--clean-out", sim.clean_out, "Also write the noiseless spectrum here");

  std::string method;
  std::string reference;
  std::vector<std::string> analytes;
  auto* process = app.add_subcommand("process", "Process analyte spectra against a reference");
  process->add_option("method", method, "rifts, iaw or lamp")->required();
  process->add_option("reference", reference, "Reference spectrum CSV")->required();
  process->add_option("analytes", analytes, "Analyte spectrum CSVs")->required();

  std::string manifest;
  cli::TimeseriesOptions ts;
  std::string methods = "rifts,iaw,lamp";
  std::string svg;
  auto* timeseries = app.add_subcommand("timeseries", "Signal versus time from a manifest");
  timeseries->add_option("manifest", manifest, "Manifest CSV")->required();
  timeseries->add_option("--methods", methods, "Comma-separated methods");
  timeseries->add_flag("--normalize", ts.normalize, "Map each method's series onto [0, 1]");
  timeseries->add_option("--svg", svg, "Write an SVG line plot here");

  cli::LodTableOptions lt;
  auto* lod_table = app.add_subcommand("lod-table", "Monte-Carlo detection-limit table");
  lod_table->add_option("--trials", lt.trials, "Trials per distribution");
  lod_table->add_option("--threads", lt.threads, "Worker threads (0: all hardware threads)");

  std::string series;
  cli::FitOptions fo;
  std::string curve_out;
  auto* fit = app.add_subcommand("fit", "Fit a Redlich-Peterson isotherm to a concentration series");
  fit->add_option("series", series, "Series CSV")->required();
  fit->add_option("--sigma-blank", fo.sigma_blank, "Blank standard deviation (signal units)")->required();
  fit->add_option("--unit", fo.unit, "Display and fitting unit (M, mM, uM, nM, pM)");
  fit->add_option("--curve-points", fo.curve_points, "Samples in the fitted curve");
  fit->add_option("--curve-out", curve_out, "Write the fitted curve CSV here");

  std::string snr_clean, snr_noisy;
  auto* snr = app.add_subcommand("snr", "S/N in dB of a noisy spectrum against its clean version");
  snr->add_option("clean", snr_clean, "Clean spectrum CSV")->required();
  snr->add_option("noisy", snr_noisy, "Noisy spectrum CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_usage;
  }
  global.format = format == "csv" ? cli::Format::csv : cli::Format::json;

  if (*simulate) {
    if (clean) sim.noisy = false;
    return cli::cmd_simulate(global, sim);
  }
  if (*process) {
    std::vector<std::filesystem::path> paths(analytes.begin(), analytes.end());
    return cli::cmd_process(global, method, reference, paths);
  }
  if (*timeseries) {
    ts.methods.clear();
    std::string item;
    for (char c : methods + ",") {
      if (c == ',') {
        if (!item.empty()) ts.methods.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
    if (!svg.empty()) ts.svg = svg;
    return cli::cmd_timeseries(global, manifest, ts);
  }
  if (*lod_table) return cli::cmd_lod_table(global, lt);
  if (*fit) {
    if (!curve_out.empty()) fo.curve_out = curve_out;
    return cli::cmd_fit(global, series, fo);
  }
  if (*snr) return cli::cmd_snr(global, snr_clean, snr_noisy);
  return cli::exit_usage;
}

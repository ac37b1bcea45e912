// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "../scenarios.hpp"
#include "support.hpp"
#include "thinfilm/cli.hpp"

namespace cli = thinfilm::cli;
namespace io = thinfilm::io;
using testing_support::TempDir;
using json = nlohmann::json;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

template <class F>
Captured capture(F&& fn) {
  std::ostringstream out, err;
  const int code = fn(cli::Streams{out, err});
  return {code, out.str(), err.str()};
}

cli::GlobalOptions seeded(std::uint64_t seed) {
  cli::GlobalOptions o;
  o.seed = seed;
  return o;
}

// Runs the installed binary through the shell; returns its exit status.
int run_binary(const std::string& args) {
  const std::string cmd = std::string(THINFILM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_series(const std::filesystem::path& path, const thinfilm::isotherm::ConcentrationSeries& s) {
  std::string text = "concentration,unit,response\n";
  for (std::size_t g = 0; g < s.groups().size(); ++g)
    for (double y : s.groups()[g].responses) text += io::format_double(s.concentration(g)) + ",uM," + io::format_double(y) + "\n";
  io::write_text(path, text);
}

}  // namespace

TEST(Simulate, SameSeedSameBytes) {
  TempDir dir;
  auto opts = seeded(7);
  opts.out = dir / "a.csv";
  EXPECT_EQ(capture([&](cli::Streams s) { return cli::cmd_simulate(opts, {}, s); }).code, 0);
  opts.out = dir / "b.csv";
  const auto second = capture([&](cli::Streams s) { return cli::cmd_simulate(opts, {}, s); });
  EXPECT_EQ(io::read_text(dir / "a.csv"), io::read_text(dir / "b.csv"));
  EXPECT_NE(second.err.find("seed: 7"), std::string::npos);
}

TEST(Simulate, ReportsTargetSnr) {
  const auto r = capture([&](cli::Streams s) { return cli::cmd_simulate(seeded(3), {}, s); });
  ASSERT_EQ(r.code, 0);
  const auto pos = r.err.find("snr_db: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.err.substr(pos + 8)), 27.7, 0.5);
  EXPECT_EQ(io::parse_spectrum(r.out).size(), 601u);
}

TEST(Simulate, OmittedSeedIsDrawnAndPrinted) {
  const auto r = capture([&](cli::Streams s) { return cli::cmd_simulate({}, {}, s); });
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("seed drawn from entropy"), std::string::npos);
  EXPECT_NE(r.err.find("seed: "), std::string::npos);
}

TEST(Process, RoundTripRecoversOpticalThickness) {
  TempDir dir;
  cli::SimulateOptions clean;
  clean.noisy = false;
  auto opts = seeded(1);
  opts.out = dir / "ref.csv";
  ASSERT_EQ(capture([&](cli::Streams s) { return cli::cmd_simulate(opts, clean, s); }).code, 0);
  clean.delta_n = 0.01;
  opts.out = dir / "ana.csv";
  ASSERT_EQ(capture([&](cli::Streams s) { return cli::cmd_simulate(opts, clean, s); }).code, 0);

  const auto rifts = capture([&](cli::Streams s) {
    return cli::cmd_process({}, "rifts", dir / "ref.csv", {dir / "ref.csv", dir / "ana.csv"}, s);
  });
  ASSERT_EQ(rifts.code, 0) << rifts.err;
  std::istringstream lines(rifts.out);
  std::string line;
  std::vector<json> rows;
  while (std::getline(lines, line))
    if (!line.empty()) rows.push_back(json::parse(line));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0]["eot_nm"].get<double>(), 5760.0, 2.0);
  EXPECT_NEAR(rows[1]["delta_eot_nm"].get<double>(), 48.0, 3.0);

  const auto lamp = capture([&](cli::Streams s) {
    return cli::cmd_process({}, "lamp", dir / "ref.csv", {dir / "ref.csv"}, s);
  });
  ASSERT_EQ(lamp.code, 0);
  EXPECT_EQ(json::parse(lamp.out)["signal"].get<double>(), 0.0);
}

TEST(Process, CsvHeader) {
  TempDir dir;
  io::write_spectrum(dir / "r.csv", testing_support::default_spectrum());
  auto opts = seeded(1);
  opts.format = cli::Format::csv;
  const auto r = capture([&](cli::Streams s) { return cli::cmd_process(opts, "iaw", dir / "r.csv", {dir / "r.csv"}, s); });
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "analyte,method,signal,eot_nm,delta_eot_nm,delta_phase_rad,error");
}

TEST(Process, ErrorKindsMapToDistinctExitCodes) {
  TempDir dir;
  io::write_spectrum(dir / "r.csv", testing_support::default_spectrum());
  io::write_spectrum(dir / "coarse.csv", thinfilm::film::simulate_reflectance(
                                              {}, thinfilm::film::uniform_wavelengths(500, 800, 1.0)));
  io::write_text(dir / "broken.csv", "wavelength_nm,reflectance\n500,x\n");
  const auto align = capture([&](cli::Streams s) {
    return cli::cmd_process({}, "iaw", dir / "r.csv", {dir / "coarse.csv"}, s);
  });
  const auto parse = capture([&](cli::Streams s) {
    return cli::cmd_process({}, "iaw", dir / "r.csv", {dir / "broken.csv"}, s);
  });
  EXPECT_EQ(align.code, cli::exit_alignment);
  EXPECT_EQ(parse.code, cli::exit_parse);
  EXPECT_NE(align.code, parse.code);
  const auto usage = capture([&](cli::Streams s) { return cli::cmd_process({}, "fft", dir / "r.csv", {dir / "r.csv"}, s); });
  EXPECT_EQ(usage.code, cli::exit_usage);
}

TEST(Timeseries, FlatForIdenticalSpectraAndStepRatios) {
  TempDir dir;
  io::write_spectrum(dir / "ref.csv", testing_support::default_spectrum());
  for (int k = 1; k <= 3; ++k) io::write_spectrum(dir / ("s" + std::to_string(k) + ".csv"), testing_support::default_spectrum(4e-4 * k));
  io::write_text(dir / "flat.csv", "timestamp_s,path,is_reference\n0,ref.csv,1\n10,ref.csv,0\n20,ref.csv,0\n");
  io::write_text(dir / "steps.csv", "timestamp_s,path,is_reference\n0,ref.csv,1\n10,s1.csv,0\n20,s2.csv,0\n30,s3.csv,0\n");

  const auto flat = capture([&](cli::Streams s) { return cli::cmd_timeseries({}, dir / "flat.csv", {}, s); });
  ASSERT_EQ(flat.code, 0) << flat.err;
  for (const auto& [name, col] : json::parse(flat.out)["signals"].items())
    for (double v : col) EXPECT_EQ(v, 0.0) << name;

  cli::TimeseriesOptions ts;
  ts.svg = dir / "plot.svg";
  const auto steps = capture([&](cli::Streams s) { return cli::cmd_timeseries({}, dir / "steps.csv", ts, s); });
  ASSERT_EQ(steps.code, 0) << steps.err;
  const auto lamp = json::parse(steps.out)["signals"]["lamp"].get<std::vector<double>>();
  ASSERT_EQ(lamp.size(), 4u);
  EXPECT_NEAR(lamp[2] / lamp[1], 2.0, 0.1);
  EXPECT_NEAR(lamp[3] / lamp[1], 3.0, 0.15);
  EXPECT_NE(io::read_text(dir / "plot.svg").find("<svg"), std::string::npos);

  ts.normalize = true;
  ts.svg.reset();
  const auto norm = capture([&](cli::Streams s) { return cli::cmd_timeseries({}, dir / "steps.csv", ts, s); });
  for (const auto& [name, col] : json::parse(norm.out)["signals"].items()) {
    const auto v = col.get<std::vector<double>>();
    EXPECT_EQ(*std::min_element(v.begin(), v.end()), 0.0) << name;
    EXPECT_EQ(*std::max_element(v.begin(), v.end()), 1.0) << name;
  }
}

TEST(LodTable, SmokeRunIsFastAndDeterministic) {
  cli::LodTableOptions lt;
  lt.trials = 10;
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = capture([&](cli::Streams s) { return cli::cmd_lod_table(seeded(5), lt, s); });
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_LT(elapsed, 5.0);
  const auto b = capture([&](cli::Streams s) { return cli::cmd_lod_table(seeded(5), lt, s); });
  auto ja = json::parse(a.out), jb = json::parse(b.out);
  ASSERT_EQ(ja["cells"].size(), 9u);
  for (const auto& c : ja["cells"]) EXPECT_GT(c["lod_riu"].get<double>(), 0.0);
  ja.erase("runtime_s");
  jb.erase("runtime_s");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Fit, PublishedLampRowLod) {
  TempDir dir;
  const auto& row = scenario::assay_rows()[2];
  write_series(dir / "series.csv", scenario::noisy_assay(row.model, row.three_sigma / 3.3, 16, 4));
  cli::FitOptions fo;
  fo.sigma_blank = row.three_sigma / 3.3;
  const auto r = capture([&](cli::Streams s) { return cli::cmd_fit({}, dir / "series.csv", fo, s); });
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["lod_concentration"].get<double>() * 1e3, 0.22, 0.05 * 0.22);
  EXPECT_EQ(j["curve"].size(), 201u);
}

TEST(Fit, NoiselessDataReportsZeroReducedChiSquared) {
  TempDir dir;
  write_series(dir / "series.csv", scenario::noiseless_assay(scenario::assay_rows()[2].model));
  cli::FitOptions fo;
  fo.sigma_blank = 1e-4;
  auto opts = seeded(0);
  opts.format = cli::Format::csv;
  const auto r = capture([&](cli::Streams s) { return cli::cmd_fit(opts, dir / "series.csv", fo, s); });
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("reduced_chi2,");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::abs(std::stod(r.out.substr(pos + 13))), 1e-20);
}

TEST(Fit, TooFewGroupsIsUsageError) {
  TempDir dir;
  io::write_text(dir / "s.csv", "concentration,unit,response\n1,uM,1\n1,uM,1.1\n2,uM,2\n2,uM,2.1\n3,uM,3\n3,uM,3.2\n");
  cli::FitOptions fo;
  fo.sigma_blank = 0.1;
  const auto r = capture([&](cli::Streams s) { return cli::cmd_fit({}, dir / "s.csv", fo, s); });
  EXPECT_EQ(r.code, cli::exit_usage);
  EXPECT_NE(r.err.find("at least 4"), std::string::npos);
}

TEST(Snr, NoiseFreeCopyIsInfinite) {
  TempDir dir;
  io::write_spectrum(dir / "c.csv", testing_support::default_spectrum());
  const auto r = capture([&](cli::Streams s) { return cli::cmd_snr({}, dir / "c.csv", dir / "c.csv", s); });
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(json::parse(r.out)["snr_db"].is_null());
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  io::write_spectrum(dir / "r.csv", testing_support::default_spectrum());
  io::write_spectrum(dir / "coarse.csv", thinfilm::film::simulate_reflectance(
                                              {}, thinfilm::film::uniform_wavelengths(500, 800, 1.0)));
  io::write_text(dir / "broken.csv", "wavelength_nm,reflectance\n500,x\n");
  const std::string r = (dir / "r.csv").string();
  EXPECT_EQ(run_binary("--seed 1 simulate"), 0);
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary("process iaw " + r + " " + (dir / "coarse.csv").string()), 4);
  EXPECT_EQ(run_binary("process iaw " + r + " " + (dir / "broken.csv").string()), 3);
  EXPECT_EQ(run_binary("process iaw " + r + " " + (dir / "absent.csv").string()), 1);
  EXPECT_EQ(run_binary("--no-such-flag simulate"), 2);
  EXPECT_EQ(run_binary(""), 2);
}

TEST(Binary, SimulateDeterministicAcrossProcesses) {
  TempDir dir;
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  ASSERT_EQ(run_binary("--seed 99 --out " + a + " simulate --delta-n 0.002"), 0);
  ASSERT_EQ(run_binary("--seed 99 --out " + b + " simulate --delta-n 0.002"), 0);
  EXPECT_EQ(io::read_text(a), io::read_text(b));
}

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Redlich-Peterson adsorption isotherm theta(C) = I + A C / (1 + B C^beta):
// inverse-variance weighted fitting, goodness of fit, concentration-domain
// detection limit and the IAW nonlinearity correction.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/legacy.hpp"

namespace thinfilm::isotherm {

enum class ConcentrationUnit { molar, millimolar, micromolar, nanomolar, picomolar };

// mol/L per unit.
inline double molar_per_unit(ConcentrationUnit u) {
  switch (u) {
    case ConcentrationUnit::molar: return 1.0;
    case ConcentrationUnit::millimolar: return 1e-3;
    case ConcentrationUnit::micromolar: return 1e-6;
    case ConcentrationUnit::nanomolar: return 1e-9;
    case ConcentrationUnit::picomolar: return 1e-12;
  }
  return 1.0;
}

inline const char* to_string(ConcentrationUnit u) {
  switch (u) {
    case ConcentrationUnit::molar: return "M";
    case ConcentrationUnit::millimolar: return "mM";
    case ConcentrationUnit::micromolar: return "uM";
    case ConcentrationUnit::nanomolar: return "nM";
    case ConcentrationUnit::picomolar: return "pM";
  }
  return "?";
}

// Accepts M, mM, uM, nM, pM; the micro prefix may also be U+00B5 or U+03BC.
inline ConcentrationUnit parse_unit(const std::string& s) {
  if (s == "M") return ConcentrationUnit::molar;
  if (s == "mM") return ConcentrationUnit::millimolar;
  if (s == "uM" || s == "\xC2\xB5M" || s == "\xCE\xBCM") return ConcentrationUnit::micromolar;
  if (s == "nM") return ConcentrationUnit::nanomolar;
  if (s == "pM") return ConcentrationUnit::picomolar;
  fail(ErrorKind::parse, "unknown concentration unit '" + s + "'");
}

struct ConcentrationGroup {
  double concentration_molar = 0.0;
  std::vector<double> responses;
  std::optional<double> variance;  // replaces the replicate variance when set
};

// Groups in strictly ascending concentration. Concentrations are held in mol/L;
// fitting happens in the display unit.
class ConcentrationSeries {
 public:
  ConcentrationSeries(std::vector<ConcentrationGroup> groups, ConcentrationUnit display_unit)
      : groups_(std::move(groups)), unit_(display_unit) {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      const auto& g = groups_[i];
      if (!(g.concentration_molar >= 0.0) || !std::isfinite(g.concentration_molar))
        fail(ErrorKind::argument, "concentration series: concentrations must be finite and >= 0");
      if (i > 0 && !(g.concentration_molar > groups_[i - 1].concentration_molar))
        fail(ErrorKind::argument, "concentration series: concentrations must be strictly ascending");
      if (g.responses.empty()) fail(ErrorKind::argument, "concentration series: empty group");
      if (g.responses.size() < 2 && !g.variance)
        fail(ErrorKind::argument, "concentration series: each group needs >= 2 replicates or a supplied variance");
      if (g.variance && !(*g.variance >= 0.0))
        fail(ErrorKind::argument, "concentration series: supplied variance must be >= 0");
      for (double y : g.responses)
        if (!std::isfinite(y)) fail(ErrorKind::argument, "concentration series: responses must be finite");
    }
  }

  struct Row {
    double concentration = 0.0;
    ConcentrationUnit unit = ConcentrationUnit::micromolar;
    double response = 0.0;
  };

  // Replicates are rows repeating a concentration; row order is free.
  static ConcentrationSeries from_rows(const std::vector<Row>& rows, ConcentrationUnit display_unit) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(rows.size());
    for (const auto& r : rows) pts.emplace_back(r.concentration * molar_per_unit(r.unit), r.response);
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ConcentrationGroup> groups;
    for (const auto& [c, y] : pts) {
      const bool same = !groups.empty() && std::abs(groups.back().concentration_molar - c) <=
                                               1e-12 * std::max(std::abs(c), std::abs(groups.back().concentration_molar));
      if (!same) groups.push_back(ConcentrationGroup{c, {}, std::nullopt});
      groups.back().responses.push_back(y);
    }
    return ConcentrationSeries(std::move(groups), display_unit);
  }

  const std::vector<ConcentrationGroup>& groups() const { return groups_; }
  ConcentrationUnit display_unit() const { return unit_; }
  double concentration(std::size_t group) const {
    return groups_[group].concentration_molar / molar_per_unit(unit_);
  }
  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.responses.size();
    return n;
  }

 private:
  std::vector<ConcentrationGroup> groups_;
  ConcentrationUnit unit_;
};

struct RedlichPeterson {
  double intercept = 0.0;
  double a = 0.0;
  double b = 0.0;
  double beta = 1.0;
};

// C in the unit the parameters refer to; 0^beta is taken as 0.
inline double model_eval(const RedlichPeterson& m, double c) {
  if (!(c >= 0.0)) fail(ErrorKind::argument, "model_eval: concentration must be >= 0");
  if (c == 0.0) return m.intercept;
  return m.intercept + m.a * c / (1.0 + m.b * std::pow(c, m.beta));
}

struct RedlichPetersonFit {
  RedlichPeterson model;
  ConcentrationUnit unit = ConcentrationUnit::micromolar;
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  // Order I, A, B, beta; scaled by reduced_chi2. Absent when singular.
  std::optional<std::array<std::array<double, 4>, 4>> covariance;
  std::vector<std::string> warnings;
  std::size_t iterations = 0;
  double start_beta = 0.0;
};

// Per-group variances used as weights. A zero replicate variance falls back to
// the pooled variance, and an all-zero pool to unit variance.
inline std::vector<double> group_variances(const ConcentrationSeries& series, std::vector<std::string>* warnings) {
  const auto& groups = series.groups();
  std::vector<double> var(groups.size(), 0.0);
  double pooled_ss = 0.0;
  std::size_t pooled_dof = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    if (g.variance) {
      var[i] = *g.variance;
      continue;
    }
    double mean = 0.0;
    for (double y : g.responses) mean += y;
    mean /= static_cast<double>(g.responses.size());
    double ss = 0.0;
    for (double y : g.responses) ss += (y - mean) * (y - mean);
    var[i] = ss / static_cast<double>(g.responses.size() - 1);
    pooled_ss += ss;
    pooled_dof += g.responses.size() - 1;
  }
  const double pooled = pooled_dof ? pooled_ss / static_cast<double>(pooled_dof) : 0.0;
  bool used_pooled = false, used_unit = false;
  for (double& v : var) {
    if (v > 0.0) continue;
    if (pooled > 0.0) {
      v = pooled;
      used_pooled = true;
    } else {
      v = 1.0;
      used_unit = true;
    }
  }
  if (warnings) {
    if (used_pooled) warnings->push_back("zero replicate variance in a group; pooled variance used");
    if (used_unit) warnings->push_back("zero variance in every group; unit weights used");
  }
  return var;
}

namespace detail {

struct Point {
  double c;
  double y;
  double w;  // 1 / sigma
};

inline std::vector<Point> weighted_points(const ConcentrationSeries& series, std::vector<std::string>* warnings) {
  const auto var = group_variances(series, warnings);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < series.groups().size(); ++i)
    for (double y : series.groups()[i].responses)
      pts.push_back(Point{series.concentration(i), y, 1.0 / std::sqrt(var[i])});
  return pts;
}

// Unconstrained parameters: I, A, v with B = v^2, u with beta = (1 + sin u) / 2.
struct Raw {
  double i, a, v, u;
  RedlichPeterson model() const { return {i, a, v * v, 0.5 * (1.0 + std::sin(u))}; }
};

inline double chi2(const std::vector<Point>& pts, const RedlichPeterson& m) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double r = (p.y - model_eval(m, p.c)) * p.w;
    s += r * r;
  }
  return s;
}

// Weighted derivatives of theta with respect to (I, A, B, beta).
inline std::array<double, 4> natural_gradient(const RedlichPeterson& m, double c) {
  if (c == 0.0) return {1.0, 0.0, 0.0, 0.0};
  const double cb = std::pow(c, m.beta);
  const double d = 1.0 + m.b * cb;
  return {1.0, c / d, -m.a * c * cb / (d * d), -m.a * c * m.b * cb * std::log(c) / (d * d)};
}

struct LmOutcome {
  Raw raw;
  double chi2;
  std::size_t iterations;
  bool converged;
};

inline LmOutcome levenberg_marquardt(const std::vector<Point>& pts, Raw start) {
  constexpr std::size_t max_iter = 2000;
  Raw x = start;
  double cost = chi2(pts, x.model());
  double lambda = 1e-3;
  const std::size_t n = pts.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd res(static_cast<Eigen::Index>(n));
  for (std::size_t it = 0; it < max_iter; ++it) {
    const RedlichPeterson m = x.model();
    for (std::size_t k = 0; k < n; ++k) {
      const auto g = natural_gradient(m, pts[k].c);
      const auto row = static_cast<Eigen::Index>(k);
      res(row) = (pts[k].y - model_eval(m, pts[k].c)) * pts[k].w;
      jac(row, 0) = g[0] * pts[k].w;
      jac(row, 1) = g[1] * pts[k].w;
      jac(row, 2) = g[2] * 2.0 * x.v * pts[k].w;
      jac(row, 3) = g[3] * 0.5 * std::cos(x.u) * pts[k].w;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * res;
    if (cost == 0.0 || jtr.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, cost))
      return {x, cost, it, true};
    bool improved = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix4d a = jtj;
      for (int d = 0; d < 4; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-300);
      const Eigen::Vector4d step = a.ldlt().solve(jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Raw trial{x.i + step(0), x.a + step(1), x.v + step(2), x.u + step(3)};
      const double trial_cost = chi2(pts, trial.model());
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double drop = cost - trial_cost;
        const double size = step.cwiseAbs().maxCoeff();
        const double scale = std::max({std::abs(x.i), std::abs(x.a), std::abs(x.v), std::abs(x.u), 1.0});
        x = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (drop <= 1e-15 * cost || size <= 1e-15 * scale) return {x, cost, it + 1, true};
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) return {x, cost, it, lambda > 1e10};
  }
  return {x, cost, max_iter, false};
}

// Weighted linear least squares for (I, A) at fixed B and beta.
inline std::optional<std::pair<double, double>> linear_start(const std::vector<Point>& pts, double b, double beta) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const double c = pts[k].c;
    const double g = c == 0.0 ? 0.0 : c / (1.0 + b * std::pow(c, beta));
    x(row, 0) = pts[k].w;
    x(row, 1) = g * pts[k].w;
    y(row) = pts[k].y * pts[k].w;
  }
  const Eigen::Vector2d sol = x.colPivHouseholderQr().solve(y);
  if (!sol.allFinite()) return std::nullopt;
  return std::make_pair(sol(0), sol(1));
}

}  // namespace detail

inline constexpr std::array<double, 5> start_betas{0.2, 0.5, 0.8, 0.95, 1.0};

inline double reduced_chi_squared(const RedlichPeterson& model, const ConcentrationSeries& series) {
  const std::size_t n = series.total_points();
  if (n <= 4) fail(ErrorKind::argument, "reduced chi-squared needs more than 4 data points");
  return detail::chi2(detail::weighted_points(series, nullptr), model) / static_cast<double>(n - 4);
}

inline double reduced_chi_squared(const RedlichPetersonFit& fit, const ConcentrationSeries& series) {
  return reduced_chi_squared(fit.model, series);
}

// Multi-start Levenberg-Marquardt. Each start fixes beta from start_betas and
// picks (I, A, B) by weighted linear least squares over a B grid.
inline RedlichPetersonFit fit_redlich_peterson(const ConcentrationSeries& series) {
  if (series.groups().size() < 4)
    fail(ErrorKind::argument, "fit: need at least 4 concentration groups for 4 parameters");
  RedlichPetersonFit out;
  out.unit = series.display_unit();
  const auto pts = detail::weighted_points(series, &out.warnings);
  const double c_max = series.concentration(series.groups().size() - 1);
  if (!(c_max > 0.0)) fail(ErrorKind::argument, "fit: need a positive concentration");

  std::optional<detail::LmOutcome> best;
  double best_start_beta = 0.0;
  std::string diagnostics;
  for (double beta0 : start_betas) {
    const double b_scale = 1.0 / std::pow(c_max, beta0);
    std::optional<std::pair<double, double>> ia;
    double b0 = 0.0, start_cost = std::numeric_limits<double>::infinity();
    for (double k : {0.0, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
      const double b = k * b_scale;
      const auto lin = detail::linear_start(pts, b, beta0);
      if (!lin) continue;
      const double cost = detail::chi2(pts, {lin->first, lin->second, b, beta0});
      if (cost < start_cost) {
        start_cost = cost;
        ia = lin;
        b0 = b;
      }
    }
    if (!ia) continue;
    // Keep v and u off the stationary points of their transforms.
    const double v0 = std::sqrt(std::max(b0, 1e-6 * b_scale));
    const double u0 = std::asin(std::clamp(2.0 * beta0 - 1.0, -1.0, 1.0)) - (beta0 >= 1.0 ? 1e-3 : 0.0);
    const auto run = detail::levenberg_marquardt(pts, {ia->first, ia->second, v0, u0});
    diagnostics += " beta0=" + std::to_string(beta0) + ": chi2=" + std::to_string(run.chi2) +
                   (run.converged ? "" : " (not converged)") + ";";
    if (!run.converged || !std::isfinite(run.chi2)) continue;
    if (!best || run.chi2 < best->chi2) {
      best = run;
      best_start_beta = beta0;
    }
  }
  if (!best) fail(ErrorKind::fit, "Redlich-Peterson fit did not converge from any start:" + diagnostics);

  out.model = best->raw.model();
  out.chi2 = best->chi2;
  out.iterations = best->iterations;
  out.start_beta = best_start_beta;
  const std::size_t n = pts.size();
  out.reduced_chi2 = n > 4 ? out.chi2 / static_cast<double>(n - 4) : 0.0;

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  for (std::size_t k = 0; k < n; ++k) {
    const auto g = detail::natural_gradient(out.model, pts[k].c);
    for (int d = 0; d < 4; ++d) jac(static_cast<Eigen::Index>(k), d) = g[static_cast<std::size_t>(d)] * pts[k].w;
  }
  const Eigen::Matrix4d jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(jtj);
  if (lu.isInvertible() && n > 4) {
    const Eigen::Matrix4d cov = lu.inverse() * out.reduced_chi2;
    std::array<std::array<double, 4>, 4> c{};
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) c[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)] = cov(r, q);
    out.covariance = c;
  }
  return out;
}

// Concentration (in the model's unit) where theta rises threshold above I.
inline double lod_concentration(const RedlichPeterson& m, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorKind::argument, "lod_concentration: threshold must be positive");
  if (!(m.a > 0.0)) fail(ErrorKind::argument, "lod_concentration: model must increase from zero (A > 0)");
  if (m.b < 0.0 || m.beta < 0.0 || m.beta > 1.0)
    fail(ErrorKind::argument, "lod_concentration: need B >= 0 and beta in [0, 1]");
  if (m.b == 0.0) return threshold / m.a;
  if (m.beta == 1.0 && threshold >= m.a / m.b)
    fail(ErrorKind::study, "lod_concentration: threshold is beyond saturation (A/B = " + std::to_string(m.a / m.b) + ")");
  auto rise = [&](double c) { return model_eval(m, c) - m.intercept; };
  // A C bounds the rise from above, so the root lies at or beyond threshold / A.
  double lo = threshold / m.a;
  double hi = lo;
  for (int k = 0; rise(hi) < threshold; ++k) {
    if (k > 2000 || !std::isfinite(hi))
      fail(ErrorKind::study, "lod_concentration: threshold is beyond saturation");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (rise(mid) < threshold ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Quadratic model of the relative deviation of the noiseless IAW response from
// linearity, dev(p) = c0 + c1 p + c2 p^2 with p the EOT change in percent.
struct IawNonlinearity {
  std::array<double, 3> coefficients{};
  double linear_slope = 0.0;  // IAW response per percent EOT change near zero
  double max_eot_percent = 0.0;

  double deviation(double eot_percent) const {
    return coefficients[0] + eot_percent * (coefficients[1] + eot_percent * coefficients[2]);
  }
  // Rescales a measured IAW response to the linear response at that EOT change.
  double correct(double response, double eot_percent) const { return response / (1.0 + deviation(eot_percent)); }
};

inline IawNonlinearity iaw_nonlinearity_correction(const film::FilmStack& stack, const grid::WavelengthRange& range,
                                                   double max_eot_percent,
                                                   const std::vector<double>& wavelengths = film::default_wavelengths(),
                                                   std::size_t sweep_points = 41) {
  stack.validate();
  range.validate();
  if (!(max_eot_percent > 0.0)) fail(ErrorKind::argument, "iaw correction: max_eot_percent must be positive");
  if (sweep_points < 4) fail(ErrorKind::argument, "iaw correction: need at least 4 sweep points");
  const double eot = stack.optical_thickness_nm();
  const double limit = legacy::iaw_fold_limit_eot_nm(range);
  if (max_eot_percent * eot / 100.0 > limit)
    fail(ErrorKind::range, "iaw correction: sweep to " + std::to_string(max_eot_percent) +
                               "% EOT change exceeds half the free spectral range (" + std::to_string(limit) +
                               " nm, " + std::to_string(100.0 * limit / eot) + "%)");

  const auto reference = film::simulate_reflectance(stack, wavelengths);
  const legacy::IawConfig cfg{range, legacy::IawRule::mean_abs};
  auto response = [&](double p) {
    const double dn = p * stack.film_index / 100.0;
    return legacy::iaw(reference, film::simulate_reflectance(stack.with_index_change(dn), wavelengths), cfg);
  };
  IawNonlinearity out;
  out.max_eot_percent = max_eot_percent;
  const double probe = 1e-4 * max_eot_percent;
  out.linear_slope = response(probe) / probe;

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(sweep_points), 3);
  Eigen::VectorXd dev(static_cast<Eigen::Index>(sweep_points));
  for (std::size_t k = 0; k < sweep_points; ++k) {
    const double p = max_eot_percent * static_cast<double>(k + 1) / static_cast<double>(sweep_points);
    const auto row = static_cast<Eigen::Index>(k);
    basis(row, 0) = 1.0;
    basis(row, 1) = p;
    basis(row, 2) = p * p;
    dev(row) = response(p) / (out.linear_slope * p) - 1.0;
  }
  const Eigen::Vector3d c = basis.colPivHouseholderQr().solve(dev);
  out.coefficients = {c(0), c(1), c(2)};
  return out;
}

}  // namespace thinfilm::isotherm

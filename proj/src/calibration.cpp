#include "fraclab/bubbles.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/functional.hpp"

#include <cmath>
#include <sstream>

namespace fraclab {

namespace {

struct Fit {
  double coefficient = 0.0;
  double residual = 0.0;
};

// deviation ~ coefficient * model, least squares through the origin.
Fit fit_through_origin(const std::vector<double>& model, const std::vector<double>& deviation) {
  double mm = 0.0, md = 0.0, dd = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    mm += model[i] * model[i];
    md += model[i] * deviation[i];
    dd += deviation[i] * deviation[i];
  }
  Fit f;
  if (!(mm > 0.0) || !(dd > 0.0)) return f;
  f.coefficient = md / mm;
  double rr = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double r = deviation[i] - f.coefficient * model[i];
    rr += r * r;
  }
  f.residual = std::sqrt(rr / dd);
  return f;
}

struct Sweep {
  std::vector<SweepPoint> points;
  std::vector<double> model;  // expansion term with unit constant
};

Sweep run_sweep(const Functional& J, const SphereFunction& K, const std::vector<Eigen::VectorXd>& centers,
                const std::vector<double>& lambdas, bool unit_c2) {
  const SpectralSpace& space = J.space();
  Sweep s;
  for (double lambda : lambdas) {
    BubbleParams params;
    params.n = space.dimension();
    params.sigma = J.sigma();
    for (const auto& a : centers) params.entries.push_back({1.0, a, lambda});
    const std::vector<CenterData> data = center_data(params, K);
    SweepPoint p;
    p.lambda = lambda;
    p.value = J.value(bubble_sum(params, space));
    p.limit = expansion_limit(params, data);
    p.deviation = p.value - p.limit;
    ExpansionConstants unit;
    (unit_c2 ? unit.c2 : unit.c01) = 1.0;
    s.model.push_back(expansion_JK(params, data, unit) - p.limit);
    s.points.push_back(p);
  }
  return s;
}

void fill_prediction(Sweep& s, double coefficient) {
  for (std::size_t i = 0; i < s.points.size(); ++i) s.points[i].predicted = s.points[i].limit + coefficient * s.model[i];
}

std::vector<double> deviations(const Sweep& s) {
  std::vector<double> d;
  for (const auto& p : s.points) d.push_back(p.deviation);
  return d;
}

}  // namespace

ExpansionConstants calibrate_constants(int n, double sigma, const CalibrationOptions& options) {
  return calibrate_constants(n, sigma, options, nullptr);
}

ExpansionConstants calibrate_constants(int n, double sigma, const CalibrationOptions& options,
                                       CalibrationSweeps* sweeps) {
  if (options.lambdas.size() < 6) throw InputError("calibration needs at least 6 lambda samples");
  const auto space = make_space(n, options.truncation, Symmetry::zonal);
  const Eigen::VectorXd north = SpherePoint::north_pole(n).coords();
  const Eigen::VectorXd south = SpherePoint::south_pole(n).coords();

  ExpansionConstants c;
  c.n = n;
  c.sigma = sigma;
  c.provenance = "calibrated";
  c.lambdas = options.lambdas;
  c.truncation = options.truncation;

  // Single bubbles where Delta K != 0: K = xi_{n+1} + 2 at both poles.
  const SphereFunction tilted = builtin::linear(n, 2.0, 1.0, n + 1);
  const Functional J_tilted(space, tilted, sigma);
  Sweep sn = run_sweep(J_tilted, tilted, {north}, options.lambdas, true);
  Sweep ss = run_sweep(J_tilted, tilted, {south}, options.lambdas, true);
  const Fit fn = fit_through_origin(sn.model, deviations(sn));
  const Fit fs = fit_through_origin(ss.model, deviations(ss));
  c.c2_north = fn.coefficient;
  c.c2_south = fs.coefficient;
  c.c2 = 0.5 * (fn.coefficient + fs.coefficient);
  c.c2_spread = std::abs(fn.coefficient - fs.coefficient) / std::abs(c.c2);
  c.single_residual = std::max(fn.residual, fs.residual);
  c.single_slope = 0.5 * (loglog_slope(options.lambdas, deviations(sn)) + loglog_slope(options.lambdas, deviations(ss)));
  fill_prediction(sn, c.c2);
  fill_prediction(ss, c.c2);

  // Two antipodal bubbles with K = 1: only the interaction term survives.
  const SphereFunction flat = builtin::constant(n, 1.0);
  const Functional J_flat(space, flat, sigma);
  Sweep sp = run_sweep(J_flat, flat, {north, south}, options.lambdas, false);
  const Fit fp = fit_through_origin(sp.model, deviations(sp));
  c.c01 = fp.coefficient;
  c.pair_residual = fp.residual;
  c.pair_exponent = loglog_slope(options.lambdas, deviations(sp));
  fill_prediction(sp, c.c01);

  if (sweeps) {
    sweeps->north = sn.points;
    sweeps->south = ss.points;
    sweeps->pair = sp.points;
  }

  std::ostringstream problems;
  if (!std::isfinite(c.c2) || !std::isfinite(c.c01)) problems << " non-finite constants;";
  if (c.c2_spread > options.residual_threshold) problems << " c2 differs between centers by " << c.c2_spread << ";";
  if (c.single_residual > options.residual_threshold) problems << " c2 fit residual " << c.single_residual << ";";
  if (c.pair_residual > options.residual_threshold) problems << " c01 fit residual " << c.pair_residual << ";";
  if (!problems.str().empty()) throw CalibrationError("calibration failed:" + problems.str(), c);
  return c;
}

}  // namespace fraclab

#include "fraclab/flow.hpp"

#include "fraclab/errors.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace fraclab {

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged:
      return "converged";
    case FlowStatus::concentrated:
      return "concentrated";
    case FlowStatus::max_iterations:
      return "max_iterations";
  }
  return "?";
}

const char* to_string(FlowMethod m) { return m == FlowMethod::steepest ? "steepest" : "lbfgs"; }

FlowMethod parse_flow_method(const std::string& name) {
  if (name == "steepest") return FlowMethod::steepest;
  if (name == "lbfgs") return FlowMethod::lbfgs;
  throw ConfigurationError("unknown flow method '" + name + "' (expected steepest or lbfgs)");
}

namespace {

struct State {
  Eigen::VectorXd x;  // whitened coefficients, |x| = 1
  long double f = 0.0L;  // J in extended precision, so that tiny decreases stay visible
  Eigen::VectorXd g;  // whitened gradient
  double negative_fraction = 0.0;
};

class Trace {
 public:
  Trace(const std::string& path, const std::string& comment) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw ConfigurationError("cannot open trace file " + path);
    if (!comment.empty()) out_ << "# " << comment << '\n';
    out_ << "step,level,gradient_norm,lambda_fit\n";
    out_.precision(17);
  }
  void row(int step, double level, double gnorm, double lambda) {
    if (!out_.is_open()) return;
    out_ << step << ',' << level << ',' << gnorm << ',';
    if (std::isfinite(lambda)) out_ << lambda;
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

bool growing_concentration(const std::vector<FlowCheck>& checks, const FlowOptions& o, double threshold) {
  const auto m = static_cast<std::size_t>(o.growth_checks);
  if (checks.size() < m + 1) return false;
  const FlowCheck& last = checks.back();
  const FlowCheck& first = checks[checks.size() - m - 1];
  if (!(last.lambda > threshold) || !(last.v_norm < o.concentration_v)) return false;
  if (!(last.v_norm < first.v_norm)) return false;
  for (std::size_t k = checks.size() - m; k < checks.size(); ++k) {
    if (!(checks[k].lambda > checks[k - 1].lambda)) return false;
  }
  return true;
}

}  // namespace

FlowResult flow_run(const SpectralField& u0, const Functional& J, const FlowOptions& options) {
  const SpectralSpace& space = J.space();
  const double sigma = J.sigma();
  const double r = J.exponent();
  if (!u0.basis().same_space(*space.basis)) throw ConfigurationError("initial field does not belong to the functional's space");
  if (options.max_iterations < 0 || options.check_interval < 1 || options.max_bubbles < 1 || options.memory < 0) {
    throw ConfigurationError("flow options out of range");
  }
  const Eigen::VectorXd sqrt_w = hsigma_weights(*space.basis, sigma).cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  const auto basis = u0.basis_ptr();
  auto field_of = [&](const Eigen::VectorXd& x) { return SpectralField(basis, inv_sqrt_w.cwiseProduct(x)); };

  auto evaluate = [&](Eigen::VectorXd x) -> State {
    const double nx = x.norm();
    if (!(nx > 0.0)) throw DegenerateInputError("flow iterate vanished");
    x /= nx;
    const SpectralField u = field_of(x);
    const Functional::Evaluation e = J.evaluate(u);
    State s;
    s.f = e.precise_value;
    s.g = sqrt_w.cwiseProduct(J.gradient(u, e).coefficients());
    s.g -= x.dot(s.g) * x;
    const Eigen::VectorXd& w = space.grid->weights;
    double neg = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double m = w[i] * std::pow(std::abs(e.samples[i]), r);
      total += m;
      if (e.samples[i] < 0.0) neg += m;
    }
    s.negative_fraction = total > 0.0 ? neg / total : 0.0;
    s.x = std::move(x);
    return s;
  };

  State cur = evaluate(sqrt_w.cwiseProduct(u0.coefficients()));
  FlowResult res{FlowStatus::max_iterations, field_of(cur.x), {}, {}, std::nullopt, {}, 0.0, 0, {}};
  Trace trace(options.trace_path, options.trace_comment);
  res.level_history.push_back(static_cast<double>(cur.f));
  res.gradient_norm_history.push_back(cur.g.norm());
  double lambda_fit = std::numeric_limits<double>::quiet_NaN();
  trace.row(0, static_cast<double>(cur.f), cur.g.norm(), lambda_fit);

  res.lambda_threshold = options.concentration_lambda;
  if (options.resolution_factor > 0.0) {
    res.lambda_threshold = std::min(res.lambda_threshold, space.truncation() / options.resolution_factor);
  }
  res.lambda_threshold = std::max(res.lambda_threshold, options.lambda_floor);
  std::vector<std::optional<BubbleParams>> previous_fit(static_cast<std::size_t>(options.max_bubbles));
  // Best fit over p = 1..max_bubbles, recorded in res.checks.
  auto check = [&](int step) {
    const SpectralField u = field_of(cur.x);
    std::optional<Representation> best;
    int best_p = 0;
    for (int p = 1; p <= options.max_bubbles; ++p) {
      RepresentationOptions ro;
      ro.max_iterations = 40;
      ro.initial = previous_fit[static_cast<std::size_t>(p - 1)];
      Representation rep = optimal_representation(u, p, J, ro);
      previous_fit[static_cast<std::size_t>(p - 1)] = rep.params;
      // A second bubble has to earn its place.
      if (!best || rep.diagnostics.v_norm < 0.9 * best->diagnostics.v_norm) {
        best = std::move(rep);
        best_p = p;
      }
    }
    double lmax = 0.0;
    for (const Bubble& b : best->params.entries) lmax = std::max(lmax, b.lambda);
    lambda_fit = lmax;
    res.checks.push_back({step, best_p, lmax, best->diagnostics.v_norm});
    return best;
  };
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  const double h0 = 1.0 / (2.0 * static_cast<double>(cur.f));
  double t_prev = h0;
  int negative_run = 0;

  for (int step = 1;; ++step) {
    if (cur.g.norm() < options.gradient_tolerance) {
      res.status = FlowStatus::converged;
      res.message = "gradient norm below tolerance";
      break;
    }
    if (step > options.max_iterations) {
      res.message = "maximum iterations reached";
      break;
    }

    Eigen::VectorXd dir;
    double t = 1.0;
    if (options.method == FlowMethod::lbfgs && !memory.empty()) {
      Eigen::VectorXd q = cur.g;
      std::vector<double> a(memory.size());
      for (std::size_t k = memory.size(); k-- > 0;) {
        a[k] = memory[k].first.dot(q) / memory[k].second.dot(memory[k].first);
        q -= a[k] * memory[k].second;
      }
      const auto& [sl, yl] = memory.back();
      dir = (sl.dot(yl) / yl.squaredNorm()) * q;
      for (std::size_t k = 0; k < memory.size(); ++k) {
        const double b = memory[k].second.dot(dir) / memory[k].second.dot(memory[k].first);
        dir += (a[k] - b) * memory[k].first;
      }
      dir = -dir;
      dir -= cur.x.dot(dir) * cur.x;
      if (!(cur.g.dot(dir) < 0.0)) {
        memory.clear();
        dir = -h0 * cur.g;
      }
    } else {
      dir = -cur.g;
      t = options.method == FlowMethod::lbfgs ? h0 : std::min(2.0 * t_prev, 1e6 * h0);
    }
    const double slope = cur.g.dot(dir);

    bool accepted = false;
    State next;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      try {
        next = evaluate(cur.x + t * dir);
      } catch (const DegenerateInputError&) {
        continue;
      }
      if (next.f < cur.f && next.f <= cur.f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Predicted decrease below rounding of J: keep the level, shrink the gradient.
      if (-t * slope <= 1e-13 * cur.f && next.f <= cur.f && next.g.norm() < 0.9 * cur.g.norm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted && !memory.empty()) {
      memory.clear();  // retry along the gradient
      --step;
      continue;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search found no decrease at gradient norm " << cur.g.norm();
      res.message = os.str();
      break;
    }
    t_prev = t;

    if (next.negative_fraction > options.negative_mass_limit) {
      if (++negative_run >= options.negative_mass_patience) {
        std::ostringstream os;
        os << "flow is leaving the positive cone: " << next.negative_fraction
           << " of int |u|^r is carried by u < 0 for " << negative_run << " consecutive steps";
        throw NumericalError(os.str());
      }
    } else {
      negative_run = 0;
    }

    if (options.method == FlowMethod::lbfgs && options.memory > 0) {
      const Eigen::VectorXd s = next.x - cur.x;
      const Eigen::VectorXd y = next.g - cur.g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        memory.emplace_back(s, y);
        if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
      } else {
        memory.clear();
      }
    }
    cur = std::move(next);
    res.step_count = step;
    res.level_history.push_back(static_cast<double>(cur.f));
    res.gradient_norm_history.push_back(cur.g.norm());

    if (options.detect_concentration && step % options.check_interval == 0) {
      const std::optional<Representation> best = check(step);
      if (growing_concentration(res.checks, options, res.lambda_threshold)) {
        res.status = FlowStatus::concentrated;
        res.bubble_fit = BubbleFit{best->params, best->diagnostics};
        std::ostringstream os;
        os << "concentration: " << res.checks.back().p << " bubble(s), lambda = " << res.checks.back().lambda
           << ", |v| = " << res.checks.back().v_norm;
        res.message = os.str();
        trace.row(step, static_cast<double>(cur.f), cur.g.norm(), lambda_fit);
        break;
      }
    }
    trace.row(step, static_cast<double>(cur.f), cur.g.norm(), lambda_fit);
  }
  if (options.detect_concentration && res.status != FlowStatus::concentrated && options.resolution_factor > 0.0) {
    const std::optional<Representation> best = check(res.step_count);
    const FlowCheck& c = res.checks.back();
    const double limit = std::max(space.truncation() / options.resolution_factor, options.lambda_floor);
    if (c.lambda > limit && c.v_norm < options.concentration_v) {
      res.status = FlowStatus::concentrated;
      res.bubble_fit = BubbleFit{best->params, best->diagnostics};
      std::ostringstream os;
      os << "concentration at the resolution limit: " << c.p << " bubble(s), lambda = " << c.lambda << " > " << limit
         << ", |v| = " << c.v_norm << " (" << res.message << ")";
      res.message = os.str();
    }
  }
  res.final_field = field_of(cur.x);
  return res;
}

FlowResult subcritical_solve(std::shared_ptr<const SpectralSpace> space, const SphereFunction& K, double sigma,
                             double eps, const FlowOptions& options, const std::optional<SpectralField>& start) {
  const int n = space->dimension();
  const double critical = critical_exponent(n, sigma);
  if (!(eps > 0.0) || !(eps < critical - 2.0)) {
    std::ostringstream os;
    os << "subcritical eps = " << eps << " must lie in (0, " << critical - 2.0 << ")";
    throw ParameterDomainError(os.str());
  }
  const Functional J(space, K, sigma, critical - eps);
  FlowOptions o = options;
  o.detect_concentration = false;
  return flow_run(start ? *start : space->constant(1.0), J, o);
}

std::vector<BranchPoint> subcritical_branch(std::shared_ptr<const SpectralSpace> space, const SphereFunction& K,
                                            double sigma, const std::vector<double>& eps_values,
                                            const FlowOptions& options) {
  std::vector<BranchPoint> out;
  std::optional<SpectralField> start;
  for (double eps : eps_values) {
    FlowResult r = subcritical_solve(space, K, sigma, eps, options, start);
    start = r.final_field;
    const double level = r.level_history.back();
    const double ratio = max_mean_ratio(r.final_field, *space);
    out.push_back({eps, std::move(r), level, ratio});
  }
  return out;
}

std::vector<double> geometric_sequence(double first, double last, double ratio) {
  if (!(first >= last) || !(last > 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
    throw ParameterDomainError("geometric sequence needs first >= last > 0 and ratio in (0, 1)");
  }
  std::vector<double> out;
  for (double e = first; e > last * (1.0 + 1e-12); e *= ratio) out.push_back(e);
  out.push_back(last);
  return out;
}

double max_mean_ratio(const SpectralField& u, const SpectralSpace& space) {
  const Eigen::VectorXd s = space.synthesize(u);
  const double mean = space.grid->integrate(s) / sphere_area(space.dimension());
  if (!(mean > 0.0)) throw DegenerateInputError("max/mean ratio of a field with nonpositive mean");
  return s.maxCoeff() / mean;
}

}  // namespace fraclab

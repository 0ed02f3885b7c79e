#include "fraclab/representation.hpp"

#include "fraclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace fraclab {

namespace {

// Nearest point of the set of admissible centers.
Eigen::VectorXd admissible_center(Symmetry s, const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  switch (s) {
    case Symmetry::full:
      return x / x.norm();
    case Symmetry::axial: {
      const double r = std::hypot(x[2], x[3]);
      if (r < 1e-300) {
        a[3] = 1.0;
      } else {
        a[2] = x[2] / r;
        a[3] = x[3] / r;
      }
      return a;
    }
    case Symmetry::zonal:
      a[m - 1] = x[m - 1] >= 0.0 ? 1.0 : -1.0;
      return a;
  }
  return a;
}

struct Columns {
  Eigen::MatrixXd model;  // whitened derivative columns, one block per bubble
  Eigen::VectorXd value;  // whitened model sum alpha_i delta_i
};

// Whitened coefficients (sqrt(W) c) of the model and of its parameter derivatives:
// per bubble d/d alpha, d/d log lambda, d/d theta along each admissible direction.
Columns model_columns(const std::vector<Bubble>& bubbles, const SpectralSpace& space, double sigma,
                      const Eigen::VectorXd& sqrt_w, bool with_derivatives) {
  const QuadratureGrid& g = *space.grid;
  Columns out;
  out.value = Eigen::VectorXd::Zero(space.basis->size());
  std::vector<Eigen::VectorXd> cols;
  for (const Bubble& b : bubbles) {
    const Eigen::MatrixXd dirs =
        with_derivatives ? symmetric_tangent_directions(space.symmetry(), b.center) : Eigen::MatrixXd(b.center.size(), 0);
    if (!with_derivatives) {
      const Eigen::VectorXd v = space.project(bubble_samples(b.center, b.lambda, sigma, g)).coefficients();
      out.value += b.alpha * sqrt_w.cwiseProduct(v);
      continue;
    }
    const BubbleJet jet = bubble_jet(b.center, b.lambda, sigma, g, dirs);
    const Eigen::VectorXd v = sqrt_w.cwiseProduct(space.project(jet.value).coefficients());
    out.value += b.alpha * v;
    cols.push_back(v);
    cols.push_back(b.alpha * b.lambda * sqrt_w.cwiseProduct(space.project(jet.d_lambda).coefficients()));
    for (Eigen::Index c = 0; c < dirs.cols(); ++c) {
      cols.push_back(b.alpha * sqrt_w.cwiseProduct(space.project(jet.d_center.col(c)).coefficients()));
    }
  }
  out.model.resize(out.value.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.model.col(static_cast<Eigen::Index>(j)) = cols[j];
  return out;
}

std::vector<Bubble> apply_step(const std::vector<Bubble>& bubbles, const Eigen::VectorXd& step, Symmetry sym,
                               bool* valid) {
  std::vector<Bubble> out = bubbles;
  Eigen::Index k = 0;
  *valid = true;
  for (Bubble& b : out) {
    const Eigen::MatrixXd dirs = symmetric_tangent_directions(sym, b.center);
    b.alpha += step[k++];
    if (!(b.alpha > 0.0)) *valid = false;
    b.lambda = std::max(1.0, b.lambda * std::exp(step[k++]));
    if (dirs.cols() > 0) {
      const Eigen::VectorXd theta = step.segment(k, dirs.cols());
      k += dirs.cols();
      b.center = admissible_center(sym, exp_map(b.center, dirs * theta));
    }
    if (!std::isfinite(b.lambda)) *valid = false;
  }
  return out;
}

// Best single bubble for the whitened target by a scan over lambda at the
// admissible center nearest to the maximum of the target.
Bubble peak_guess(const SpectralField& target, const SpectralSpace& space, double sigma) {
  const Eigen::VectorXd s = space.synthesize(target);
  Eigen::Index imax = 0;
  s.maxCoeff(&imax);
  const Eigen::VectorXd a = admissible_center(space.symmetry(), space.grid->nodes.col(imax));
  const Eigen::VectorXd ps = space.synthesize(apply_psigma(target, sigma));
  const double E = bubble_energy(space.dimension(), sigma);
  Bubble best{1.0, a, 1.0};
  double best_score = -1.0;
  const double lambda_max = std::max(2.0, static_cast<double>(space.truncation()));
  for (double lambda = 1.0; lambda <= lambda_max; lambda *= std::pow(2.0, 0.25)) {
    const Eigen::VectorXd d = bubble_samples(a, lambda, sigma, *space.grid);
    const double ip = space.grid->weights.dot(d.cwiseProduct(ps));
    if (ip > 0.0 && ip * ip / E > best_score) {
      best_score = ip * ip / E;
      best = {ip / E, a, lambda};
    }
  }
  if (best_score < 0.0) best.alpha = 1e-3;
  return best;
}

struct GaussNewtonOutcome {
  std::vector<Bubble> bubbles;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

GaussNewtonOutcome gauss_newton(const Eigen::VectorXd& target_w, std::vector<Bubble> bubbles, const SpectralSpace& space,
                                double sigma, const Eigen::VectorXd& sqrt_w, const RepresentationOptions& options) {
  GaussNewtonOutcome out;
  const double unorm = target_w.norm();
  Columns cols = model_columns(bubbles, space, sigma, sqrt_w, true);
  double f = (target_w - cols.value).squaredNorm();
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd r = target_w - cols.value;
    Eigen::VectorXd scale = cols.model.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j) scale[j] = scale[j] > 0.0 ? scale[j] : 1.0;
    const Eigen::MatrixXd A = cols.model * scale.cwiseInverse().asDiagonal();
    const Eigen::VectorXd grad = A.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= 1e-11 * unorm) {
      out.converged = true;
      out.message = "orthogonality reached";
      break;
    }
    const Eigen::VectorXd z = A.colPivHouseholderQr().solve(r);
    const Eigen::VectorXd step = z.cwiseQuotient(scale);

    double t = 1.0;
    bool accepted = false;
    std::vector<Bubble> trial;
    double f_trial = f;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      bool valid = false;
      trial = apply_step(bubbles, t * step, space.symmetry(), &valid);
      if (!valid) continue;
      const Columns c = model_columns(trial, space, sigma, sqrt_w, false);
      f_trial = (target_w - c.value).squaredNorm();
      if (f_trial < f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease left: converged if the gradient is at roundoff level.
      out.converged = grad.cwiseAbs().maxCoeff() <= 1e-9 * unorm;
      out.message = out.converged ? "objective at roundoff floor" : "line search failed";
      break;
    }
    const double decrease = f - f_trial;
    bubbles = trial;
    f = f_trial;
    cols = model_columns(bubbles, space, sigma, sqrt_w, true);
    if (decrease <= options.tolerance * unorm * unorm && t == 1.0) {
      const Eigen::VectorXd r2 = target_w - cols.value;
      Eigen::VectorXd s2 = cols.model.colwise().norm().transpose();
      double worst = 0.0;
      for (Eigen::Index j = 0; j < s2.size(); ++j) {
        if (s2[j] > 0.0) worst = std::max(worst, std::abs(cols.model.col(j).dot(r2)) / s2[j]);
      }
      if (worst <= 1e-9 * unorm) {
        out.converged = true;
        out.message = "objective stationary";
        break;
      }
    }
  }
  if (!out.converged && out.message.empty()) out.message = "maximum iterations reached";
  out.bubbles = bubbles;
  return out;
}

}  // namespace

std::vector<SpectralField> v0_span(const BubbleParams& params, const SpectralSpace& space) {
  std::vector<SpectralField> out;
  for (const Bubble& b : params.entries) {
    const Eigen::MatrixXd dirs = symmetric_tangent_directions(space.symmetry(), b.center);
    const BubbleJet jet = bubble_jet(b.center, b.lambda, params.sigma, *space.grid, dirs);
    out.push_back(space.project(jet.value));
    out.push_back(space.project(jet.d_lambda));
    for (Eigen::Index c = 0; c < dirs.cols(); ++c) out.push_back(space.project(jet.d_center.col(c)));
  }
  return out;
}

std::vector<double> v0_residuals(const SpectralField& v, const SpectralField& u, const BubbleParams& params,
                                 const SpectralSpace& space) {
  const double unorm = hsigma_norm(u, params.sigma);
  std::vector<double> out;
  for (const SpectralField& phi : v0_span(params, space)) {
    const double pn = hsigma_norm(phi, params.sigma);
    out.push_back(pn > 0.0 ? std::abs(hsigma_inner(v, phi, params.sigma)) / (pn * unorm) : 0.0);
  }
  return out;
}

Representation optimal_representation(const SpectralField& u, int p, const Functional& J,
                                      const RepresentationOptions& options) {
  const SpectralSpace& space = J.space();
  const double sigma = J.sigma();
  const int n = space.dimension();
  if (p < 1) throw ParameterDomainError("representation needs p >= 1 bubbles");
  if (!u.basis().same_space(*space.basis)) throw ConfigurationError("field does not belong to the functional's space");
  const double unorm = hsigma_norm(u, sigma);
  if (!(unorm > 0.0)) throw DegenerateInputError("cannot represent the zero field");

  const Eigen::VectorXd sqrt_w = hsigma_weights(*space.basis, sigma).cwiseSqrt();
  const Eigen::VectorXd target_w = sqrt_w.cwiseProduct(u.coefficients());

  std::vector<Bubble> bubbles;
  if (options.initial) {
    options.initial->validate();
    if (static_cast<int>(options.initial->size()) != p) throw InputError("initial guess has the wrong number of bubbles");
    for (const Bubble& b : options.initial->entries) {
      bubbles.push_back({b.alpha, admissible_center(space.symmetry(), b.center), b.lambda});
    }
  } else {
    SpectralField rest = u;
    RepresentationOptions single = options;
    single.max_iterations = std::min(options.max_iterations, 30);
    for (int i = 0; i < p; ++i) {
      Bubble guess = peak_guess(rest, space, sigma);
      const Eigen::VectorXd rest_w = sqrt_w.cwiseProduct(rest.coefficients());
      const GaussNewtonOutcome g = gauss_newton(rest_w, {guess}, space, sigma, sqrt_w, single);
      guess = g.bubbles.front();
      bubbles.push_back(guess);
      BubbleParams one{n, sigma, {guess}};
      rest -= bubble_sum(one, space);
    }
  }

  const GaussNewtonOutcome g = gauss_newton(target_w, bubbles, space, sigma, sqrt_w, options);

  BubbleParams found{n, sigma, g.bubbles};
  SpectralField v = u - bubble_sum(found, space);
  Representation rep{g.converged, std::move(found), std::move(v), {}};
  RepresentationDiagnostics& d = rep.diagnostics;
  d.iterations = g.iterations;
  d.message = g.message;
  d.relative_distance = hsigma_norm(rep.v, sigma) / unorm;
  d.v0 = v0_residuals(rep.v, u, rep.params, space);
  d.max_v0 = d.v0.empty() ? 0.0 : *std::max_element(d.v0.begin(), d.v0.end());
  d.v_norm = d.relative_distance;
  d.epsilon = rep.params.epsilon_matrix();
  try {
    d.level = J.value(u);
  } catch (const DegenerateInputError&) {
    d.level = std::numeric_limits<double>::quiet_NaN();
  }
  const double e1 = n / (n - 2.0 * sigma);
  const double e2 = 4.0 * sigma / (n - 2.0 * sigma);
  for (const Bubble& b : rep.params.entries) {
    const double alpha = b.alpha / unorm;
    d.height_mismatch.push_back(std::abs(std::pow(d.level, e1) * std::pow(alpha, e2) * J.K().value(b.center) - 1.0));
  }
  return rep;
}

VbarResult vbar_minimize(const BubbleParams& params, const Functional& J, const VbarOptions& options) {
  params.validate();
  const SpectralSpace& space = J.space();
  const double sigma = J.sigma();
  const SpectralField base = bubble_sum(params, space);
  const Eigen::VectorXd sqrt_w = hsigma_weights(*space.basis, sigma).cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();

  const std::vector<SpectralField> span = v0_span(params, space);
  Eigen::MatrixXd phi(base.coefficients().size(), static_cast<Eigen::Index>(span.size()));
  for (std::size_t j = 0; j < span.size(); ++j) {
    phi.col(static_cast<Eigen::Index>(j)) = sqrt_w.cwiseProduct(span[j].coefficients());
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(phi);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(phi.rows(), phi.cols());
  auto project = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return y - Q * (Q.transpose() * y); };

  auto field_of = [&](const Eigen::VectorXd& y) {
    return SpectralField(base.basis_ptr(), base.coefficients() + inv_sqrt_w.cwiseProduct(y));
  };
  struct Point {
    double f;
    Eigen::VectorXd g;
  };
  auto evaluate = [&](const Eigen::VectorXd& y) -> Point {
    const SpectralField u = field_of(y);
    const Functional::Evaluation e = J.evaluate(u);
    const SpectralField grad = J.gradient(u, e);
    return {e.value, project(sqrt_w.cwiseProduct(grad.coefficients()))};
  };

  const double base_norm = hsigma_norm(base, sigma);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(base.coefficients().size());
  Point cur = evaluate(y);
  VbarResult res{false, SpectralField::zero(base.basis_ptr()), 0.0, 0.0, 0.0, 0.0, 0, {}};
  res.base_level = cur.f;
  // Curvature scale of J across the bubble: its Hessian is about 2 J / |u|^2.
  const double h0 = base_norm * base_norm / (2.0 * cur.f);
  auto small_enough = [&](const Eigen::VectorXd& g) { return g.norm() * h0 <= options.gradient_tolerance * base_norm; };

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (small_enough(cur.g)) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = cur.g;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, yk] = memory[k];
      alphas[k] = s.dot(q) / yk.dot(s);
      q -= alphas[k] * yk;
    }
    double gamma = h0;
    if (!memory.empty()) gamma = memory.back().first.dot(memory.back().second) / memory.back().second.squaredNorm();
    Eigen::VectorXd r = gamma * q;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, yk] = memory[k];
      const double beta = yk.dot(r) / yk.dot(s);
      r += (alphas[k] - beta) * s;
    }
    Eigen::VectorXd dir = project(-r);
    double slope = cur.g.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -h0 * cur.g;
      slope = cur.g.dot(dir);
    }

    double t = 1.0;
    bool accepted = false;
    Point next;
    Eigen::VectorXd y_next;
    for (int h = 0; h < 50; ++h, t *= 0.5) {
      y_next = y + t * dir;
      try {
        next = evaluate(y_next);
      } catch (const DegenerateInputError&) {
        continue;
      }
      const bool armijo = next.f <= cur.f + 1e-4 * t * slope;
      // Near the minimizer J differences drop below rounding; accept steps
      // that do not increase J beyond it and reduce the directional derivative.
      const bool flat = next.f <= cur.f + 1e-14 * std::abs(cur.f) && std::abs(next.g.dot(dir)) <= 0.9 * std::abs(slope);
      if (armijo || flat) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }
    const Eigen::VectorXd s = y_next - y;
    const Eigen::VectorXd yk = next.g - cur.g;
    if (s.dot(yk) > 1e-300) {
      memory.emplace_back(s, yk);
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    y = y_next;
    cur = next;
  }
  if (!res.converged && res.message.empty()) res.message = "maximum iterations reached";
  res.iterations = it;
  res.vbar = SpectralField(base.basis_ptr(), inv_sqrt_w.cwiseProduct(y));
  res.norm = y.norm();
  res.level = cur.f;
  res.projected_gradient = cur.g.norm();
  return res;
}

}  // namespace fraclab

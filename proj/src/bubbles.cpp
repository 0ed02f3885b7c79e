#include "fraclab/bubbles.hpp"

#include "fraclab/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fraclab {

double bubble_constant(int n, double sigma) {
  return std::pow(c_n_sigma(n, sigma), (n - 2.0 * sigma) / (4.0 * sigma));
}

double bubble_energy(int n, double sigma) { return std::pow(beckner_constant(n, sigma), n / (2.0 * sigma)); }

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
    std::ostringstream os;
    os << "bubble concentration lambda = " << lambda << " must be a finite number >= 1";
    throw ParameterDomainError(os.str());
  }
}

}  // namespace

double bubble_value(const Eigen::VectorXd& a, double lambda, double sigma, const Eigen::VectorXd& x) {
  check_lambda(lambda);
  const int n = static_cast<int>(a.size()) - 1;
  const double beta = 0.5 * (n - 2.0 * sigma);
  const double denom = 1.0 + 0.5 * (lambda * lambda - 1.0) * one_minus_cos(x, a);
  return bubble_constant(n, sigma) * std::pow(lambda / denom, beta);
}

Eigen::VectorXd bubble_samples(const Eigen::VectorXd& a, double lambda, double sigma, const QuadratureGrid& grid) {
  check_lambda(lambda);
  if (a.size() != grid.dimension + 1) throw ConfigurationError("bubble center does not match the grid dimension");
  const int n = grid.dimension;
  const double beta = 0.5 * (n - 2.0 * sigma);
  const double cbar = bubble_constant(n, sigma);
  const double h = 0.5 * (lambda * lambda - 1.0);
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double s = 0.5 * (grid.nodes.col(i) - a).squaredNorm();
    out[i] = cbar * std::pow(lambda / (1.0 + h * s), beta);
  }
  return out;
}

SpectralField bubble_field(const Eigen::VectorXd& a, double lambda, double sigma, const SpectralSpace& space) {
  if (!center_compatible(space.symmetry(), a)) {
    throw ConfigurationError(std::string("bubble center is incompatible with a ") + to_string(space.symmetry()) +
                             " space");
  }
  return space.project(bubble_samples(a, lambda, sigma, *space.grid));
}

double bubble_residual(const Eigen::VectorXd& a, double lambda, double sigma, const SpectralSpace& space) {
  const Eigen::VectorXd d = bubble_samples(a, lambda, sigma, *space.grid);
  const int n = space.dimension();
  const double p = (n + 2.0 * sigma) / (n - 2.0 * sigma);
  const Eigen::VectorXd lhs = space.synthesize(apply_psigma(space.project(d), sigma));
  const Eigen::VectorXd rhs = d.array().pow(p).matrix();
  const Eigen::VectorXd& w = space.grid->weights;
  return std::sqrt(w.dot((lhs - rhs).cwiseAbs2()) / w.dot(rhs.cwiseAbs2()));
}

BubbleJet bubble_jet(const Eigen::VectorXd& a, double lambda, double sigma, const QuadratureGrid& grid,
                     const Eigen::MatrixXd& directions) {
  BubbleJet jet;
  jet.value = bubble_samples(a, lambda, sigma, grid);
  const int n = grid.dimension;
  const double beta = 0.5 * (n - 2.0 * sigma);
  const double h = 0.5 * (lambda * lambda - 1.0);
  const Eigen::Index N = jet.value.size();
  jet.d_lambda.resize(N);
  jet.d_center.resize(N, directions.cols());
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto x = grid.nodes.col(i);
    const double s = 0.5 * (x - a).squaredNorm();
    const double denom = 1.0 + h * s;
    const double d = jet.value[i];
    jet.d_lambda[i] = beta * d * (1.0 / lambda - lambda * s / denom);
    for (Eigen::Index c = 0; c < directions.cols(); ++c) {
      jet.d_center(i, c) = beta * d * h * x.dot(directions.col(c)) / denom;
    }
  }
  return jet;
}

double epsilon_ij(const Eigen::VectorXd& ai, double lambda_i, const Eigen::VectorXd& aj, double lambda_j, int n,
                  double sigma) {
  if (!(lambda_i > 0.0) || !(lambda_j > 0.0)) throw ParameterDomainError("epsilon_ij needs positive lambdas");
  if (std::isinf(lambda_i) || std::isinf(lambda_j)) return 0.0;
  const double d = std::acos(std::clamp(ai.dot(aj), -1.0, 1.0));
  const double base = lambda_i / lambda_j + lambda_j / lambda_i + lambda_i * lambda_j * d * d;
  return std::pow(base, -0.5 * (n - 2.0 * sigma));
}

void BubbleParams::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Bubble& b = entries[i];
    std::ostringstream where;
    where << "bubble " << i << ": ";
    if (!(b.alpha > 0.0) || !std::isfinite(b.alpha)) {
      throw InvariantViolation(where.str() + "alpha must be positive and finite");
    }
    if (!(b.lambda >= 1.0)) throw InvariantViolation(where.str() + "lambda must be >= 1");
    if (b.center.size() != n + 1 || std::abs(b.center.norm() - 1.0) > 1e-12) {
      throw InvariantViolation(where.str() + "center is not a unit vector of R^{n+1}");
    }
  }
}

Eigen::MatrixXd BubbleParams::epsilon_matrix() const {
  const auto p = static_cast<Eigen::Index>(entries.size());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double v = epsilon_ij(entries[i].center, entries[i].lambda, entries[j].center, entries[j].lambda, n, sigma);
      e(i, j) = v;
      e(j, i) = v;
    }
  }
  return e;
}

Eigen::VectorXd bubble_sum_samples(const BubbleParams& params, const QuadratureGrid& grid) {
  params.validate();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(grid.size());
  for (const Bubble& b : params.entries) s += b.alpha * bubble_samples(b.center, b.lambda, params.sigma, grid);
  return s;
}

SpectralField bubble_sum(const BubbleParams& params, const SpectralSpace& space) {
  for (const Bubble& b : params.entries) {
    if (!center_compatible(space.symmetry(), b.center)) {
      throw ConfigurationError(std::string("bubble center is incompatible with a ") + to_string(space.symmetry()) +
                               " space");
    }
  }
  return space.project(bubble_sum_samples(params, *space.grid));
}

std::vector<CenterData> center_data(const BubbleParams& params, const SphereFunction& K) {
  std::vector<CenterData> out;
  for (const Bubble& b : params.entries) out.push_back({K.value(b.center), laplacian(K, b.center)});
  return out;
}

namespace {

struct Gammas {
  double g1 = 0.0;
  double g2 = 0.0;
};

Gammas gammas(const BubbleParams& params, const std::vector<CenterData>& data) {
  if (data.size() != params.entries.size()) {
    throw InputError("K data must be given at every bubble center");
  }
  if (params.entries.empty()) throw InputError("expansion of an empty bubble family");
  const int n = params.n;
  const double q = critical_exponent(n, params.sigma);
  const double E = bubble_energy(n, params.sigma);
  Gammas g;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i].k) || !std::isfinite(data[i].laplacian)) {
      throw InputError("K value or Laplacian missing at a bubble center");
    }
    const double a = params.entries[i].alpha;
    g.g1 += E * std::pow(a, q) * data[i].k;
    g.g2 += E * a * a;
  }
  return g;
}

}  // namespace

double expansion_limit(const BubbleParams& params, const std::vector<CenterData>& data) {
  const Gammas g = gammas(params, data);
  const double gamma = (params.n - 2.0 * params.sigma) / params.n;
  return g.g2 / std::pow(g.g1, gamma);
}

double expansion_JK(const BubbleParams& params, const std::vector<CenterData>& data, const ExpansionConstants& c) {
  const Gammas g = gammas(params, data);
  const int n = params.n;
  const double sigma = params.sigma;
  const double q = critical_exponent(n, sigma);
  const double gamma = (n - 2.0 * sigma) / n;
  const std::size_t p = params.entries.size();

  double laplace_term = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const Bubble& b = params.entries[i];
    if (std::isinf(b.lambda)) continue;
    laplace_term += std::pow(b.alpha, q) * data[i].laplacian / (b.lambda * b.lambda);
  }
  double interaction = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      const Bubble& bi = params.entries[i];
      const Bubble& bj = params.entries[j];
      const double eps = epsilon_ij(bi.center, bi.lambda, bj.center, bj.lambda, n, sigma);
      interaction += eps * (bi.alpha * bj.alpha / g.g2 - 2.0 * std::pow(bi.alpha, q - 1.0) * bj.alpha * data[i].k / g.g1);
    }
  }
  const double lead = g.g2 / std::pow(g.g1, gamma);
  return lead * (1.0 - gamma * c.c2 / g.g1 * laplace_term + c.c01 * interaction);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two matching samples");
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::log(x[i]);
    b[i] = std::log(std::abs(y[i]));
  }
  return A.colPivHouseholderQr().solve(b)[1];
}

}  // namespace fraclab

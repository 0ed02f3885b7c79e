#include "fraclab/functional.hpp"

#include "fraclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fraclab {

SphereFunction field_function(const SpectralField& f) {
  SphereFunction k;
  k.dimension = f.dimension();
  k.description = "harmonic series";
  k.value = [f](const Eigen::VectorXd& x) { return f.evaluate(x); };
  return k;
}

namespace {

// Rotation by `angle` in the coordinate plane (i, j).
Eigen::VectorXd rotate(const Eigen::VectorXd& x, int i, int j, double angle) {
  Eigen::VectorXd y = x;
  const double c = std::cos(angle), s = std::sin(angle);
  y[i] = c * x[i] - s * x[j];
  y[j] = s * x[i] + c * x[j];
  return y;
}

}  // namespace

void require_symmetric_k(const SphereFunction& K, const QuadratureGrid& grid) {
  if (grid.symmetry == Symmetry::full) return;
  const int n = grid.dimension;
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 97);
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); i += stride) scale = std::max(scale, std::abs(K.value(grid.nodes.col(i))));
  const double tol = 1e-10 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < grid.size(); i += stride) {
    const Eigen::VectorXd x = grid.nodes.col(static_cast<Eigen::Index>(i));
    const double k0 = K.value(x);
    std::vector<Eigen::VectorXd> images;
    if (grid.symmetry == Symmetry::axial) {
      images = {rotate(x, 0, 1, 0.7), rotate(x, 0, 1, 2.3)};
    } else {
      // Rotations and a reflection fixing the last axis.
      for (int j = 1; j < n; ++j) images.push_back(rotate(x, 0, j, 0.9 + 0.3 * j));
      Eigen::VectorXd r = x;
      r[0] = -r[0];
      images.push_back(r);
    }
    for (const auto& y : images) {
      if (std::abs(K.value(y) - k0) > tol) {
        std::ostringstream os;
        os << "K is not invariant under the symmetry of the " << to_string(grid.symmetry)
           << " grid; use a full grid (n <= 3) or a symmetric K";
        throw InvalidKError(os.str());
      }
    }
  }
}

Functional::Functional(std::shared_ptr<const SpectralSpace> space, SphereFunction K, double sigma, double exponent)
    : space_(std::move(space)), K_(std::move(K)), sigma_(sigma) {
  if (!space_) throw ConfigurationError("functional without a spectral space");
  if (K_.dimension != 0 && K_.dimension != space_->dimension()) {
    throw ConfigurationError("K and the spectral space live on different spheres");
  }
  const double critical = critical_exponent(space_->dimension(), sigma);
  exponent_ = exponent > 0.0 ? exponent : critical;
  if (!(exponent_ > 2.0) || exponent_ > critical + 1e-12) {
    throw ParameterDomainError("functional exponent must lie in (2, 2n/(n - 2 sigma)]");
  }
  const QuadratureGrid& g = *space_->grid;
  k_.resize(g.size());
  for (Eigen::Index i = 0; i < k_.size(); ++i) {
    k_[i] = K_.value(g.nodes.col(i));
    if (!(k_[i] > 0.0)) {
      std::ostringstream os;
      os << "K must be positive on the grid; K = " << k_[i] << " at node " << i;
      throw InvalidKError(os.str());
    }
  }
  require_symmetric_k(K_, g);
}

Functional::Evaluation Functional::evaluate(const SpectralField& u) const {
  if (!u.basis().same_space(*space_->basis)) throw ConfigurationError("field does not belong to the functional's space");
  Evaluation e;
  // Sums in extended precision keep J smooth below the rounding of a double.
  const auto& deg = u.basis().degrees();
  const Eigen::VectorXd spec = psigma_spectrum(u.dimension(), sigma_, u.truncation());
  const Eigen::VectorXd& c = u.coefficients();
  long double num = 0.0L;
  for (Eigen::Index i = 0; i < c.size(); ++i) num += static_cast<long double>(spec[deg[i]]) * c[i] * c[i];
  e.numerator = static_cast<double>(num);
  if (!(e.numerator > 0.0)) throw DegenerateInputError("J_K of the zero field");
  e.samples = space_->synthesize(u);
  const Eigen::VectorXd& w = space_->grid->weights;
  const long double r = exponent_;
  long double d = 0.0L;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double up = e.samples[i];
    if (up > 0.0) d += static_cast<long double>(w[i]) * k_[i] * std::pow(static_cast<long double>(up), r);
  }
  e.denominator = static_cast<double>(d);
  if (!(e.denominator > 1e-14 * std::pow(e.numerator, 0.5 * exponent_))) {
    throw DegenerateInputError("J_K denominator int K u_+^r has collapsed");
  }
  e.precise_value = num / std::pow(d, 2.0L / r);
  e.value = static_cast<double>(e.precise_value);
  return e;
}

SpectralField Functional::gradient(const SpectralField& u) const { return gradient(u, evaluate(u)); }

SpectralField Functional::gradient(const SpectralField& u, const Evaluation& e) const {
  Eigen::VectorXd f(e.samples.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double up = e.samples[i];
    f[i] = up > 0.0 ? k_[i] * std::pow(up, exponent_ - 1.0) : 0.0;
  }
  const SpectralField F = space_->project(f);
  const SpectralField PinvF = apply_psigma_inverse(F, sigma_);
  const double scale = 2.0 / std::pow(e.denominator, 2.0 / exponent_);
  const double ratio = e.numerator / e.denominator;
  return SpectralField(u.basis_ptr(), scale * (u.coefficients() - ratio * PinvF.coefficients()));
}

double Functional::euler_lagrange_residual(const SpectralField& u, double* multiplier) const {
  const Eigen::VectorXd s = space_->synthesize(u);
  Eigen::VectorXd f(s.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = s[i] > 0.0 ? k_[i] * std::pow(s[i], exponent_ - 1.0) : 0.0;
  const Eigen::VectorXd F = space_->project(f).coefficients();
  const Eigen::VectorXd Pu = apply_psigma(u, sigma_).coefficients();
  const double ff = F.squaredNorm();
  if (!(ff > 0.0) || !(Pu.norm() > 0.0)) throw DegenerateInputError("Euler-Lagrange residual of a degenerate field");
  const double mu = Pu.dot(F) / ff;
  if (multiplier) *multiplier = mu;
  return (Pu - mu * F).norm() / Pu.norm();
}

double Functional::negative_mass_fraction(const SpectralField& u) const {
  const Eigen::VectorXd s = space_->synthesize(u);
  const Eigen::VectorXd& w = space_->grid->weights;
  double neg = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double v = w[i] * std::pow(std::abs(s[i]), exponent_);
    total += v;
    if (s[i] < 0.0) neg += v;
  }
  return total > 0.0 ? neg / total : 0.0;
}

KazdanWarner kazdan_warner_integral(const SpectralField& u, const SphereFunction& K, double sigma,
                                    const SpectralSpace& space, int j) {
  const int n = space.dimension();
  if (j < 1 || j > n + 1) throw ParameterDomainError("Kazdan-Warner coordinate index must lie in 1..n+1");
  KazdanWarner out;
  // Odd under a reflection that preserves K and u.
  if (space.symmetry() == Symmetry::zonal && j <= n) return out;
  if (space.symmetry() == Symmetry::axial && j <= 2) return out;

  const double r = critical_exponent(n, sigma);
  const Eigen::VectorXd s = space.synthesize(u);
  const QuadratureGrid& g = *space.grid;
  double raw = 0.0, mass = 0.0, max_grad = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd x = g.nodes.col(i);
    const Eigen::VectorXd grad = riemannian_gradient(K, x);
    max_grad = std::max(max_grad, grad.norm());
    if (s[i] <= 0.0) continue;
    const double p = std::pow(s[i], r);
    // grad xi_j = e_j - xi_j x is tangent, so grad K . grad xi_j = (grad K)_j.
    raw += g.weights[i] * grad[j - 1] * p;
    mass += g.weights[i] * p;
  }
  out.raw = raw;
  out.normalized = (mass > 0.0 && max_grad > 0.0) ? raw / (mass * max_grad) : 0.0;
  return out;
}

}  // namespace fraclab

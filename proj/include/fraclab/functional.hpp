#pragma once

#include "fraclab/spectral.hpp"
#include "fraclab/sphere_function.hpp"

#include <memory>

namespace fraclab {

/// Wraps a field as a SphereFunction (point evaluation through its basis).
SphereFunction field_function(const SpectralField& f);

/// J(u) = <u, u> / (int K u_+^r)^{2/r} on a spectral space, with r the
/// critical exponent 2n/(n - 2 sigma) unless a subcritical one is given.
///
/// K is sampled once at the grid nodes; it must be positive there and
/// invariant under the grid's symmetry group.
class Functional {
 public:
  Functional(std::shared_ptr<const SpectralSpace> space, SphereFunction K, double sigma, double exponent = 0.0);

  struct Evaluation {
    double value = 0.0;        // J(u)
    long double precise_value = 0.0L;  // J(u) before rounding to double
    double numerator = 0.0;    // <u, u>
    double denominator = 0.0;  // int K u_+^r
    Eigen::VectorXd samples;   // u at the nodes
  };

  /// Throws DegenerateInputError if u = 0 or the denominator is at most
  /// 1e-14 |u|^r.
  Evaluation evaluate(const SpectralField& u) const;
  double value(const SpectralField& u) const { return evaluate(u).value; }

  /// H^sigma-metric gradient: <gradient(u), h> = dJ(u)[h] for every h in the space.
  SpectralField gradient(const SpectralField& u) const;
  SpectralField gradient(const SpectralField& u, const Evaluation& e) const;

  /// Relative Euler-Lagrange residual |P u - mu K u_+^{r-1}|_{L^2} / |P u|_{L^2}
  /// with mu fitted by least squares; mu is returned through `multiplier`.
  double euler_lagrange_residual(const SpectralField& u, double* multiplier = nullptr) const;

  /// Fraction of int |u|^r carried by the negative part.
  double negative_mass_fraction(const SpectralField& u) const;

  const SpectralSpace& space() const { return *space_; }
  const std::shared_ptr<const SpectralSpace>& space_ptr() const { return space_; }
  const SphereFunction& K() const { return K_; }
  const Eigen::VectorXd& k_samples() const { return k_; }
  double sigma() const { return sigma_; }
  double exponent() const { return exponent_; }
  int dimension() const { return space_->dimension(); }

 private:
  std::shared_ptr<const SpectralSpace> space_;
  SphereFunction K_;
  double sigma_;
  double exponent_;
  Eigen::VectorXd k_;
};

/// Throws InvalidKError if K changes under rotations that fix the grid's
/// symmetry (checked at a few nodes).
void require_symmetric_k(const SphereFunction& K, const QuadratureGrid& grid);

/// int (grad K . grad xi_j) u_+^r with r critical; j is 1-based.
struct KazdanWarner {
  double raw = 0.0;
  double normalized = 0.0;  // raw / (int u_+^r * max |grad K|)
};
KazdanWarner kazdan_warner_integral(const SpectralField& u, const SphereFunction& K, double sigma,
                                    const SpectralSpace& space, int j);

}  // namespace fraclab

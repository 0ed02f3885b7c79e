#pragma once

#include "fraclab/sphere.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace fraclab {

/// c(n, sigma) = Gamma(n/2 + sigma) / Gamma(n/2 - sigma).
double c_n_sigma(int n, double sigma);

/// Eigenvalue of P_sigma on degree-k harmonics, Gamma(k + n/2 + sigma) / Gamma(k + n/2 - sigma).
/// Throws ParameterDomainError unless 0 < sigma < n/2.
double psigma_eigenvalue(int n, double sigma, int k);

/// Eigenvalues for k = 0..L.
Eigen::VectorXd psigma_spectrum(int n, double sigma, int L);

/// Sharp Sobolev quotient omega_n^{2 sigma / n} c(n, sigma).
double beckner_constant(int n, double sigma);

/// Critical exponent 2n / (n - 2 sigma).
double critical_exponent(int n, double sigma);

/// Orthonormal (in L^2(S^n)) real harmonic basis up to degree L.
///
/// Harmonics are products of one polar factor per nested sphere,
///   (1 - t^2)^{l/2} C_{k-l}^{(l + (d-1)/2)}(t)   on S^d with inner degree l,
/// and a trigonometric factor cos(m phi), sin(m phi) at the bottom. Coefficients
/// are ordered by degree k, then by the inner labels in their own canonical
/// order (inner degree, then m with cos before sin). Each polar factor is
/// normalized by its Gauss-quadrature norm when the basis is built.
class HarmonicBasis {
 public:
  struct PolarLevel {
    int dim = 0;                       // S^dim
    std::vector<int> sub_degree;       // degree of each inner label
    std::vector<long> offset;          // offset[k]: index of (k, first inner label)
    std::vector<int> prefix;           // prefix[k]: #inner labels with degree <= k
    std::vector<int> distinct;         // distinct inner degrees, ascending
    std::vector<std::vector<double>> norm;  // norm[l][k - l]
    int size = 0;                      // number of labels at this level
  };
  struct BaseLevel {
    bool trivial = false;              // zonal: one constant label
    int m_max = 0;
    std::vector<int> m;                // per label
    std::vector<int> is_sine;          // per label
    std::vector<double> norm;          // per label
    int size() const { return static_cast<int>(m.size()); }
  };

  static std::shared_ptr<const HarmonicBasis> create(int n, int L, Symmetry symmetry);

  int dimension() const { return n_; }
  int truncation() const { return L_; }
  Symmetry symmetry() const { return symmetry_; }
  bool zonal() const { return symmetry_ == Symmetry::zonal; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(degree_.size()); }
  const std::vector<int>& degrees() const { return degree_; }
  const std::vector<PolarLevel>& levels() const { return levels_; }
  const BaseLevel& base() const { return base_; }

  /// Values of every basis function at x. Zonal bases read only xi_{n+1};
  /// axial bases ignore the azimuth of (xi_1, xi_2).
  Eigen::VectorXd evaluate_all(const Eigen::VectorXd& x) const;

  /// Human-readable label such as "k=3 l=1 m=1s".
  std::string label(Eigen::Index i) const;

  bool same_space(const HarmonicBasis& other) const {
    return n_ == other.n_ && L_ == other.L_ && symmetry_ == other.symmetry_;
  }

  /// Dimension of the space of harmonics of degree <= L under the symmetry.
  static long space_dimension(int n, int L, Symmetry symmetry);

 private:
  HarmonicBasis(int n, int L, Symmetry symmetry);

  int n_;
  int L_;
  Symmetry symmetry_;
  std::vector<PolarLevel> levels_;  // outermost first
  BaseLevel base_;
  std::vector<int> degree_;
};

/// Normalized Gegenbauer recurrence: C_j^{(mu)}(t) / C_j^{(mu)}(1) for j = 0..count-1.
void gegenbauer_ratio(int count, double mu, double t, double* out);

/// A band-limited function on S^n as coefficients over a HarmonicBasis.
class SpectralField {
 public:
  SpectralField(std::shared_ptr<const HarmonicBasis> basis, Eigen::VectorXd coeffs);
  static SpectralField zero(std::shared_ptr<const HarmonicBasis> basis);

  const HarmonicBasis& basis() const { return *basis_; }
  const std::shared_ptr<const HarmonicBasis>& basis_ptr() const { return basis_; }
  int dimension() const { return basis_->dimension(); }
  int truncation() const { return basis_->truncation(); }
  bool zonal() const { return basis_->zonal(); }

  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  Eigen::VectorXd& coefficients() { return coeffs_; }

  /// Point evaluation through the basis.
  double evaluate(const Eigen::VectorXd& x) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

 private:
  std::shared_ptr<const HarmonicBasis> basis_;
  Eigen::VectorXd coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Throws ConfigurationError when the fields live on different spaces.
void require_same_space(const SpectralField& a, const SpectralField& b);

/// Separable analysis/synthesis between grid samples and coefficients.
class SphericalTransform {
 public:
  /// Throws ConfigurationError if the grid is not of the same dimension and
  /// symmetry or was built for a lower degree than the basis.
  SphericalTransform(std::shared_ptr<const HarmonicBasis> basis, std::shared_ptr<const QuadratureGrid> grid);

  /// Quadrature projection: c_j = sum_i w_i f(x_i) Y_j(x_i).
  SpectralField forward(const Eigen::VectorXd& samples) const;
  Eigen::VectorXd inverse(const SpectralField& field) const;

  const HarmonicBasis& basis() const { return *basis_; }
  const std::shared_ptr<const HarmonicBasis>& basis_ptr() const { return basis_; }
  const QuadratureGrid& grid() const { return *grid_; }

 private:
  Eigen::VectorXd forward_raw(const Eigen::VectorXd& samples) const;

  std::shared_ptr<const HarmonicBasis> basis_;
  std::shared_ptr<const QuadratureGrid> grid_;
  // Fourier tables (row-major M x S): weighted for analysis, plain for synthesis.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> fourier_analysis_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> fourier_synthesis_;
};

/// Basis, grid and transform for one (n, L, symmetry).
struct SpectralSpace {
  std::shared_ptr<const HarmonicBasis> basis;
  std::shared_ptr<const QuadratureGrid> grid;
  std::shared_ptr<const SphericalTransform> transform;

  int dimension() const { return basis->dimension(); }
  int truncation() const { return basis->truncation(); }
  Symmetry symmetry() const { return basis->symmetry(); }

  SpectralField project(const Eigen::VectorXd& samples) const { return transform->forward(samples); }
  Eigen::VectorXd synthesize(const SpectralField& f) const { return transform->inverse(f); }
  SpectralField constant(double c) const;
};

std::shared_ptr<const SpectralSpace> make_space(int n, int L, Symmetry symmetry);

/// Multiplies degree-k coefficients by psigma_eigenvalue(n, sigma, k).
SpectralField apply_psigma(const SpectralField& u, double sigma);
/// Inverse of apply_psigma.
SpectralField apply_psigma_inverse(const SpectralField& u, double sigma);

/// Per-coefficient P_sigma eigenvalues, so that <u, v> = sum w_i u_i v_i.
Eigen::VectorXd hsigma_weights(const HarmonicBasis& basis, double sigma);

/// <u, v> = int v P_sigma u.
double hsigma_inner(const SpectralField& u, const SpectralField& v, double sigma);
double hsigma_norm(const SpectralField& u, double sigma);
double l2_inner(const SpectralField& u, const SpectralField& v);
double l2_norm(const SpectralField& u);

/// int u P_sigma u / (int |u|^{2n/(n-2sigma)})^{(n-2sigma)/n}.
double yamabe_quotient(const SpectralField& u, double sigma, const SpectralSpace& space);

}  // namespace fraclab

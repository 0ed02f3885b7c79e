#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace fraclab {

/// A point of S^n stored as a unit vector of R^{n+1}.
class SpherePoint {
 public:
  /// Throws InvariantViolation unless | |coords| - 1 | <= 1e-12.
  explicit SpherePoint(Eigen::VectorXd coords);

  /// Normalizes `v` first; throws InvariantViolation for a (near) zero vector.
  static SpherePoint normalized(const Eigen::VectorXd& v);
  static SpherePoint north_pole(int n);
  static SpherePoint south_pole(int n);
  /// Unit vector e_j, 1-based as in xi_j.
  static SpherePoint axis(int n, int j);

  int dimension() const { return static_cast<int>(coords_.size()) - 1; }
  const Eigen::VectorXd& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

 private:
  Eigen::VectorXd coords_;
};

/// Geodesic angle in [0, pi]; the inner product is clamped to [-1, 1].
double geodesic_distance(const SpherePoint& x, const SpherePoint& y);

/// 1 - cos d(x, y), evaluated as |x - y|^2 / 2.
double one_minus_cos(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Inverse stereographic projection from the north pole.
SpherePoint stereographic_inverse(const Eigen::VectorXd& x);
/// (2 / (1 + |x|^2))^n.
double jacobian_density(const Eigen::VectorXd& x);

/// Surface area of S^n, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_area(int n);

/// Orthonormal basis of the tangent space at x, as the columns of an
/// (n+1) x n matrix.
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& x);

/// Moves x along the geodesic with initial velocity v (v tangent at x).
Eigen::VectorXd exp_map(const Eigen::VectorXd& x, const Eigen::VectorXd& v);

/// Which functions a grid (and a harmonic basis) can represent.
///   full  - everything (n = 2, 3 only)
///   axial - functions invariant under rotations of the (xi_1, xi_2) plane (n = 3)
///   zonal - functions of xi_{n+1} only (any n >= 2)
enum class Symmetry { full, axial, zonal };

const char* to_string(Symmetry s);

/// True when `x` lies on the set of points that a grid of the given symmetry
/// can host as bubble centers: the poles for zonal, the (xi_3, xi_4) great
/// circle for axial.
bool center_compatible(Symmetry s, const Eigen::VectorXd& x);

/// Unit tangent directions at a compatible center along which the center may
/// move without breaking the symmetry (columns).
Eigen::MatrixXd symmetric_tangent_directions(Symmetry s, const Eigen::VectorXd& x);

/// One-dimensional Gauss rule for the weight (1 - t^2)^a on [-1, 1].
struct PolarRule {
  int level_dim = 0;  // the sphere S^d this level parametrizes
  double exponent = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule with alpha = beta = a and `count` nodes, nodes ascending.
PolarRule gauss_gegenbauer(int count, double a);

/// Product quadrature on S^n.
///
/// Nodes are stored outermost polar level first: index =
/// ((i_0 * Q_1 + i_1) * ...) * M + j where level 0 parametrizes xi_{n+1},
/// level 1 the next coordinate inside the remaining S^{n-1}, ... and j runs
/// over the azimuth of (xi_1, xi_2). Zonal grids have a single polar level
/// and no azimuth (their nodes are representatives on one meridian and carry
/// the measure of the whole latitude sphere); axial grids keep a single
/// azimuth node with weight 2 pi.
struct QuadratureGrid {
  int dimension = 0;
  int degree = 0;  // truncation degree the grid was built for
  Symmetry symmetry = Symmetry::full;
  std::vector<PolarRule> polar;
  int azimuth_count = 0;  // 0 for zonal grids
  std::vector<double> azimuth_weights;
  Eigen::MatrixXd nodes;  // (n+1) x size()
  Eigen::VectorXd weights;

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
  bool zonal() const { return symmetry == Symmetry::zonal; }
  SpherePoint node(std::size_t i) const { return SpherePoint(nodes.col(static_cast<Eigen::Index>(i))); }
  /// Sum of w_i f(x_i).
  double integrate(const Eigen::VectorXd& samples) const;
};

/// Builds a grid for truncation degree L with 2x oversampling in every
/// direction: polar levels carry 2L + 1 Gauss nodes and full grids 4L + 2
/// azimuthal nodes, so products of harmonics up to total degree 4L + 1 are
/// integrated exactly.
///
/// Full grids exist for n in {2, 3}; axial grids for n = 3; zonal grids for
/// every n >= 2.
QuadratureGrid build_grid(int n, int degree, Symmetry symmetry);

}  // namespace fraclab

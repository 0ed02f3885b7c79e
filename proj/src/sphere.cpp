#include "fraclab/sphere.hpp"

#include "fraclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fraclab {

namespace {

constexpr double kUnitTolerance = 1e-12;

void require_same_dimension(const SpherePoint& x, const SpherePoint& y) {
  if (x.dimension() != y.dimension()) {
    throw InvariantViolation("points live on spheres of different dimension");
  }
}

}  // namespace

SpherePoint::SpherePoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw InvariantViolation("a sphere point needs at least two coordinates");
  }
  const double norm = coords_.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitTolerance) {
    throw InvariantViolation("sphere point is not a unit vector (|x| = " + std::to_string(norm) + ")");
  }
}

SpherePoint SpherePoint::normalized(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 1e-300) || !std::isfinite(norm)) {
    throw InvariantViolation("cannot normalize a zero or non-finite vector onto the sphere");
  }
  return SpherePoint(v / norm);
}

SpherePoint SpherePoint::north_pole(int n) { return axis(n, n + 1); }

SpherePoint SpherePoint::south_pole(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
  v[n] = -1.0;
  return SpherePoint(v);
}

SpherePoint SpherePoint::axis(int n, int j) {
  if (j < 1 || j > n + 1) {
    throw ParameterDomainError("axis index out of range");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
  v[j - 1] = 1.0;
  return SpherePoint(v);
}

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  require_same_dimension(x, y);
  const double c = std::clamp(x.coords().dot(y.coords()), -1.0, 1.0);
  return std::acos(c);
}

double one_minus_cos(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return 0.5 * (x - y).squaredNorm();
}

SpherePoint stereographic_inverse(const Eigen::VectorXd& x) {
  const double r2 = x.squaredNorm();
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = 2.0 * x / (1.0 + r2);
  out[x.size()] = (r2 - 1.0) / (r2 + 1.0);
  // The formula is exact up to rounding; renormalize so the unit invariant holds.
  return SpherePoint(out / out.norm());
}

double jacobian_density(const Eigen::VectorXd& x) {
  return std::pow(2.0 / (1.0 + x.squaredNorm()), static_cast<double>(x.size()));
}

double sphere_area(int n) {
  if (n < 0) throw ParameterDomainError("sphere dimension must be nonnegative");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  return q.rightCols(m - 1);
}

Eigen::VectorXd exp_map(const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  const double speed = v.norm();
  if (speed < 1e-300) return x;
  Eigen::VectorXd y = std::cos(speed) * x + std::sin(speed) * (v / speed);
  return y / y.norm();
}

const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::full:
      return "full";
    case Symmetry::axial:
      return "axial";
    case Symmetry::zonal:
      return "zonal";
  }
  return "?";
}

bool center_compatible(Symmetry s, const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  switch (s) {
    case Symmetry::full:
      return true;
    case Symmetry::axial:
      return m == 4 && std::abs(x[0]) < 1e-12 && std::abs(x[1]) < 1e-12;
    case Symmetry::zonal:
      return x.head(m - 1).norm() < 1e-12;
  }
  return false;
}

Eigen::MatrixXd symmetric_tangent_directions(Symmetry s, const Eigen::VectorXd& x) {
  if (!center_compatible(s, x)) {
    throw ConfigurationError(std::string("center is incompatible with a ") + to_string(s) + " grid");
  }
  switch (s) {
    case Symmetry::full:
      return tangent_basis(x);
    case Symmetry::axial: {
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 1);
      d(2, 0) = -x[3];
      d(3, 0) = x[2];
      return d;
    }
    case Symmetry::zonal:
      break;
  }
  return Eigen::MatrixXd(x.size(), 0);
}

double QuadratureGrid::integrate(const Eigen::VectorXd& samples) const {
  if (samples.size() != weights.size()) {
    throw ConfigurationError("sample count does not match the grid");
  }
  return weights.dot(samples);
}

QuadratureGrid build_grid(int n, int degree, Symmetry symmetry) {
  if (n < 2) throw UnsupportedDimensionError("grids require n >= 2");
  if (degree < 1) throw ParameterDomainError("grid degree must be >= 1");
  if (symmetry == Symmetry::full && n > 3) {
    throw UnsupportedDimensionError("full grids are limited to n <= 3; use a zonal grid for n = " +
                                    std::to_string(n));
  }
  if (symmetry == Symmetry::axial && n != 3) {
    throw UnsupportedDimensionError("axial grids exist only for n = 3 (use zonal for n = " +
                                    std::to_string(n) + ")");
  }

  QuadratureGrid g;
  g.dimension = n;
  g.degree = degree;
  g.symmetry = symmetry;
  const int polar_count = 2 * degree + 1;

  if (symmetry == Symmetry::zonal) {
    PolarRule rule = gauss_gegenbauer(polar_count, 0.5 * (n - 2));
    rule.level_dim = n;
    const double latitude_area = sphere_area(n - 1);
    g.nodes.resize(n + 1, polar_count);
    g.weights.resize(polar_count);
    for (int i = 0; i < polar_count; ++i) {
      const double t = rule.nodes[i];
      g.nodes.col(i).setZero();
      g.nodes(0, i) = std::sqrt(std::max(0.0, 1.0 - t * t));
      g.nodes(n, i) = t;
      g.nodes.col(i) /= g.nodes.col(i).norm();
      g.weights[i] = rule.weights[i] * latitude_area;
    }
    g.polar.push_back(std::move(rule));
    g.azimuth_count = 0;
    return g;
  }

  // Polar levels xi_{n+1}, then (for n = 3) the last coordinate of S^2.
  for (int d = n; d >= 2; --d) {
    PolarRule rule = gauss_gegenbauer(polar_count, 0.5 * (d - 2));
    rule.level_dim = d;
    g.polar.push_back(std::move(rule));
  }
  g.azimuth_count = symmetry == Symmetry::axial ? 1 : 4 * degree + 2;
  g.azimuth_weights.assign(g.azimuth_count, 2.0 * std::numbers::pi / g.azimuth_count);

  std::size_t total = g.azimuth_count;
  for (const auto& r : g.polar) total *= r.nodes.size();
  g.nodes.resize(n + 1, static_cast<Eigen::Index>(total));
  g.weights.resize(static_cast<Eigen::Index>(total));

  std::vector<std::size_t> idx(g.polar.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    const std::size_t j = rem % g.azimuth_count;
    rem /= g.azimuth_count;
    for (std::size_t lev = g.polar.size(); lev-- > 0;) {
      idx[lev] = rem % g.polar[lev].nodes.size();
      rem /= g.polar[lev].nodes.size();
    }
    // Peel coordinates from xi_{n+1} downwards.
    Eigen::VectorXd x(n + 1);
    double radius = 1.0;
    double w = g.azimuth_weights[j];
    for (std::size_t lev = 0; lev < g.polar.size(); ++lev) {
      const double t = g.polar[lev].nodes[idx[lev]];
      const int coord = g.polar[lev].level_dim;  // 0-based index of xi_{d+1}
      x[coord] = radius * t;
      radius *= std::sqrt(std::max(0.0, 1.0 - t * t));
      w *= g.polar[lev].weights[idx[lev]];
    }
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / g.azimuth_count;
    x[0] = radius * std::cos(phi);
    x[1] = radius * std::sin(phi);
    g.nodes.col(static_cast<Eigen::Index>(flat)) = x / x.norm();
    g.weights[static_cast<Eigen::Index>(flat)] = w;
  }
  return g;
}

}  // namespace fraclab

#pragma once

#include "fraclab/sphere.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace fraclab {

/// A scalar function on S^n given through an extension to R^{n+1}.
///
/// `gradient` and `hessian` are the ambient derivatives of that extension
/// and are optional; when absent, intrinsic derivatives fall back to central
/// differences along geodesics.
struct SphereFunction {
  int dimension = 0;
  std::string description;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

  double operator()(const Eigen::VectorXd& x) const { return value(x); }
  double operator()(const SpherePoint& x) const { return value(x.coords()); }
  bool has_derivatives() const { return static_cast<bool>(gradient) && static_cast<bool>(hessian); }
};

/// Step used by the finite-difference fallback.
inline constexpr double kGeodesicFdStep = 1e-5;

/// Tangential gradient, returned as an ambient vector orthogonal to x.
Eigen::VectorXd riemannian_gradient(const SphereFunction& f, const Eigen::VectorXd& x);

/// Intrinsic Hessian in the tangent basis `frame` (columns orthonormal, tangent at x).
Eigen::MatrixXd intrinsic_hessian(const SphereFunction& f, const Eigen::VectorXd& x,
                                  const Eigen::MatrixXd& frame);

/// Laplace-Beltrami operator (trace of the intrinsic Hessian).
double laplacian(const SphereFunction& f, const Eigen::VectorXd& x);

namespace builtin {

SphereFunction constant(int n, double c);

/// a + b * xi_j (j is 1-based).
SphereFunction linear(int n, double a, double b, int j);

/// base + eps * (sum_i w_i xi_i^2 - center) with w_{n+1} = 1 and
/// w_j = anisotropy * (j - 1) / (n - 1) for j <= n. With anisotropy = 0 this
/// is the rotationally symmetric two-peak profile, whose minimum set (the
/// equator) is degenerate; a small positive anisotropy makes it a Morse
/// function whose only points of negative Laplacian are the two poles.
SphereFunction two_peak(int n, double base, double eps, double center, double anisotropy);

/// Mean of sum_i w_i xi_i^2 over the sphere for the two_peak weights.
double two_peak_mean(int n, double anisotropy);

/// x -> a + x^T A x for a symmetric (n+1) x (n+1) matrix A.
SphereFunction quadratic(int n, double a, const Eigen::MatrixXd& form);

}  // namespace builtin

}  // namespace fraclab

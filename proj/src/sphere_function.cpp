#include "fraclab/sphere_function.hpp"

#include "fraclab/errors.hpp"

#include <sstream>

namespace fraclab {

Eigen::VectorXd riemannian_gradient(const SphereFunction& f, const Eigen::VectorXd& x) {
  if (f.gradient) {
    const Eigen::VectorXd g = f.gradient(x);
    return g - x.dot(g) * x;
  }
  const Eigen::MatrixXd frame = tangent_basis(x);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const double h = kGeodesicFdStep;
  for (Eigen::Index i = 0; i < frame.cols(); ++i) {
    const Eigen::VectorXd e = frame.col(i);
    const double d = (f.value(exp_map(x, h * e)) - f.value(exp_map(x, -h * e))) / (2 * h);
    g += d * e;
  }
  return g;
}

Eigen::MatrixXd intrinsic_hessian(const SphereFunction& f, const Eigen::VectorXd& x,
                                  const Eigen::MatrixXd& frame) {
  const Eigen::Index m = frame.cols();
  if (f.hessian && f.gradient) {
    // Hess = P D^2 P - (x . grad) P, restricted to the frame.
    const Eigen::MatrixXd amb = f.hessian(x);
    const double radial = x.dot(f.gradient(x));
    return frame.transpose() * amb * frame - radial * Eigen::MatrixXd::Identity(m, m);
  }
  // Exponential coordinates are normal coordinates: second derivatives of
  // f o exp_x at the origin are the intrinsic Hessian.
  const double h = kGeodesicFdStep;
  const double f0 = f.value(x);
  Eigen::MatrixXd hess(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd ei = frame.col(i);
    hess(i, i) = (f.value(exp_map(x, h * ei)) - 2 * f0 + f.value(exp_map(x, -h * ei))) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      const Eigen::VectorXd ej = frame.col(j);
      const double v = (f.value(exp_map(x, h * (ei + ej))) - f.value(exp_map(x, h * (ei - ej))) -
                        f.value(exp_map(x, h * (ej - ei))) + f.value(exp_map(x, -h * (ei + ej)))) /
                       (4 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

double laplacian(const SphereFunction& f, const Eigen::VectorXd& x) {
  return intrinsic_hessian(f, x, tangent_basis(x)).trace();
}

namespace builtin {

SphereFunction constant(int n, double c) {
  SphereFunction f;
  f.dimension = n;
  std::ostringstream os;
  os << "constant(" << c << ")";
  f.description = os.str();
  f.value = [c](const Eigen::VectorXd&) { return c; };
  f.gradient = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.size()); };
  f.hessian = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(x.size(), x.size());
  };
  return f;
}

SphereFunction linear(int n, double a, double b, int j) {
  if (j < 1 || j > n + 1) throw ParameterDomainError("linear K: coordinate index out of range");
  SphereFunction f;
  f.dimension = n;
  std::ostringstream os;
  os << "linear(" << a << " + " << b << " xi_" << j << ")";
  f.description = os.str();
  const int c = j - 1;
  f.value = [a, b, c](const Eigen::VectorXd& x) { return a + b * x[c]; };
  f.gradient = [b, c](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    g[c] = b;
    return g;
  };
  f.hessian = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(x.size(), x.size());
  };
  return f;
}

SphereFunction quadratic(int n, double a, const Eigen::MatrixXd& form) {
  if (form.rows() != n + 1 || form.cols() != n + 1) {
    throw InputError("quadratic K: form must be (n+1) x (n+1)");
  }
  const Eigen::MatrixXd sym = 0.5 * (form + form.transpose());
  SphereFunction f;
  f.dimension = n;
  f.description = "quadratic form";
  f.value = [a, sym](const Eigen::VectorXd& x) { return a + x.dot(sym * x); };
  f.gradient = [sym](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 2.0 * sym * x; };
  f.hessian = [sym](const Eigen::VectorXd&) -> Eigen::MatrixXd { return 2.0 * sym; };
  return f;
}

double two_peak_mean(int n, double anisotropy) {
  double trace = 1.0;
  for (int j = 1; j <= n; ++j) trace += n > 1 ? anisotropy * (j - 1) / (n - 1) : 0.0;
  return trace / (n + 1);
}

SphereFunction two_peak(int n, double base, double eps, double center, double anisotropy) {
  Eigen::MatrixXd form = Eigen::MatrixXd::Zero(n + 1, n + 1);
  form(n, n) = eps;
  for (int j = 1; j <= n; ++j) form(j - 1, j - 1) = n > 1 ? eps * anisotropy * (j - 1) / (n - 1) : 0.0;
  SphereFunction f = quadratic(n, base - eps * center, form);
  std::ostringstream os;
  os << "two-peak(" << base << " + " << eps << " (xi_" << n + 1 << "^2 + aniso " << anisotropy << " - " << center
     << "))";
  f.description = os.str();
  return f;
}

}  // namespace builtin

}  // namespace fraclab

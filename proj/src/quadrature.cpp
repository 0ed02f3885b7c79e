#include "fraclab/errors.hpp"
#include "fraclab/sphere.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace fraclab {

namespace {

// Monic recurrence coefficient beta_k of the Gegenbauer weight (1 - t^2)^a.
double beta(int k, double a) {
  const double kk = k;
  return kk * (kk + 2 * a) / ((2 * kk + 2 * a + 1) * (2 * kk + 2 * a - 1));
}

struct OrthoEval {
  double value;       // p_count(t)
  double derivative;  // p_count'(t)
  double christoffel; // sum_{k < count} p_k(t)^2
};

// Orthonormal polynomials of the weight, evaluated by the three-term recurrence.
OrthoEval evaluate_orthonormal(int count, double a, double mu0, double t) {
  double p_prev = 0.0, dp_prev = 0.0;
  double p = 1.0 / std::sqrt(mu0), dp = 0.0;
  double sum = p * p;
  double sqrt_beta_prev = 0.0;
  for (int k = 0; k < count; ++k) {
    const double sb = std::sqrt(beta(k + 1, a));
    const double p_next = (t * p - sqrt_beta_prev * p_prev) / sb;
    const double dp_next = (p + t * dp - sqrt_beta_prev * dp_prev) / sb;
    p_prev = p;
    dp_prev = dp;
    p = p_next;
    dp = dp_next;
    sqrt_beta_prev = sb;
    if (k + 1 < count) sum += p * p;
  }
  return {p, dp, sum};
}

}  // namespace

PolarRule gauss_gegenbauer(int count, double a) {
  if (count < 1) throw ParameterDomainError("Gauss rule needs at least one node");
  if (a <= -1.0) throw ParameterDomainError("Gegenbauer weight exponent must exceed -1");

  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  PolarRule rule;
  rule.exponent = a;
  rule.nodes.resize(count);
  rule.weights.resize(count);

  if (count == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = mu0;
    return rule;
  }

  // Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(count - 1);
  for (int k = 1; k < count; ++k) sub[k - 1] = std::sqrt(beta(k, a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Jacobi matrix eigenvalue iteration failed");
  }
  const Eigen::VectorXd eig = solver.eigenvalues();

  for (int i = 0; i < count; ++i) {
    double t = eig[i];
    for (int it = 0; it < 3; ++it) {
      const OrthoEval e = evaluate_orthonormal(count, a, mu0, t);
      if (e.derivative == 0.0) break;
      const double step = e.value / e.derivative;
      t -= step;
      if (std::abs(step) < 1e-17) break;
    }
    rule.nodes[i] = t;
  }
  // The weight is even: symmetrize nodes exactly.
  for (int i = 0; i < count / 2; ++i) {
    const double t = 0.5 * (rule.nodes[count - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -t;
    rule.nodes[count - 1 - i] = t;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;

  for (int i = 0; i < count; ++i) {
    rule.weights[i] = 1.0 / evaluate_orthonormal(count, a, mu0, rule.nodes[i]).christoffel;
  }
  for (int i = 0; i < count / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[count - 1 - i]);
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  return rule;
}

}  // namespace fraclab

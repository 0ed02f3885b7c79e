#pragma once

#include "fraclab/errors.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/sphere_function.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fraclab {

/// c_bar = c(n, sigma)^{(n - 2 sigma) / (4 sigma)}, the height of delta_{a,1}.
double bubble_constant(int n, double sigma);

/// E = int delta P_sigma delta = S^{n / (2 sigma)} with S the Beckner constant.
double bubble_energy(int n, double sigma);

/// delta_{a,lambda}(x) = c_bar lambda^beta / (1 + (lambda^2 - 1)/2 (1 - cos d(x, a)))^beta,
/// beta = (n - 2 sigma) / 2. Throws ParameterDomainError for lambda < 1.
double bubble_value(const Eigen::VectorXd& a, double lambda, double sigma, const Eigen::VectorXd& x);

/// Bubble values at every grid node.
Eigen::VectorXd bubble_samples(const Eigen::VectorXd& a, double lambda, double sigma, const QuadratureGrid& grid);

/// Projection of the bubble onto the space's harmonics. The center must be
/// compatible with the space's symmetry.
SpectralField bubble_field(const Eigen::VectorXd& a, double lambda, double sigma, const SpectralSpace& space);

/// |P_sigma Pi delta - delta^{(n+2s)/(n-2s)}| / |delta^{(n+2s)/(n-2s)}| in L^2 by grid
/// quadrature, with Pi the projection onto the space. Projection commutes with
/// P_sigma, so the residual measures the truncation tail of delta.
double bubble_residual(const Eigen::VectorXd& a, double lambda, double sigma, const SpectralSpace& space);

/// Samples of d delta / d lambda and of the derivatives along the columns of
/// `directions` (tangent vectors at a, the center moving along geodesics).
struct BubbleJet {
  Eigen::VectorXd value;
  Eigen::VectorXd d_lambda;
  Eigen::MatrixXd d_center;  // one column per direction
};
BubbleJet bubble_jet(const Eigen::VectorXd& a, double lambda, double sigma, const QuadratureGrid& grid,
                     const Eigen::MatrixXd& directions);

/// (lambda_i / lambda_j + lambda_j / lambda_i + lambda_i lambda_j d^2)^{-(n - 2 sigma)/2}.
double epsilon_ij(const Eigen::VectorXd& ai, double lambda_i, const Eigen::VectorXd& aj, double lambda_j, int n,
                  double sigma);

struct Bubble {
  double alpha = 1.0;
  Eigen::VectorXd center;
  double lambda = 1.0;
};

/// A family sum_i alpha_i delta_{a_i, lambda_i}. Concentration parameters
/// equal to 1 are accepted (the constant bubble).
struct BubbleParams {
  int n = 0;
  double sigma = 0.0;
  std::vector<Bubble> entries;

  std::size_t size() const { return entries.size(); }
  /// Throws InvariantViolation for alpha <= 0, lambda < 1, non-unit centers.
  void validate() const;
  /// Symmetric matrix of epsilon_ij (zero diagonal).
  Eigen::MatrixXd epsilon_matrix() const;
};

SpectralField bubble_sum(const BubbleParams& params, const SpectralSpace& space);
Eigen::VectorXd bubble_sum_samples(const BubbleParams& params, const QuadratureGrid& grid);

/// K data needed by the expansion at each center.
struct CenterData {
  double k = 0.0;
  double laplacian = 0.0;
};

/// Evaluates K and its Laplacian at every center of `params`.
std::vector<CenterData> center_data(const BubbleParams& params, const SphereFunction& K);

struct ExpansionConstants {
  int n = 0;
  double sigma = 0.0;
  double c2 = 0.0;
  double c01 = 0.0;
  std::string provenance;  // "calibrated" or "manual"
  // Fit diagnostics.
  double c2_north = 0.0;
  double c2_south = 0.0;
  double c2_spread = 0.0;        // |c2_north - c2_south| / mean
  double single_slope = 0.0;     // log-log slope of the single-bubble deviation
  double single_residual = 0.0;  // relative LS residual of the c2 fit
  double pair_exponent = 0.0;    // log-log slope of the two-bubble deviation
  double pair_residual = 0.0;
  std::vector<double> lambdas;
  int truncation = 0;
};

/// Leading terms (v = 0) of the expansion of J_K at sum alpha_i delta_i:
///   (Gamma_2 / Gamma_1^{(n-2s)/n}) [1 - (n-2s)/n c2/Gamma_1 sum alpha_i^q DeltaK(a_i) / lambda_i^2
///     + sum_{i != j} c01 eps_ij (alpha_i alpha_j / Gamma_2 - 2 alpha_i^{q-1} alpha_j K(a_i) / Gamma_1)]
/// with Gamma_1 = E sum alpha_i^q K(a_i), Gamma_2 = E sum alpha_i^2. Infinite
/// lambdas are allowed. Throws InputError if `data` does not match `params`.
double expansion_JK(const BubbleParams& params, const std::vector<CenterData>& data, const ExpansionConstants& c);

/// The lambda -> infinity limit of expansion_JK.
double expansion_limit(const BubbleParams& params, const std::vector<CenterData>& data);

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, ExpansionConstants diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const ExpansionConstants& diagnostics() const { return diagnostics_; }

 private:
  ExpansionConstants diagnostics_;
};

struct CalibrationOptions {
  int truncation = 512;
  std::vector<double> lambdas = {8.0, 11.3137084989848, 16.0, 22.6274169979695, 32.0, 45.254833995939, 64.0};
  double residual_threshold = 0.05;
};

/// Fits c2 from single-bubble sweeps of K = xi_{n+1} + 2 at both poles and
/// c01 from a two-bubble sweep (antipodal bubbles, K = 1), all on zonal
/// spaces of the given truncation. Throws
/// CalibrationError when the c2 values from the two poles disagree by more
/// than the threshold or a fit residual exceeds it.
ExpansionConstants calibrate_constants(int n, double sigma, const CalibrationOptions& options = {});

/// Sweep data used by calibrate_constants, exposed for reporting.
struct SweepPoint {
  double lambda = 0.0;
  double value = 0.0;      // J_K at the configuration
  double limit = 0.0;      // lambda -> infinity limit
  double deviation = 0.0;  // value - limit
  double predicted = 0.0;  // expansion with the fitted constants
};
struct CalibrationSweeps {
  std::vector<SweepPoint> north;
  std::vector<SweepPoint> south;
  std::vector<SweepPoint> pair;
};
ExpansionConstants calibrate_constants(int n, double sigma, const CalibrationOptions& options,
                                       CalibrationSweeps* sweeps);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fraclab

#pragma once

#include "fraclab/representation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fraclab {

enum class FlowStatus { converged, concentrated, max_iterations };
const char* to_string(FlowStatus s);

enum class FlowMethod { steepest, lbfgs };
const char* to_string(FlowMethod m);
/// Accepts "steepest" and "lbfgs"; throws ConfigurationError otherwise.
FlowMethod parse_flow_method(const std::string& name);

struct FlowOptions {
  FlowMethod method = FlowMethod::lbfgs;
  int max_iterations = 4000;
  double gradient_tolerance = 1e-8;  // H^sigma norm of J' at |u| = 1
  int memory = 8;
  // Concentration detection.
  int check_interval = 10;
  int max_bubbles = 2;
  double concentration_lambda = 1e3;
  // Bubbles with lambda near the truncation are unresolved: the threshold
  // used is min(concentration_lambda, L / resolution_factor); 0 disables it.
  // Either way it is at least lambda_floor.
  double resolution_factor = 8.0;
  double lambda_floor = 4.0;
  int growth_checks = 3;
  double concentration_v = 0.1;
  bool detect_concentration = true;
  // Leaving the positive cone.
  double negative_mass_limit = 0.01;
  int negative_mass_patience = 5;
  std::string trace_path;  // CSV rows step,level,gradient_norm,lambda_fit
  std::string trace_comment;  // written first as a '#' line when not empty
};

struct BubbleFit {
  BubbleParams params;
  RepresentationDiagnostics diagnostics;
};

/// One concentration check: the best fit over p = 1..max_bubbles.
struct FlowCheck {
  int step = 0;
  int p = 0;
  double lambda = 0.0;  // largest fitted lambda
  double v_norm = 0.0;
};

struct FlowResult {
  FlowStatus status = FlowStatus::max_iterations;
  SpectralField final_field;  // normalized, |u| = 1 in H^sigma
  std::vector<double> level_history;
  std::vector<double> gradient_norm_history;
  std::optional<BubbleFit> bubble_fit;  // set when concentrated
  std::vector<FlowCheck> checks;
  double lambda_threshold = 0.0;  // threshold actually used
  int step_count = 0;
  std::string message;
};

/// Descent flow of J on the unit sphere of H^sigma. Every accepted step
/// satisfies an Armijo condition, or leaves J unchanged and shrinks the gradient
/// when the predicted decrease is below rounding; level_history never increases.
/// Concentrated: the fitted lambda exceeds the threshold, grew over the last
/// growth_checks checks, and |v| < concentration_v with a net decrease over
/// them. A flow that stops (converges or stalls) with a fitted lambda above
/// max(L / resolution_factor, lambda_floor) is also reported as concentrated.
/// Throws NumericalError when more than negative_mass_limit of int |u|^r sits
/// on u < 0 for negative_mass_patience consecutive steps.
FlowResult flow_run(const SpectralField& u0, const Functional& J, const FlowOptions& options = {});

/// Flow for the subcritical functional with exponent 2n/(n - 2 sigma) - eps,
/// started from `start` or from the constant 1.
FlowResult subcritical_solve(std::shared_ptr<const SpectralSpace> space, const SphereFunction& K, double sigma,
                             double eps, const FlowOptions& options = {},
                             const std::optional<SpectralField>& start = std::nullopt);

struct BranchPoint {
  double eps = 0.0;
  FlowResult result;
  double level = 0.0;
  double max_mean_ratio = 0.0;  // max u / mean u on the grid
};

/// Continuation in eps, each solve warm-started from the previous one.
std::vector<BranchPoint> subcritical_branch(std::shared_ptr<const SpectralSpace> space, const SphereFunction& K,
                                            double sigma, const std::vector<double>& eps_values,
                                            const FlowOptions& options = {});

/// first, first * ratio, ... while >= last (ratio in (0, 1)); last is always included.
std::vector<double> geometric_sequence(double first, double last, double ratio);

/// max u / (int u / |S^n|) over the grid.
double max_mean_ratio(const SpectralField& u, const SpectralSpace& space);

}  // namespace fraclab

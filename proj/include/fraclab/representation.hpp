#pragma once

#include "fraclab/bubbles.hpp"
#include "fraclab/functional.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fraclab {

/// The fields delta_i, d delta_i / d lambda_i and d delta_i / d a_i (one per
/// tangent direction allowed by the space's symmetry), projected onto the space.
std::vector<SpectralField> v0_span(const BubbleParams& params, const SpectralSpace& space);

/// |<v, phi>| / (|phi| |u|) for every phi of v0_span, in the H^sigma inner product.
std::vector<double> v0_residuals(const SpectralField& v, const SpectralField& u, const BubbleParams& params,
                                 const SpectralSpace& space);

struct RepresentationOptions {
  int max_iterations = 200;
  double tolerance = 1e-14;  // relative objective decrease that ends the iteration
  int max_halvings = 40;
  std::optional<BubbleParams> initial;
};

struct RepresentationDiagnostics {
  int iterations = 0;
  double relative_distance = 0.0;  // |u - sum alpha_i delta_i| / |u|
  std::vector<double> v0;          // v0_residuals
  double max_v0 = 0.0;
  // Membership numbers of V(p, eps), computed with u scaled to |u| = 1.
  double v_norm = 0.0;
  Eigen::MatrixXd epsilon;
  std::vector<double> height_mismatch;  // |J(u)^{n/(n-2s)} alpha_i^{4s/(n-2s)} K(a_i) - 1|
  double level = 0.0;                   // J_K(u)
  std::string message;
};

/// Outcome of the projection onto sums of p bubbles. `converged` is false
/// when Gauss-Newton ran out of iterations; the best iterate is still returned.
struct Representation {
  bool converged = false;
  BubbleParams params;  // alphas refer to u as given
  SpectralField v;
  RepresentationDiagnostics diagnostics;
};

/// Damped Gauss-Newton for min |u - sum alpha_i delta_{a_i, lambda_i}| in H^sigma.
/// Centers move only along directions compatible with the space's symmetry.
/// Starts from options.initial or from peaks of u (greedy for p >= 2).
Representation optimal_representation(const SpectralField& u, int p, const Functional& J,
                                      const RepresentationOptions& options = {});

struct VbarOptions {
  int max_iterations = 400;
  double gradient_tolerance = 1e-10;  // on the projected H^sigma gradient of J
  int memory = 12;
};

struct VbarResult {
  bool converged = false;
  SpectralField vbar;
  double norm = 0.0;  // |vbar| in H^sigma
  double base_level = 0.0;
  double level = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
  std::string message;
};

/// Minimizes J(sum alpha_i delta_i + v) over v in the truncated space that are
/// H^sigma-orthogonal to v0_span(params), by L-BFGS in the H^sigma metric.
VbarResult vbar_minimize(const BubbleParams& params, const Functional& J, const VbarOptions& options = {});

}  // namespace fraclab

#include <doctest.h>

#include "fraclab/bubbles.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/functional.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace fraclab;

namespace {

double beckner_oracle(int n, double s) {
  const double omega = 2.0 * std::pow(std::numbers::pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
  return std::pow(omega, 2.0 * s / n) * std::tgamma(n / 2.0 + s) / std::tgamma(n / 2.0 - s);
}

SpectralField random_low_field(const SpectralSpace& space, int max_degree, double size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.basis->size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (space.basis->degrees()[i] <= max_degree && space.basis->degrees()[i] > 0) c[i] = size * g(rng);
  }
  return SpectralField(space.basis, c);
}

}  // namespace

TEST_CASE("J of a constant is the Beckner constant when K = 1") {
  for (auto [n, s] : {std::pair{3, 0.1}, {3, 0.25}, {3, 0.4}, {4, 0.9}, {6, 2.2}}) {
    const auto space = make_space(n, 8, Symmetry::zonal);
    const Functional J(space, builtin::constant(n, 1.0), s);
    CHECK(J.value(space->constant(1.7)) == doctest::Approx(beckner_oracle(n, s)).epsilon(1e-12));
    CHECK(yamabe_quotient(space->constant(0.3), s, *space) == doctest::Approx(beckner_oracle(n, s)).epsilon(1e-12));
    // K = c scales J by c^{-(n-2s)/n}.
    const Functional J3(space, builtin::constant(n, 3.0), s);
    CHECK(J3.value(space->constant(1.0)) ==
          doctest::Approx(beckner_oracle(n, s) * std::pow(3.0, -(n - 2 * s) / n)).epsilon(1e-12));
  }
}

TEST_CASE("J is scale invariant and its gradient matches finite differences") {
  std::mt19937_64 rng(7);
  const auto space = make_space(3, 10, Symmetry::full);
  const auto K = builtin::linear(3, 2.0, 0.5, 2);
  const Functional J(space, K, 0.3);
  SpectralField u = space->constant(1.0) + random_low_field(*space, 4, 0.1, rng);
  CHECK(J.value(2.5 * u) == doctest::Approx(J.value(u)).epsilon(1e-13));

  const SpectralField g = J.gradient(u);
  // Orthogonal to u in H^sigma (J is 0-homogeneous).
  CHECK(std::abs(hsigma_inner(g, u, 0.3)) < 1e-12 * hsigma_norm(g, 0.3) * hsigma_norm(u, 0.3));
  for (int trial = 0; trial < 3; ++trial) {
    const SpectralField h = random_low_field(*space, 6, 1.0, rng);
    const double t = 1e-5;
    const double fd = (J.value(u + t * h) - J.value(u - t * h)) / (2 * t);
    CHECK(hsigma_inner(g, h, 0.3) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("bubbles are critical for K = 1 and have level S") {
  const auto space = make_space(3, 64, Symmetry::zonal);
  const Functional J(space, builtin::constant(3, 1.0), 0.25);
  const SpectralField d = bubble_field(SpherePoint::south_pole(3).coords(), 4.0, 0.25, *space);
  CHECK(J.value(d) == doctest::Approx(beckner_oracle(3, 0.25)).epsilon(1e-10));
  CHECK(hsigma_norm(J.gradient(d), 0.25) < 1e-9);
  double mu = 0.0;
  CHECK(J.euler_lagrange_residual(d, &mu) < 1e-9);
  CHECK(mu == doctest::Approx(1.0).epsilon(1e-9));  // P delta = delta^{(n+2s)/(n-2s)}
  CHECK(J.negative_mass_fraction(d) == 0.0);
  CHECK(J.negative_mass_fraction(-1.0 * d) == 1.0);
}

TEST_CASE("degenerate input and invalid K") {
  const auto space = make_space(3, 6, Symmetry::zonal);
  const Functional J(space, builtin::constant(3, 1.0), 0.25);
  CHECK_THROWS_AS(J.value(space->constant(0.0)), DegenerateInputError);
  CHECK_THROWS_AS(J.value(space->constant(-1.0)), DegenerateInputError);
  CHECK_THROWS_AS(Functional(space, builtin::linear(3, 0.5, 1.0, 4), 0.25), InvalidKError);
  // Not zonal.
  CHECK_THROWS_AS(Functional(space, builtin::linear(3, 2.0, 1.0, 1), 0.25), InvalidKError);
}

TEST_CASE("Kazdan-Warner integral of a bubble at the pole") {
  const int n = 3;
  const double s = 0.25;
  const double lambda = 2.0;
  const auto space = make_space(n, 64, Symmetry::zonal);
  const auto K = builtin::linear(n, 2.0, 1.0, n + 1);
  const SpectralField d = bubble_field(SpherePoint::north_pole(n).coords(), lambda, s, *space);
  const KazdanWarner w = kazdan_warner_integral(d, K, s, *space, n + 1);

  // omega_{n-1} int_{-1}^{1} (1 - t^2) delta(t)^r (1 - t^2)^{(n-2)/2} dt.
  const double r = 2.0 * n / (n - 2 * s);
  const double cbar = std::pow(std::tgamma(n / 2.0 + s) / std::tgamma(n / 2.0 - s), (n - 2 * s) / (4 * s));
  const double omega = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
  auto f = [&](double t) {
    const double delta = cbar * std::pow(lambda / (1.0 + (lambda * lambda - 1.0) / 2.0 * (1.0 - t)), (n - 2 * s) / 2);
    return (1.0 - t * t) * std::pow(delta, r) * std::pow(1.0 - t * t, (n - 2) / 2.0);
  };
  const double oracle = omega * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 15, 1e-14);
  CHECK(w.raw > 0.0);
  CHECK(w.raw == doctest::Approx(oracle).epsilon(1e-10));
  for (int j = 1; j <= n; ++j) CHECK(kazdan_warner_integral(d, K, s, *space, j).raw == 0.0);
  CHECK_THROWS_AS(kazdan_warner_integral(d, K, s, *space, 0), ParameterDomainError);
}

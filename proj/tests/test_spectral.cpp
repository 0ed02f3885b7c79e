#include <doctest.h>

#include "fraclab/errors.hpp"
#include "fraclab/spectral.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <random>

using namespace fraclab;

namespace {

SpectralField random_field(const std::shared_ptr<const HarmonicBasis>& basis, int max_degree, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (basis->degrees()[i] <= max_degree) c[i] = g(rng);
  }
  return SpectralField(basis, c);
}

Eigen::VectorXd coordinate_samples(const QuadratureGrid& g, int coord) {
  Eigen::VectorXd s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) s[i] = g.nodes(coord, static_cast<Eigen::Index>(i));
  return s;
}

}  // namespace

TEST_CASE("P_sigma eigenvalues") {
  CHECK(psigma_eigenvalue(3, 0.25, 0) == doctest::Approx(std::tgamma(1.75) / std::tgamma(1.25)).epsilon(1e-15));
  CHECK(psigma_eigenvalue(3, 0.25, 0) == c_n_sigma(3, 0.25));
  for (int n : {3, 4, 7}) {
    for (int k = 0; k <= 10; ++k) {
      const double closed = k * (k + n - 1.0) + n * (n - 2.0) / 4.0;
      CHECK(psigma_eigenvalue(n, 1.0, k) == doctest::Approx(closed).epsilon(1e-13));
    }
  }
  for (int k = 0; k < 50; ++k) CHECK(psigma_eigenvalue(3, 0.4, k + 1) > psigma_eigenvalue(3, 0.4, k));
  const double ratio = psigma_eigenvalue(3, 0.25, 200) / psigma_eigenvalue(3, 0.25, 0);
  const double scaled = ratio / std::pow(200.0, 0.5);
  CHECK(scaled > 0.9);
  CHECK(scaled < 1.1);
  {
    using big = boost::multiprecision::cpp_dec_float_50;
    const big exact = boost::math::tgamma(big(5001.75)) / boost::math::tgamma(big(5001.25));
    CHECK(psigma_eigenvalue(3, 0.25, 5000) == doctest::Approx(exact.convert_to<double>()).epsilon(1e-13));
  }
  CHECK_THROWS_AS(psigma_eigenvalue(3, 1.5, 0), ParameterDomainError);
  CHECK_THROWS_AS(psigma_eigenvalue(3, 0.0, 0), ParameterDomainError);
}

TEST_CASE("harmonic space dimensions") {
  for (int L : {0, 1, 5, 12}) {
    CHECK(HarmonicBasis::create(2, L, Symmetry::full)->size() == HarmonicBasis::space_dimension(2, L, Symmetry::full));
    CHECK(HarmonicBasis::create(3, L, Symmetry::full)->size() == HarmonicBasis::space_dimension(3, L, Symmetry::full));
    CHECK(HarmonicBasis::create(3, L, Symmetry::axial)->size() ==
          HarmonicBasis::space_dimension(3, L, Symmetry::axial));
    CHECK(HarmonicBasis::create(5, L, Symmetry::zonal)->size() == L + 1);
  }
  // Degree-k harmonics on S^3 span (k+1)^2 dimensions.
  const auto b = HarmonicBasis::create(3, 6, Symmetry::full);
  for (int k = 0; k <= 6; ++k) {
    long count = 0;
    for (int d : b->degrees()) count += d == k ? 1 : 0;
    CHECK(count == (k + 1) * (k + 1));
  }
  CHECK_THROWS_AS(HarmonicBasis::create(4, 3, Symmetry::full), UnsupportedDimensionError);
}

TEST_CASE("quadrature reproduces the identity Gram matrix") {
  struct Case {
    int n;
    int L;
    Symmetry s;
  };
  for (const Case c : {Case{2, 10, Symmetry::full}, Case{3, 8, Symmetry::full}, Case{3, 12, Symmetry::axial},
                       Case{3, 30, Symmetry::zonal}, Case{4, 30, Symmetry::zonal}, Case{9, 25, Symmetry::zonal}}) {
    const auto basis = HarmonicBasis::create(c.n, c.L, c.s);
    const QuadratureGrid g = build_grid(c.n, c.L, c.s);
    Eigen::MatrixXd vals(g.size(), basis->size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      vals.row(static_cast<Eigen::Index>(i)) = basis->evaluate_all(g.nodes.col(static_cast<Eigen::Index>(i)));
    }
    const Eigen::MatrixXd gram = vals.transpose() * g.weights.asDiagonal() * vals;
    const double err = (gram - Eigen::MatrixXd::Identity(basis->size(), basis->size())).cwiseAbs().maxCoeff();
    CHECK(err < 1e-10);
  }
}

TEST_CASE("transforms match pointwise evaluation and round-trip") {
  std::mt19937_64 rng(2024);
  for (auto [n, L, s] : {std::tuple{2, 12, Symmetry::full}, std::tuple{3, 10, Symmetry::full},
                         std::tuple{3, 16, Symmetry::axial}, std::tuple{5, 40, Symmetry::zonal}}) {
    const auto space = make_space(n, L, s);
    const SpectralField f = random_field(space->basis, L / 2, rng);
    const Eigen::VectorXd samples = space->synthesize(f);
    for (std::size_t i = 0; i < space->grid->size(); i += 37) {
      CHECK(samples[static_cast<Eigen::Index>(i)] ==
            doctest::Approx(f.evaluate(space->grid->nodes.col(static_cast<Eigen::Index>(i)))).epsilon(1e-11));
    }
    const SpectralField back = space->project(samples);
    CHECK((back.coefficients() - f.coefficients()).norm() < 1e-10 * f.coefficients().norm());
    // Parseval.
    const Eigen::VectorXd sq = samples.array().square().matrix();
    CHECK(space->grid->integrate(sq) == doctest::Approx(f.coefficients().squaredNorm()).epsilon(1e-10));

    // Full degree-L content also round-trips.
    const SpectralField full = random_field(space->basis, L, rng);
    const SpectralField again = space->project(space->synthesize(full));
    CHECK((again.coefficients() - full.coefficients()).norm() < 1e-10 * full.coefficients().norm());
  }
}

TEST_CASE("constants and coordinate functions") {
  const auto space = make_space(3, 6, Symmetry::full);
  const SpectralField one = space->project(Eigen::VectorXd::Ones(space->grid->size()));
  CHECK(one.coefficients()[0] == doctest::Approx(std::sqrt(sphere_area(3))).epsilon(1e-13));
  CHECK(one.coefficients().tail(one.coefficients().size() - 1).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((one.coefficients() - space->constant(1.0).coefficients()).norm() < 1e-13);

  for (int coord = 0; coord < 4; ++coord) {
    const SpectralField x = space->project(coordinate_samples(*space->grid, coord));
    double off = 0.0, on = 0.0;
    for (Eigen::Index i = 0; i < x.coefficients().size(); ++i) {
      (space->basis->degrees()[i] == 1 ? on : off) += x.coefficients()[i] * x.coefficients()[i];
    }
    CHECK(off < 1e-26);
    CHECK(on == doctest::Approx(sphere_area(3) / 4).epsilon(1e-12));
  }
}

TEST_CASE("transform rejects mismatched grids") {
  const auto basis = HarmonicBasis::create(3, 10, Symmetry::zonal);
  auto small = std::make_shared<const QuadratureGrid>(build_grid(3, 8, Symmetry::zonal));
  CHECK_THROWS_AS(SphericalTransform(basis, small), ConfigurationError);
  auto full = std::make_shared<const QuadratureGrid>(build_grid(3, 10, Symmetry::full));
  CHECK_THROWS_AS(SphericalTransform(basis, full), ConfigurationError);
  const auto other = HarmonicBasis::create(3, 11, Symmetry::zonal);
  CHECK_THROWS_AS(SpectralField::zero(basis) + SpectralField::zero(other), ConfigurationError);
}

TEST_CASE("P_sigma action and H^sigma inner product") {
  for (auto [n, sigma] : {std::pair{3, 0.25}, std::pair{4, 0.9}, std::pair{3, 0.4}}) {
    const auto space = make_space(n, 8, n == 3 ? Symmetry::full : Symmetry::zonal);
    const SpectralField one = space->constant(1.0);
    const SpectralField p1 = apply_psigma(one, sigma);
    CHECK((p1.coefficients() - c_n_sigma(n, sigma) * one.coefficients()).norm() < 1e-12);
    CHECK(hsigma_inner(one, one, sigma) == doctest::Approx(c_n_sigma(n, sigma) * sphere_area(n)).epsilon(1e-13));

    std::mt19937_64 rng(5);
    const SpectralField u = random_field(space->basis, 8, rng);
    const SpectralField v = random_field(space->basis, 8, rng);
    CHECK(l2_inner(apply_psigma(u, sigma), v) == doctest::Approx(l2_inner(u, apply_psigma(v, sigma))).epsilon(1e-12));
    CHECK(hsigma_inner(u, v, sigma) == doctest::Approx(hsigma_inner(v, u, sigma)).epsilon(1e-14));
    CHECK(hsigma_norm(u, sigma) > 0.0);
    CHECK(hsigma_norm(SpectralField::zero(space->basis), sigma) == 0.0);
    const SpectralField back = apply_psigma_inverse(apply_psigma(u, sigma), sigma);
    CHECK((back.coefficients() - u.coefficients()).norm() < 1e-13 * u.coefficients().norm());

    double by_degree = 0.0;
    for (Eigen::Index i = 0; i < u.coefficients().size(); ++i) {
      by_degree += psigma_eigenvalue(n, sigma, space->basis->degrees()[i]) * u.coefficients()[i] * u.coefficients()[i];
    }
    CHECK(hsigma_norm(u, sigma) * hsigma_norm(u, sigma) == doctest::Approx(by_degree).epsilon(1e-13));
  }
}

TEST_CASE("Yamabe quotient of constants is the Beckner constant") {
  for (auto [n, sigma] : {std::pair{3, 0.1}, std::pair{3, 0.25}, std::pair{3, 0.4}, std::pair{4, 0.9}}) {
    const auto space = make_space(n, 4, Symmetry::zonal);
    const double expected = std::pow(sphere_area(n), 2.0 * sigma / n) * std::tgamma(0.5 * n + sigma) /
                            std::tgamma(0.5 * n - sigma);
    CHECK(yamabe_quotient(space->constant(1.0), sigma, *space) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(beckner_constant(n, sigma) == doctest::Approx(expected).epsilon(1e-14));
  }
  const auto space = make_space(3, 8, Symmetry::full);
  std::mt19937_64 rng(9);
  SpectralField u = random_field(space->basis, 3, rng);
  u.coefficients()[0] += 20.0;
  const double q1 = yamabe_quotient(u, 0.25, *space);
  CHECK(yamabe_quotient(2.0 * u, 0.25, *space) == doctest::Approx(q1).epsilon(1e-13));
  CHECK(q1 >= beckner_constant(3, 0.25));
  CHECK_THROWS_AS(yamabe_quotient(SpectralField::zero(space->basis), 0.25, *space), DegenerateInputError);
}

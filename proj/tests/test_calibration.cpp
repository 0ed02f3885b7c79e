#include <doctest.h>

#include "fraclab/bubbles.hpp"

#include <cmath>

using namespace fraclab;

TEST_CASE("calibrated constants at (4, 0.9)") {
  CalibrationSweeps sweeps;
  const ExpansionConstants c = calibrate_constants(4, 0.9, {}, &sweeps);
  CHECK(c.provenance == "calibrated");
  CHECK(c.c2 > 0.0);
  CHECK(c.c01 > 0.0);
  CHECK(std::abs(c.single_slope + 2.0) < 0.2);
  CHECK(c.c2_spread < 0.05);
  CHECK(std::abs(c.pair_exponent / -(4 - 1.8) - 1.0) < 0.1);
  REQUIRE(sweeps.north.size() == c.lambdas.size());
  REQUIRE(sweeps.pair.size() == c.lambdas.size());

  std::vector<double> lam, dev;
  for (const SweepPoint& p : sweeps.north) {
    lam.push_back(p.lambda);
    dev.push_back(p.deviation);
    // K = xi_{n+1} + 2 has negative Laplacian at the north pole.
    CHECK(p.deviation > 0.0);
    CHECK(p.deviation == doctest::Approx(p.value - p.limit));
  }
  CHECK(std::abs(loglog_slope(lam, dev) + 2.0) < 0.2);
  for (const SweepPoint& p : sweeps.south) CHECK(p.deviation < 0.0);
}

TEST_CASE("calibration failure carries diagnostics") {
  CalibrationOptions o;
  o.truncation = 256;
  try {
    calibrate_constants(3, 0.25, o);
    FAIL("expected a calibration failure");
  } catch (const CalibrationError& e) {
    CHECK(e.diagnostics().n == 3);
    CHECK(e.diagnostics().c2 > 0.0);
    CHECK(e.diagnostics().c2_spread > 0.05);
  }
}

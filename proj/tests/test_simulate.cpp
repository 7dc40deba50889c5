#include "pns/simulate.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace pns;
using namespace pns::testing;

TEST_CASE("random stream is reproducible") {
  Rng a(9), b(9), c(10);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.normal() != c.normal());
  // The engine is the standard one: 10000th output for the default seed.
  std::mt19937_64 ref;
  ref.discard(9999);
  CHECK(ref() == 9981545732273789042ULL);
}

TEST_CASE("normal and truncated normal moments") {
  Rng rng(701);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(ss / n - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.truncated_normal(1.0, -0.2, 0.5);
    CHECK(t >= -0.2);
    CHECK(t <= 0.5);
  }
  CHECK_THROWS(rng.truncated_normal(1.0, 1.0, 0.0));
}

TEST_CASE("noise-free simulations lie on every fitted level") {
  SimulationConfig cfg;
  cfg.d = 4;
  cfg.n = 50;
  cfg.radii = {1.2, 0.9, 0.5};
  cfg.noise_sd = 0.0;
  cfg.final_mean = 0.7;
  Rng rng(702);
  cfg.axes = {rng.unit_vector(5), rng.unit_vector(4), rng.unit_vector(3)};
  const Simulation sim = simulate(cfg);
  for (Eigen::Index i = 0; i < sim.data.rows(); ++i) {
    CHECK(sim.data.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::VectorXd xi = residual_map(sim.data.row(i).transpose(), sim.truth);
    CHECK(xi.tail(3).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(xi(0) == doctest::Approx(sim.residuals(i, 0)).epsilon(1e-10).scale(1));
  }
}

TEST_CASE("simulated residuals are recovered by the true model") {
  SimulationConfig cfg;
  cfg.d = 3;
  cfg.n = 80;
  cfg.radii = {0.8, 1.1};
  cfg.noise_sd = 0.1;
  const Simulation sim = simulate(cfg);
  for (Eigen::Index i = 0; i < sim.data.rows(); ++i) {
    const Eigen::VectorXd xi = residual_map(sim.data.row(i).transpose(), sim.truth);
    CHECK((xi - sim.residuals.row(i).transpose()).norm() < 1e-9);
  }
}

TEST_CASE("refits recover the generating parameters") {
  SimulationConfig cfg;
  cfg.d = 2;
  cfg.n = 300;
  cfg.radii = {0.5};
  cfg.axes = {Eigen::Vector3d(1, 2, 2) / 3.0};
  cfg.noise_sd = 0.05;
  cfg.final_mean = -1.0;
  cfg.seed = 77;
  const Simulation sim = simulate(cfg);
  const PnsFit fit = fit_pns(sim.data);
  CHECK(std::abs(fit.model.subspheres[0].angle - 0.5) < 0.02);
  CHECK(geodesic_dist(fit.model.subspheres[0].axis, sim.truth.subspheres[0].axis) < 0.05);

  // At d = 3 the level-2 spread must be large enough to pin down the level-1
  // sphere; a thin band near one circle lies on many 2-spheres.
  cfg.d = 3;
  cfg.n = 400;
  cfg.radii = {0.9, 1.2};
  cfg.axes = {};
  cfg.level_noise_sd = {0.03, 0.6};
  const Simulation wide = simulate(cfg);
  const PnsFit fit3 = fit_pns(wide.data);
  CHECK(std::abs(fit3.model.subspheres[0].angle - 0.9) < 0.02);
  CHECK(geodesic_dist(fit3.model.subspheres[0].axis, wide.truth.subspheres[0].axis) < 0.05);
}

TEST_CASE("invalid simulation settings") {
  SimulationConfig cfg;
  cfg.radii = {};
  CHECK_THROWS(simulate(cfg));
  cfg.radii = {2.0};
  CHECK_THROWS(simulate(cfg));
  cfg.radii = {0.0};
  CHECK_THROWS(simulate(cfg));
  cfg.radii = {0.5};
  cfg.noise_sd = -1;
  CHECK_THROWS(simulate(cfg));
  cfg.noise_sd = 0.1;
  cfg.level_noise_sd = {0.1, 0.2};
  CHECK_THROWS(simulate(cfg));
}

TEST_CASE("calibration harness") {
  CalibrationConfig cal;
  cal.test = SelectionMode::lr;
  cal.replicates = 200;
  const CalibrationReport r = calibrate(cal);
  CHECK(r.p_values.size() == 200);
  CHECK(r.rejection_rate == doctest::Approx(r.rejections / 200.0));
  for (double p : r.p_values) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  CHECK(uniform_ks_distance({0.5}) == doctest::Approx(0.5));
  CHECK(uniform_ks_distance({0.25, 0.75}) == doctest::Approx(0.25));
}

#include "pns/sphere_geom.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace pns;
using pns::testing::kPi;

TEST_CASE("geodesic distance basics") {
  const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
  CHECK(geodesic_dist(x, x) == doctest::Approx(0.0));
  CHECK(geodesic_dist(x, y) == doctest::Approx(kPi / 2));
  CHECK(geodesic_dist(Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)) == doctest::Approx(kPi));
  CHECK_THROWS_AS(geodesic_dist(Eigen::VectorXd(Eigen::Vector2d(1, 0)), Eigen::VectorXd(x)), GeometryError);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd a = rng.unit_vector(5), b = rng.unit_vector(5);
    CHECK(geodesic_dist(a, b) == geodesic_dist(b, a));
    CHECK(geodesic_dist(a, b) >= 0.0);
    CHECK(geodesic_dist(a, b) <= kPi);
  }
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("rotation to the pole") {
  SUBCASE("identity at the pole") {
    const Eigen::Vector3d e3(0, 0, 1);
    CHECK((rotation_to_pole(e3) - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  }
  SUBCASE("antipode of the pole") {
    for (int m = 1; m <= 6; ++m) {
      const Eigen::VectorXd v = -Eigen::VectorXd::Unit(m + 1, m);
      const Eigen::MatrixXd r = rotation_to_pole(v);
      CHECK((r * v - Eigen::VectorXd::Unit(m + 1, m)).norm() < 1e-12);
      CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(m + 1, m + 1)).norm() < 1e-12);
      CHECK(r.determinant() == doctest::Approx(1.0));
    }
  }
  SUBCASE("random axes") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const int size = 2 + i % 9;
      const Eigen::VectorXd v = rng.unit_vector(size);
      const Eigen::MatrixXd r = rotation_to_pole(v);
      CHECK((r * v - Eigen::VectorXd::Unit(size, size - 1)).norm() < 1e-12);
      CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(size, size)).norm() < 1e-12);
    }
  }
  SUBCASE("matrix-free application agrees with the matrix") {
    Rng rng(12);
    const Eigen::VectorXd v = rng.unit_vector(7);
    const RotationToPole<double> rot(v);
    const Eigen::MatrixXd r = rot.matrix();
    const Eigen::VectorXd x = rng.unit_vector(7);
    CHECK((rot.apply(x) - r * x).norm() < 1e-14);
    CHECK((rot.apply_transpose(x) - r.transpose() * x).norm() < 1e-14);
  }
}

TEST_CASE("tangent basis is orthonormal and orthogonal to v") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd v = rng.unit_vector(6);
    const Eigen::MatrixXd t = tangent_basis(v);
    CHECK((t.transpose() * t - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
    CHECK((t.transpose() * v).norm() < 1e-12);
  }
}

TEST_CASE("projection onto a subsphere") {
  SUBCASE("worked example on the equator") {
    const Subsphere s{Eigen::Vector3d(0, 0, 1), kPi / 2};
    const auto p = project_to_subsphere(Eigen::Vector3d(0, 0.6, 0.8), s);
    CHECK_FALSE(p.degenerate);
    CHECK((p.point - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);

    // Grid search over the equator.
    const Eigen::Vector3d x(0, 0.6, 0.8);
    double best = 1e9;
    Eigen::Vector3d arg;
    for (int k = 0; k < 100000; ++k) {
      const double t = 2 * kPi * k / 100000.0;
      const Eigen::Vector3d y(std::cos(t), std::sin(t), 0);
      const double dist = geodesic_dist(x, y);
      if (dist < best) best = dist, arg = y;
    }
    CHECK((p.point - arg).norm() < 1e-4);
  }
  SUBCASE("points on the subsphere are fixed") {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
      const Subsphere s{rng.unit_vector(5), 0.1 + 1.4 * rng.uniform()};
      const Eigen::VectorXd x = inverse_transform(rng.unit_vector(4), s);
      CHECK((project_to_subsphere(x, s).point - x).norm() < 1e-12);
    }
  }
  SUBCASE("projection beats random subsphere points") {
    Rng rng(22);
    for (int i = 0; i < 20; ++i) {
      const Subsphere s{rng.unit_vector(4), 0.05 + 1.5 * rng.uniform()};
      const Eigen::VectorXd x = rng.unit_vector(4);
      const auto p = project_to_subsphere(x, s);
      CHECK(geodesic_dist(p.point, s.axis) == doctest::Approx(s.angle).epsilon(1e-10));
      const double dp = geodesic_dist(x, p.point);
      for (int j = 0; j < 10000; ++j) {
        const Eigen::VectorXd y = inverse_transform(rng.unit_vector(3), s);
        REQUIRE(dp <= geodesic_dist(x, y) + 1e-12);
      }
    }
  }
  SUBCASE("degenerate input at the axis") {
    const Subsphere s{Eigen::Vector3d(0, 0, 1), 0.4};
    const auto p = project_to_subsphere(Eigen::Vector3d(0, 0, 1), s);
    CHECK(p.degenerate);
    CHECK((p.point - inverse_transform(Eigen::Vector2d(1, 0), s)).norm() < 1e-15);
    const auto q = project_to_subsphere(Eigen::Vector3d(0, 0, -1), s);
    CHECK(q.degenerate);
    CHECK(geodesic_dist(q.point, s.axis) == doctest::Approx(0.4));
  }
}

TEST_CASE("sphere transform and its inverse") {
  SUBCASE("hand example") {
    const Subsphere s{Eigen::Vector3d(0, 0, 1), kPi / 2};
    const Eigen::VectorXd y = sphere_transform(Eigen::Vector3d(0, 1, 0), s);
    CHECK((y - Eigen::Vector2d(0, 1)).norm() < 1e-15);
    const Eigen::VectorXd back = inverse_transform(Eigen::Vector2d(1, 0), s);
    CHECK((back - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  }
  SUBCASE("great subspheres do not rescale") {
    Rng rng(31);
    const Subsphere s{rng.unit_vector(5), kPi / 2};
    const Eigen::VectorXd x = project_to_subsphere(rng.unit_vector(5), s).point;
    const Eigen::VectorXd rotated = RotationToPole<double>(s.axis).apply(x);
    CHECK(sphere_transform(x, s).norm() == doctest::Approx(rotated.head(4).norm()));
  }
  SUBCASE("round trips") {
    Rng rng(32);
    for (int i = 0; i < 500; ++i) {
      const int size = 2 + i % 8;
      const Subsphere s{rng.unit_vector(size), 0.01 + (kPi / 2 - 0.01) * rng.uniform()};
      const Eigen::VectorXd y = rng.unit_vector(size - 1);
      const Eigen::VectorXd x = inverse_transform(y, s);
      CHECK(geodesic_dist(x, s.axis) == doctest::Approx(s.angle).epsilon(1e-10));
      CHECK(std::abs(geodesic_dist(x, s.axis) - s.angle) < 1e-10);
      CHECK((sphere_transform(x, s) - y).norm() < 1e-10);
      CHECK((inverse_transform(sphere_transform(x, s), s) - x).norm() < 1e-10);
    }
  }
  SUBCASE("off-subsphere input is rejected") {
    const Subsphere s{Eigen::Vector3d(0, 0, 1), kPi / 2};
    CHECK_THROWS_AS(sphere_transform(Eigen::Vector3d(0, 0.6, 0.8), s), GeometryError);
  }
}

TEST_CASE("exp map") {
  Rng rng(41);
  const Eigen::VectorXd v = rng.unit_vector(4);
  CHECK((exp_map(v, Eigen::VectorXd::Zero(4)) - v).norm() == 0.0);
  const Eigen::VectorXd t = tangent_basis(v).col(0) * 0.7;
  const Eigen::VectorXd x = exp_map(v, t);
  CHECK(x.norm() == doctest::Approx(1.0));
  CHECK(geodesic_dist(v, x) == doctest::Approx(0.7));
}

namespace {

double circle_objective(const std::vector<double>& a, double v) {
  double s = 0;
  for (double t : a) s += std::pow(wrap_angle(t - v), 2);
  return s;
}

double grid_mean(const std::vector<double>& a, int grid) {
  double best = 1e300, arg = 0;
  for (int k = 0; k < grid; ++k) {
    const double v = -kPi + 2 * kPi * (k + 1) / grid;
    const double obj = circle_objective(a, v);
    if (obj < best) best = obj, arg = v;
  }
  return arg;
}

}  // namespace

TEST_CASE("circular Frechet mean") {
  CHECK(frechet_mean_circle(std::vector<double>{0.3, 0.3, 0.3}) == doctest::Approx(0.3));
  CHECK(frechet_mean_circle(std::vector<double>{-kPi / 2, kPi / 2}) == doctest::Approx(0.0));
  const double wrap = frechet_mean_circle(std::vector<double>{3.0, -3.0});
  CHECK(std::abs(wrap_angle(wrap - kPi)) < 1e-12);
  CHECK(std::abs(wrap_angle(grid_mean({3.0, -3.0}, 1000000) - kPi)) < 1e-5);
  CHECK_THROWS(frechet_mean_circle(std::vector<double>{}));

  Rng rng(51);
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<double> a;
    const int n = 2 + rep % 7;
    const double centre = wrap_angle(2 * kPi * rng.uniform());
    const double spread = rep < 30 ? 0.8 : 3.0;
    for (int i = 0; i < n; ++i) a.push_back(wrap_angle(centre + spread * rng.normal()));
    const double mean = frechet_mean_circle(a);
    const double oracle = grid_mean(a, 200000);
    CHECK(circle_objective(a, mean) <= circle_objective(a, oracle) + 1e-9);
  }
}

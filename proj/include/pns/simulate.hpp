#ifndef PNS_SIMULATE_HPP
#define PNS_SIMULATE_HPP

// Synthetic PNS populations and the Monte Carlo calibration harness for the
// great-vs-small tests.

#include "pns/model_select.hpp"
#include "pns/nested_spheres.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace pns {

/// Portable random stream: std::mt19937_64 (fully specified by the standard)
/// with hand-rolled uniform and Box-Muller normal draws, so output does not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();
  /// Normal(0, sd^2) conditioned on [lo, hi], by rejection.
  double truncated_normal(double sd, double lo, double hi);
  Eigen::VectorXd unit_vector(Eigen::Index size);

 private:
  std::mt19937_64 engine_;
};

struct SimulationConfig {
  int d = 2;
  long n = 100;
  std::vector<double> radii;      // r_1..r_{d-1}, each in (0, pi/2]
  std::vector<Eigen::VectorXd> axes;  // optional; default is the pole of each sphere
  double final_mean = 0.0;
  double noise_sd = 0.05;         // residual sd at levels 1..d-1
  std::vector<double> level_noise_sd;  // optional per-level override, length d-1
  double circle_sd = 1.0;         // spread of the S^1 residual
  std::uint64_t seed = 1;
};

struct Simulation {
  Eigen::MatrixXd data;       // n x (d+1)
  Eigen::MatrixXd residuals;  // true xi, n x d
  NestedSphereModel truth;
};

/// Builds the model implied by the config (levels, cumulative radii, mean).
NestedSphereModel model_from_parameters(const SimulationConfig& cfg);

Simulation simulate(const SimulationConfig& cfg);
Simulation simulate(const SimulationConfig& cfg, Rng& rng);

struct CalibrationConfig {
  SelectionMode test = SelectionMode::var;
  int replicates = 1000;
  long n = 100;
  int d = 2;
  double noise_sd = 0.05;
  double circle_sd = 1.0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

struct CalibrationReport {
  SelectionMode test = SelectionMode::var;
  int replicates = 0;
  int rejections = 0;
  double rejection_rate = 0.0;
  double p_uniform_ks = 0.0;  // sup |ECDF(p) - U[0,1]|
  std::vector<double> p_values;
};

/// Simulates the great-subsphere null and applies the level-1 test.
CalibrationReport calibrate(const CalibrationConfig& cfg);

/// sup_x |F_n(x) - x| for a sample on [0, 1].
double uniform_ks_distance(std::vector<double> sample);

}  // namespace pns

#endif  // PNS_SIMULATE_HPP

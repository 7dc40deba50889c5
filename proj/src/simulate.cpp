#include "pns/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pns {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double Rng::normal() {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double Rng::truncated_normal(double sd, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("truncated_normal: empty interval");
  if (sd <= 0.0) return std::clamp(0.0, lo, hi);
  for (int i = 0; i < 1000000; ++i) {
    const double z = sd * normal();
    if (z >= lo && z <= hi) return z;
  }
  throw std::runtime_error("truncated_normal: rejection sampler did not terminate");
}

Eigen::VectorXd Rng::unit_vector(Eigen::Index size) {
  Eigen::VectorXd v(size);
  do {
    for (Eigen::Index i = 0; i < size; ++i) v(i) = normal();
  } while (v.norm() < 1e-12);
  return v.normalized();
}

NestedSphereModel model_from_parameters(const SimulationConfig& cfg) {
  const int d = cfg.d;
  if (d < 1) throw std::invalid_argument("simulate: d must be >= 1");
  if (static_cast<int>(cfg.radii.size()) != d - 1) {
    throw std::invalid_argument("simulate: need d - 1 = " + std::to_string(d - 1) + " radii");
  }
  if (!cfg.axes.empty() && static_cast<int>(cfg.axes.size()) != d - 1) {
    throw std::invalid_argument("simulate: need d - 1 axes when axes are given");
  }
  NestedSphereModel model;
  model.ambient_dim = d;
  model.mode = SelectionMode::small;
  for (int k = 1; k <= d - 1; ++k) {
    const double r = cfg.radii[k - 1];
    if (!(r > 0.0 && r <= kPi / 2 + 1e-15)) {
      throw std::invalid_argument("simulate: radius " + std::to_string(r) +
                                  " outside (0, pi/2] at level " + std::to_string(k));
    }
    Subsphere s;
    const Eigen::Index size = d + 2 - k;
    if (cfg.axes.empty()) {
      s.axis = Eigen::VectorXd::Unit(size, size - 1);
    } else {
      s.axis = cfg.axes[k - 1];
      if (s.axis.size() != size) {
        throw std::invalid_argument("simulate: axis " + std::to_string(k) + " must have length " +
                                    std::to_string(size));
      }
      s.axis.normalize();
    }
    s.angle = std::min(r, kPi / 2);
    LevelChoice c;
    c.small = !s.is_great();
    model.subspheres.push_back(std::move(s));
    model.level_choices.push_back(c);
  }
  model.final_mean = wrap_angle(cfg.final_mean);
  model.cumulative_radii = cumulative_radii(model.subspheres, d);
  model.pns_mean = inverse_score_map(Eigen::VectorXd::Zero(d), model);
  return model;
}

Simulation simulate(const SimulationConfig& cfg) {
  Rng rng(cfg.seed);
  return simulate(cfg, rng);
}

Simulation simulate(const SimulationConfig& cfg, Rng& rng) {
  if (cfg.n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (cfg.noise_sd < 0.0 || cfg.circle_sd < 0.0) {
    throw std::invalid_argument("simulate: standard deviations must be non-negative");
  }
  if (!cfg.level_noise_sd.empty()) {
    if (static_cast<int>(cfg.level_noise_sd.size()) != cfg.d - 1) {
      throw std::invalid_argument("simulate: need d - 1 per-level noise sds");
    }
    for (double sd : cfg.level_noise_sd) {
      if (sd < 0.0) throw std::invalid_argument("simulate: standard deviations must be non-negative");
    }
  }
  Simulation sim;
  sim.truth = model_from_parameters(cfg);
  const NestedSphereModel& model = sim.truth;
  const int d = cfg.d;
  sim.data.resize(cfg.n, d + 1);
  sim.residuals.resize(cfg.n, d);
  for (long i = 0; i < cfg.n; ++i) {
    Eigen::VectorXd xi(d);
    xi(0) = rng.truncated_normal(cfg.circle_sd, -kPi + 1e-12, kPi);
    for (int c = 2; c <= d; ++c) {
      const double r = model.subsphere_for_component(c).angle;
      // Keep off the axis and its antipode, where the residual map is singular.
      const double sd = cfg.level_noise_sd.empty() ? cfg.noise_sd : cfg.level_noise_sd[d - c];
      xi(c - 1) = rng.truncated_normal(sd, -r + 1e-9, kPi - r - 1e-9);
    }
    sim.residuals.row(i) = xi.transpose();
    const Eigen::VectorXd s = xi.cwiseProduct(model.cumulative_radii);
    sim.data.row(i) = inverse_score_map(s, model).transpose();
  }
  return sim;
}

double uniform_ks_distance(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("uniform_ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

CalibrationReport calibrate(const CalibrationConfig& cfg) {
  if (!is_test_mode(cfg.test)) {
    throw std::invalid_argument("calibrate: test must be one of ks, var, lr");
  }
  if (cfg.replicates < 1) throw std::invalid_argument("calibrate: replicates must be >= 1");
  if (cfg.d < 2) throw std::invalid_argument("calibrate: d must be >= 2");

  SimulationConfig sim_cfg;
  sim_cfg.d = cfg.d;
  sim_cfg.n = cfg.n;
  sim_cfg.radii.assign(static_cast<std::size_t>(cfg.d - 1), kPi / 2);
  sim_cfg.noise_sd = cfg.noise_sd;
  sim_cfg.circle_sd = cfg.circle_sd;

  Rng rng(cfg.seed);
  CalibrationReport report;
  report.test = cfg.test;
  report.replicates = cfg.replicates;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    const Simulation sim = simulate(sim_cfg, rng);
    const SubsphereFit great = fit_great(sim.data);
    const SubsphereFit small = fit_small(sim.data, great);
    LevelTestResult t;
    switch (cfg.test) {
      case SelectionMode::ks: t = ks_test(great.residuals, small.residuals, cfg.alpha); break;
      case SelectionMode::var:
        t = variance_f_test(great.residuals, small.residuals, cfg.alpha);
        break;
      default: t = lr_test(great.residuals, small.residuals, cfg.alpha); break;
    }
    if (t.chose_small) ++report.rejections;
    report.p_values.push_back(t.p_value.value_or(1.0));
  }
  report.rejection_rate =
      static_cast<double>(report.rejections) / static_cast<double>(report.replicates);
  report.p_uniform_ks = uniform_ks_distance(report.p_values);
  return report;
}

}  // namespace pns

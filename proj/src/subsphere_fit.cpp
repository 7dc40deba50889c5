#include "pns/subsphere_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pns {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

enum class Kind { great, small };

struct Evaluation {
  Eigen::VectorXd rho;
  double radius = kHalfPi;
  double cost = 0.0;
};

Evaluation evaluate(const Eigen::MatrixXd& data, const Eigen::VectorXd& v, Kind kind) {
  Evaluation ev;
  ev.rho = (data * v).unaryExpr([](double c) { return std::acos(clamp_unit(c)); });
  ev.radius = kind == Kind::great ? kHalfPi : ev.rho.mean();
  ev.cost = (ev.rho.array() - ev.radius).square().sum();
  return ev;
}

// Jacobian of the residual vector with respect to tangent coordinates at v.
// d rho_i / d t = -(B^T x_i) / sin(rho_i); the profiled small-sphere residual
// subtracts the column means.
Eigen::MatrixXd jacobian(const Eigen::MatrixXd& data, const Eigen::MatrixXd& basis,
                         const Eigen::VectorXd& rho, Kind kind) {
  Eigen::MatrixXd jac = -(data * basis);
  for (Eigen::Index i = 0; i < jac.rows(); ++i) {
    jac.row(i) /= std::max(std::sin(rho(i)), 1e-12);
  }
  if (kind == Kind::small) {
    jac.rowwise() -= jac.colwise().mean();
  }
  return jac;
}

struct RunResult {
  Eigen::VectorXd axis;
  Evaluation eval;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

// Levenberg-damped Gauss-Newton on the sphere with exp-map retraction.
// Uses isotropic damping so that steps do not depend on the tangent basis.
RunResult minimize(const Eigen::MatrixXd& data, Eigen::VectorXd v, Kind kind,
                   const FitOptions& opts) {
  RunResult run;
  v.normalize();
  Evaluation ev = evaluate(data, v, kind);
  run.trace.push_back(ev.cost);
  double mu = -1.0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    run.iterations = it + 1;
    if (ev.cost <= 1e-30) {
      run.converged = true;
      break;
    }
    const Eigen::MatrixXd basis = tangent_basis(v);
    const Eigen::MatrixXd jac = jacobian(data, basis, ev.rho, kind);
    const Eigen::VectorXd resid = ev.rho.array() - ev.radius;
    const Eigen::MatrixXd hessian = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * resid;
    if (mu < 0) mu = 1e-6 * std::max(hessian.diagonal().maxCoeff(), 1e-12);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal().array() += mu;
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) {
        mu *= 10.0;
        if (mu > 1e20) break;
        continue;
      }
      if (step.norm() < opts.step_tolerance) {
        run.converged = true;
        break;
      }
      const Eigen::VectorXd candidate = exp_map(v, basis * step);
      Evaluation trial = evaluate(data, candidate, kind);
      if (trial.cost < ev.cost) {
        const double rel = (ev.cost - trial.cost) / std::max(ev.cost, 1e-300);
        v = candidate;
        ev = std::move(trial);
        run.trace.push_back(ev.cost);
        mu = std::max(mu / 3.0, 1e-300);
        accepted = true;
        if (rel < opts.relative_tolerance) run.converged = true;
      } else {
        mu *= 4.0;
        // Damping this large means the step is numerically zero.
        if (mu > 1e20 || step.norm() * 1e3 < opts.step_tolerance) {
          run.converged = true;
          break;
        }
      }
    }
    if (run.converged || !accepted) break;
  }
  run.axis = std::move(v);
  run.eval = std::move(ev);
  return run;
}

void validate(const Eigen::MatrixXd& data, const char* what) {
  if (data.cols() < 2) {
    throw FitError(std::string(what) + ": points must have at least 2 coordinates");
  }
  if (data.rows() < 3) {
    throw FitError(std::string(what) + ": need at least 3 points, got " +
                   std::to_string(data.rows()));
  }
  if (all_points_equal(data)) {
    throw FitError(std::string(what) + ": degenerate data (all points equal)");
  }
}

Eigen::VectorXd smallest_eigenvector(const Eigen::MatrixXd& scatter) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scatter);
  return es.eigenvectors().col(0).normalized();
}

void canonicalize_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-14) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

SubsphereFit finish(const Eigen::MatrixXd& data, const RunResult& run, double radius,
                    const Eigen::VectorXd& axis, const FitOptions& opts) {
  SubsphereFit fit;
  fit.subsphere.axis = axis;
  fit.subsphere.angle = radius;
  if (fit.subsphere.angle > kHalfPi) fit.subsphere.angle = kHalfPi;
  if (fit.subsphere.angle < opts.min_angle) {
    fit.subsphere.angle = opts.min_angle;
    fit.radius_floored = true;
  }
  fit.residuals = subsphere_residuals(data, fit.subsphere);
  fit.rss = fit.residuals.squaredNorm();
  fit.converged = run.converged;
  fit.iterations = run.iterations;
  fit.objective_trace = run.trace;
  return fit;
}

}  // namespace

Eigen::VectorXd subsphere_residuals(const Eigen::MatrixXd& data, const Subsphere& s) {
  if (data.cols() != s.axis.size()) {
    throw GeometryError("subsphere_residuals: dimension mismatch");
  }
  return (data * s.axis).unaryExpr([&](double c) {
    return std::acos(clamp_unit(c)) - s.angle;
  });
}

bool all_points_equal(const Eigen::MatrixXd& data, double tol) {
  if (data.rows() == 0) return true;
  const Eigen::VectorXd first = data.row(0).transpose();
  for (Eigen::Index i = 1; i < data.rows(); ++i) {
    if ((data.row(i).transpose() - first).norm() > tol) return false;
  }
  return true;
}

SubsphereFit fit_great(const Eigen::MatrixXd& data, const FitOptions& opts) {
  validate(data, "fit_great");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const std::vector<Eigen::VectorXd> starts = {
      smallest_eigenvector(data.transpose() * data),
      smallest_eigenvector(centered.transpose() * centered),
  };

  RunResult best;
  bool have = false;
  for (const auto& start : starts) {
    RunResult run = minimize(data, start, Kind::great, opts);
    if (!have || run.eval.cost < best.eval.cost) {
      best = std::move(run);
      have = true;
    }
  }
  Eigen::VectorXd axis = best.axis;
  canonicalize_sign(axis);
  return finish(data, best, kHalfPi, axis, opts);
}

SubsphereFit fit_small(const Eigen::MatrixXd& data, const FitOptions& opts) {
  return fit_small(data, fit_great(data, opts), opts);
}

SubsphereFit fit_small(const Eigen::MatrixXd& data, const SubsphereFit& great,
                       const FitOptions& opts) {
  validate(data, "fit_small");
  if (great.subsphere.axis.size() != data.cols()) {
    throw FitError("fit_small: great fit has the wrong dimension");
  }
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  std::vector<Eigen::VectorXd> starts = {
      smallest_eigenvector(centered.transpose() * centered),
      great.subsphere.axis,
  };
  const Eigen::VectorXd mean = data.colwise().mean().transpose();
  if (mean.norm() > 1e-12) starts.push_back(mean.normalized());

  RunResult best;
  bool have = false;
  for (const auto& start : starts) {
    RunResult run = minimize(data, start, Kind::small, opts);
    if (!have || run.eval.cost < best.eval.cost) {
      best = std::move(run);
      have = true;
    }
  }

  // (v, r) and (-v, pi - r) describe the same subsphere; keep r <= pi/2.
  Eigen::VectorXd axis = best.axis;
  double radius = best.eval.radius;
  if (radius > kHalfPi) {
    axis = -axis;
    radius = std::numbers::pi - radius;
  }
  return finish(data, best, radius, axis, opts);
}

}  // namespace pns

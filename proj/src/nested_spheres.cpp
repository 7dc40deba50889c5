#include "pns/nested_spheres.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pns {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kIntervalTol = 1e-12;

// Project x onto s and map it to the lower sphere. Projection output lies on
// the subsphere to rounding, so the membership check is skipped.
Eigen::VectorXd project_and_transform(const Eigen::VectorXd& x, const Subsphere& s) {
  const auto proj = project_to_subsphere(x, s);
  const Eigen::VectorXd rotated = RotationToPole<double>(s.axis).apply(proj.point);
  Eigen::VectorXd y = rotated.head(x.size() - 1) / std::sin(s.angle);
  y.normalize();
  return y;
}

// Point at signed offset xi from A(v, r) along the geodesic from v through z,
// where z lies on A(v, r).
Eigen::VectorXd offset_from_subsphere(const Eigen::VectorXd& z, const Subsphere& s,
                                      double xi) {
  Eigen::VectorXd dir = z - std::cos(s.angle) * s.axis;
  dir /= std::sin(s.angle);
  const double t = s.angle + xi;
  Eigen::VectorXd out = std::cos(t) * s.axis + std::sin(t) * dir;
  out.normalize();
  return out;
}

Eigen::VectorXd circle_point(double theta) {
  return Eigen::Vector2d(std::cos(theta), std::sin(theta));
}

void validate_rows(const Eigen::MatrixXd& data) {
  if (data.cols() < 2) throw PnsError("fit_pns: points need at least 2 coordinates");
  if (data.rows() < 3) {
    throw PnsError("fit_pns: need at least 3 observations, got " +
                   std::to_string(data.rows()));
  }
  if (!data.allFinite()) throw PnsError("fit_pns: non-finite entries");
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double norm = data.row(i).norm();
    if (std::abs(norm - 1.0) > 1e-8) {
      throw PnsError("fit_pns: row " + std::to_string(i) + " has norm " +
                     std::to_string(norm) + ", expected unit norm");
    }
  }
}

Subsphere degenerate_subsphere(const Eigen::VectorXd& point) {
  // A great subsphere through `point`: axis is a unit vector orthogonal to it.
  Subsphere s;
  s.axis = RotationToPole<double>(point).apply_transpose(
      Eigen::VectorXd::Unit(point.size(), 0));
  s.angle = kPi / 2;
  return s;
}

}  // namespace

Eigen::VectorXd cumulative_radii(const std::vector<Subsphere>& subspheres, int d) {
  if (static_cast<int>(subspheres.size()) != d - 1) {
    throw PnsError("cumulative_radii: expected d-1 subspheres");
  }
  Eigen::VectorXd a(d);
  for (int k = 1; k <= d; ++k) {
    double prod = 1.0;
    for (int i = 1; i <= d - k; ++i) prod *= std::sin(subspheres[i - 1].angle);
    a(k - 1) = prod;
  }
  return a;
}

PnsFit fit_pns(const Eigen::MatrixXd& data, const PnsOptions& opts) {
  validate_rows(data);
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw PnsError("fit_pns: alpha must be in (0, 1)");

  const int d = static_cast<int>(data.cols()) - 1;
  const Eigen::Index n = data.rows();

  PnsFit out;
  NestedSphereModel& model = out.model;
  model.ambient_dim = d;
  model.mode = opts.mode;
  model.alpha = opts.alpha;
  out.residuals = Eigen::MatrixXd::Zero(n, d);
  if (n < d + 2) {
    model.warnings.push_back("fewer observations (" + std::to_string(n) +
                             ") than d + 2 = " + std::to_string(d + 2));
  }

  Eigen::MatrixXd current = data;
  for (int k = 1; k <= d - 1; ++k) {
    const int m = d + 1 - k;  // current sphere S^m
    LevelChoice choice;
    Subsphere chosen;

    if (model.truncated || all_points_equal(current)) {
      if (!model.truncated) {
        model.truncated = true;
        model.truncated_level = k;
        model.warnings.push_back("data collapsed to a single point at level " +
                                 std::to_string(k) + "; remaining scores are zero");
      }
      chosen = degenerate_subsphere(current.row(0).transpose());
      choice.degenerate = true;
      choice.rss_great = 0.0;
    } else {
      try {
        const SubsphereFit great = fit_great(current, opts.fit);
        choice.rss_great = great.rss;
        choice.converged = great.converged;
        std::optional<SubsphereFit> small;
        if (opts.mode != SelectionMode::great) {
          small = fit_small(current, great, opts.fit);
          choice.rss_small = small->rss;
          choice.converged = choice.converged && small->converged;
        }
        switch (opts.mode) {
          case SelectionMode::small: choice.small = true; break;
          case SelectionMode::great: choice.small = false; break;
          case SelectionMode::ks:
            choice.test = ks_test(great.residuals, small->residuals, opts.alpha);
            break;
          case SelectionMode::var:
            choice.test = variance_f_test(great.residuals, small->residuals, opts.alpha);
            break;
          case SelectionMode::lr:
            choice.test = lr_test(great.residuals, small->residuals, opts.alpha);
            break;
          case SelectionMode::bic:
            choice.test = bic_choice(great.residuals, small->residuals, m);
            break;
        }
        if (choice.test) choice.small = choice.test->chose_small;
        const SubsphereFit& fit = choice.small ? *small : great;
        chosen = fit.subsphere;
        if (!choice.converged) {
          model.warnings.push_back("optimizer did not converge at level " +
                                   std::to_string(k));
        }
        if (fit.radius_floored) {
          model.warnings.push_back("radius floored at level " + std::to_string(k));
        }
      } catch (const FitError& e) {
        throw PnsError("level " + std::to_string(k) + ": " + e.what());
      }
    }

    Eigen::MatrixXd next(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Same expression, on a contiguous copy, as residual_map: fitted and
      // rescored values then agree to the bit.
      const Eigen::VectorXd x = current.row(i).transpose();
      if (!choice.degenerate) out.residuals(i, m - 1) = geodesic_dist(x, chosen.axis) - chosen.angle;
      next.row(i) = project_and_transform(x, chosen).transpose();
    }
    current = std::move(next);
    model.subspheres.push_back(std::move(chosen));
    model.level_choices.push_back(std::move(choice));
  }

  std::vector<double> angles(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) angles[i] = std::atan2(current(i, 1), current(i, 0));
  model.final_mean = frechet_mean_circle(angles);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.residuals(i, 0) = wrap_angle(angles[i] - model.final_mean);
  }

  model.cumulative_radii = cumulative_radii(model.subspheres, d);
  out.scores = out.residuals * model.cumulative_radii.asDiagonal();
  model.pns_mean = inverse_score_map(Eigen::VectorXd::Zero(d), model);
  return out;
}

Eigen::VectorXd residual_map(const Eigen::VectorXd& x, const NestedSphereModel& model) {
  const int d = model.ambient_dim;
  if (x.size() != d + 1) {
    throw PnsError("score_map: point has dimension " + std::to_string(x.size()) +
                   ", model expects " + std::to_string(d + 1));
  }
  Eigen::VectorXd xi(d);
  Eigen::VectorXd current = x;
  for (int k = 1; k <= d - 1; ++k) {
    const Subsphere& s = model.subspheres[k - 1];
    xi(d - k) = geodesic_dist(current, s.axis) - s.angle;
    current = project_and_transform(current, s);
  }
  xi(0) = wrap_angle(std::atan2(current(1), current(0)) - model.final_mean);
  return xi;
}

Eigen::VectorXd score_map(const Eigen::VectorXd& x, const NestedSphereModel& model) {
  return residual_map(x, model).cwiseProduct(model.cumulative_radii);
}

Eigen::MatrixXd score_map_rows(const Eigen::MatrixXd& data, const NestedSphereModel& model) {
  Eigen::MatrixXd out(data.rows(), model.ambient_dim);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out.row(i) = score_map(data.row(i).transpose(), model).transpose();
  }
  return out;
}

std::pair<double, double> score_interval(const NestedSphereModel& model, int component) {
  const int d = model.ambient_dim;
  if (component < 1 || component > d) throw PnsError("score_interval: bad component");
  const double a = model.cumulative_radii(component - 1);
  if (component == 1) return {-kPi * a, kPi * a};
  const double r = model.subsphere_for_component(component).angle;
  return {-r * a, (kPi - r) * a};
}

Eigen::VectorXd inverse_score_map(const Eigen::VectorXd& scores,
                                  const NestedSphereModel& model) {
  const int d = model.ambient_dim;
  if (scores.size() != d) {
    throw PnsError("inverse_score_map: expected " + std::to_string(d) + " scores");
  }
  Eigen::VectorXd xi(d);
  for (int c = 1; c <= d; ++c) {
    const double a = model.cumulative_radii(c - 1);
    xi(c - 1) = scores(c - 1) / a;
    if (c == 1) {
      if (!(xi(0) > -kPi - kIntervalTol && xi(0) <= kPi + kIntervalTol)) {
        throw PnsError("inverse_score_map: PNS1 score outside (-pi a_1, pi a_1]");
      }
    } else {
      const double r = model.subsphere_for_component(c).angle;
      if (!(xi(c - 1) >= -r - kIntervalTol && xi(c - 1) <= kPi - r + kIntervalTol)) {
        throw PnsError("inverse_score_map: PNS" + std::to_string(c) +
                       " score outside its valid interval");
      }
    }
  }

  Eigen::VectorXd current = circle_point(model.final_mean + xi(0));
  for (int k = d - 1; k >= 1; --k) {
    const Subsphere& s = model.subspheres[k - 1];
    const Eigen::VectorXd on_sub = inverse_transform(current, s);
    current = offset_from_subsphere(on_sub, s, xi(d - k));
  }
  return current;
}

Eigen::VectorXd variance_explained(const Eigen::MatrixXd& scores) {
  if (scores.rows() < 2) throw std::invalid_argument("variance_explained: need n >= 2");
  const Eigen::VectorXd v =
      scores.array().square().colwise().mean().transpose();
  const double total = v.sum();
  if (!(total > 0.0)) throw std::invalid_argument("variance_explained: all scores are zero");
  return 100.0 * v / total;
}

long parameter_count(int d) {
  if (d < 1) throw std::invalid_argument("parameter_count: d must be >= 1");
  const long dd = d;
  return dd * (dd + 3) / 2 - 1;
}

long free_parameter_count(const NestedSphereModel& model) {
  const long d = model.ambient_dim;
  long count = d * (d + 1) / 2;
  for (const auto& c : model.level_choices) count += c.small ? 1 : 0;
  return count;
}

}  // namespace pns

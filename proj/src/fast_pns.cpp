#include "pns/fast_pns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pns {
namespace {

constexpr double kMinEigenvalue = 1e-14;
constexpr double kDefaultTargetPct = 95.0;
constexpr int kDefaultMaxPcs = 30;

void orient_largest_positive(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
}

// Eigenpairs of the tangent covariance, largest first. Uses the n x n Gram
// matrix when the ambient dimension exceeds n.
void tangent_eigen(const Eigen::MatrixXd& tangent, Eigen::VectorXd& values,
                   Eigen::MatrixXd& vectors) {
  const Eigen::Index n = tangent.rows();
  const Eigen::Index dim = tangent.cols();
  const double denom = static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  if (dim > n) {
    const Eigen::MatrixXd gram = tangent * tangent.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    values = es.eigenvalues().reverse();
    const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    vectors.resize(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd col = tangent.transpose() * u.col(j);
      const double norm = col.norm();
      vectors.col(j) = norm > 0 ? Eigen::VectorXd(col / norm) : Eigen::VectorXd::Zero(dim);
    }
  } else {
    const Eigen::MatrixXd cov = tangent.transpose() * tangent / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    values = es.eigenvalues().reverse();
    vectors = es.eigenvectors().rowwise().reverse();
  }
}

}  // namespace

Eigen::MatrixXd FastPnsBasis::frame() const {
  Eigen::MatrixXd f(mean.size(), loadings.cols() + 1);
  f.col(0) = mean;
  f.rightCols(loadings.cols()) = loadings;
  return f;
}

FastPnsBasis build_basis(const Eigen::MatrixXd& data, std::optional<int> p) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  if (n < 2) throw PnsError("build_basis: need at least 2 observations");
  if (dim < 2) throw PnsError("build_basis: points need at least 2 coordinates");
  const int d = static_cast<int>(dim) - 1;
  if (p && (*p < 1 || *p > d || *p >= n)) {
    throw PnsError("build_basis: need 1 <= p <= d and p < n, got p = " + std::to_string(*p));
  }

  FastPnsBasis basis;
  basis.arithmetic_mean = data.colwise().mean().transpose();
  const double mean_norm = basis.arithmetic_mean.norm();
  if (mean_norm < 1e-12) throw PnsError("build_basis: arithmetic mean is zero");
  basis.mean = basis.arithmetic_mean / mean_norm;

  const Eigen::VectorXd proj = data * basis.mean;
  Eigen::MatrixXd tangent = data - proj * basis.mean.transpose();

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  tangent_eigen(tangent, values, vectors);
  const double trace = std::max(values.sum(), 0.0);

  const int max_p = static_cast<int>(std::min<Eigen::Index>({values.size(), dim - 1, n - 1}));
  int rank = 0;
  while (rank < max_p && values(rank) > kMinEigenvalue) ++rank;
  if (rank == 0) throw PnsError("build_basis: tangent covariance is zero");

  int chosen = 0;
  if (p) {
    chosen = *p;
    if (chosen > rank) {
      basis.warnings.push_back("requested p = " + std::to_string(chosen) +
                               " exceeds the tangent rank; using p = " + std::to_string(rank));
      chosen = rank;
    }
  } else {
    double acc = 0.0;
    chosen = std::min(rank, kDefaultMaxPcs);
    for (int j = 0; j < std::min(rank, kDefaultMaxPcs); ++j) {
      acc += values(j);
      if (trace > 0 && 100.0 * acc / trace >= kDefaultTargetPct) {
        chosen = j + 1;
        break;
      }
    }
  }

  basis.eigenvalues = values.head(chosen);
  basis.loadings = vectors.leftCols(chosen);
  // Re-orthogonalize against the mean and each other; the Gram route loses a
  // few digits.
  for (int j = 0; j < chosen; ++j) {
    Eigen::VectorXd col = basis.loadings.col(j);
    col -= basis.mean.dot(col) * basis.mean;
    for (int i = 0; i < j; ++i) col -= basis.loadings.col(i).dot(col) * basis.loadings.col(i);
    col.normalize();
    orient_largest_positive(col);
    basis.loadings.col(j) = col;
  }
  // With the full tangent space the frame is a rotation of R^{d+1}; keep it
  // proper so the PNS on the reduced sphere has the same orientation.
  if (chosen == d && basis.frame().determinant() < 0) {
    basis.loadings.col(chosen - 1) *= -1.0;
  }
  basis.pct_variance = trace > 0 ? 100.0 * basis.eigenvalues.sum() / trace : 100.0;
  return basis;
}

Eigen::VectorXd tangent_coordinates(const Eigen::VectorXd& x, const FastPnsBasis& basis) {
  if (x.size() != basis.mean.size()) throw PnsError("tangent_coordinates: dimension mismatch");
  const double c = x.dot(basis.mean);
  const Eigen::VectorXd t = x - c * basis.mean;
  const double tn = t.norm();
  if (tn < 1e-300) return Eigen::VectorXd::Zero(basis.p());
  const double rho = std::acos(clamp_unit(c));
  return (rho / tn) * (basis.loadings.transpose() * t);
}

ReducedPoint project_reduced(const Eigen::VectorXd& x, const FastPnsBasis& basis) {
  if (x.size() != basis.mean.size()) throw PnsError("project_reduced: dimension mismatch");
  ReducedPoint out;
  out.coords = Eigen::VectorXd::Zero(basis.p() + 1);
  out.coords(0) = 1.0;
  if (x.dot(basis.mean) < -1.0 + 1e-10) {
    out.antipodal = true;
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd lambda = tangent_coordinates(x, basis);
  const double len = lambda.norm();
  // A tangent vector orthogonal to every loading leaves only rounding noise.
  if (len <= 1e-12 * std::max(1.0, std::acos(clamp_unit(x.dot(basis.mean))))) {
    out.degenerate = (x - basis.mean).norm() > 1e-12;
    return out;
  }
  out.coords(0) = std::cos(len);
  out.coords.tail(basis.p()) = (std::sin(len) / len) * lambda;
  out.coords.normalize();
  return out;
}

Eigen::MatrixXd project_reduced_rows(const Eigen::MatrixXd& data, const FastPnsBasis& basis) {
  Eigen::MatrixXd out(data.rows(), basis.p() + 1);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out.row(i) = project_reduced(data.row(i).transpose(), basis).coords.transpose();
  }
  return out;
}

Eigen::VectorXd lift_exact(const Eigen::VectorXd& g, const FastPnsBasis& basis) {
  if (g.size() != basis.p() + 1) throw PnsError("lift_exact: expected p + 1 coordinates");
  return g(0) * basis.mean + basis.loadings * g.tail(basis.p());
}

Eigen::VectorXd lift_tangent(const Eigen::VectorXd& g, const FastPnsBasis& basis) {
  if (g.size() != basis.p() + 1) throw PnsError("lift_tangent: expected p + 1 coordinates");
  const double s = std::acos(clamp_unit(g(0)));
  if (std::numbers::pi - s < 1e-12) throw PnsError("lift_tangent: point antipodal to the mean");
  const double factor = s < 1e-8 ? 1.0 + s * s / 6.0 : s / std::sin(s);
  return basis.mean + factor * (basis.loadings * g.tail(basis.p()));
}

Eigen::VectorXd lift_extrinsic(const Eigen::VectorXd& g, const FastPnsBasis& basis) {
  if (g.size() != basis.p() + 1) throw PnsError("lift_extrinsic: expected p + 1 coordinates");
  const Eigen::VectorXd raw = basis.arithmetic_mean + basis.loadings * g.tail(basis.p());
  const double norm = raw.norm();
  if (norm < 1e-300) throw PnsError("lift_extrinsic: zero vector before normalization");
  return raw / norm;
}

FastPnsResult fast_pns(const Eigen::MatrixXd& data, std::optional<int> p,
                       const PnsOptions& opts) {
  FastPnsResult out;
  out.basis = build_basis(data, p);
  out.reduced.resize(data.rows(), out.basis.p() + 1);
  out.projection_residuals.resize(data.rows());
  int flagged = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const ReducedPoint rp = project_reduced(data.row(i).transpose(), out.basis);
    if (rp.antipodal) ++flagged;
    out.reduced.row(i) = rp.coords.transpose();
    out.projection_residuals(i) =
        (data.row(i).transpose() - lift_exact(rp.coords, out.basis)).norm();
  }
  out.fit = fit_pns(out.reduced, opts);
  if (flagged > 0) {
    out.fit.model.warnings.push_back(std::to_string(flagged) +
                                     " observation(s) antipodal to the mean were sent to the pole");
  }
  for (const auto& w : out.basis.warnings) out.fit.model.warnings.push_back(w);
  return out;
}

}  // namespace pns

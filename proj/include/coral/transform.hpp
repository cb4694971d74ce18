// The CORAL transforms: covariance estimation, regularized whitening and
// re-coloring, the low-rank analytical solution, and the equivalent
// weight-space transform for linear classifiers.
#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "coral/errors.hpp"
#include "coral/linalg.hpp"
#include "coral/svm.hpp"
#include "coral/types.hpp"

namespace coral {

/// A fitted source-to-target feature map. `matrix` multiplies feature rows
/// from the right. In regularized mode rank == dim; in analytical mode rank
/// is min(rank C_S, rank C_T).
struct CoralTransform {
  enum class Mode { regularized, analytical };

  Matrix matrix;
  double lambda = 0.0;
  Mode mode = Mode::regularized;
  Index rank = 0;

  Index dim() const { return matrix.rows(); }
};

/// Per-column statistics recorded when normalizing a feature matrix.
struct NormalizationStats {
  Vector means;
  Vector stds;  // 0 only where the column was constant
};

/// Sample covariance (n-1 denominator) plus lambda on the diagonal.
inline Matrix estimate_covariance(const Matrix& features, double lambda) {
  if (features.rows() < 2) {
    throw ProtocolError("covariance needs at least two samples");
  }
  if (lambda < 0.0) throw InputError("lambda must be non-negative");
  linalg::detail::require_finite(features, "covariance input");

  const Index n = features.rows();
  const Index d = features.cols();
  Matrix centered = features.rowwise() - features.colwise().mean();
  Matrix cov = Matrix::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                 1.0 / double(n - 1));
  cov = Matrix(cov.selfadjointView<Eigen::Lower>());
  cov.diagonal().array() += lambda;
  return cov;
}

namespace detail {

inline Vector powered_eigenvalues(const linalg::EigenDecomposition& E,
                                  double p) {
  const double largest = std::max(E.values(0), 0.0);
  if (E.values(E.values.size() - 1) < -1e-8 * largest) {
    throw NumericalError("covariance is not positive semi-definite");
  }
  Vector powered(E.values.size());
  if (p == 0.5) {
    for (Index i = 0; i < E.values.size(); ++i) {
      powered(i) = std::sqrt(std::max(E.values(i), 0.0));
    }
  } else {
    const double clamp = 1e-12 * std::max(largest, 1.0);
    for (Index i = 0; i < E.values.size(); ++i) {
      powered(i) = 1.0 / std::sqrt(std::max(E.values(i), clamp));
    }
  }
  return powered;
}

inline Matrix power_from_eig(const linalg::EigenDecomposition& E, double p) {
  const Vector powered = powered_eigenvalues(E, p);
  return E.vectors * powered.asDiagonal() * E.vectors.transpose();
}

// (cov + lambda I)^p without forming the D x D covariance when n < D:
// the covariance is lambda I plus a rank <= n-1 term, so its spectrum splits
// into eigenpairs of the n x n Gram matrix plus lambda on the complement.
inline Matrix covariance_power_gram(const Matrix& features, double lambda,
                                    double p) {
  const Index n = features.rows();
  const Index d = features.cols();
  Matrix centered = features.rowwise() - features.colwise().mean();

  Matrix gram = Matrix::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered,
                                                  1.0 / double(n - 1));
  gram = Matrix(gram.selfadjointView<Eigen::Lower>());
  const linalg::EigenDecomposition E = linalg::sym_eig(gram);

  const double largest = std::max(E.values(0), 0.0);
  const double cutoff = double(n) * std::numeric_limits<double>::epsilon() *
                        largest;
  Index k = 0;
  while (k < n && E.values(k) > cutoff) ++k;

  const double base = p == 0.5 ? std::sqrt(lambda) : 1.0 / std::sqrt(lambda);
  Matrix result = Matrix::Zero(d, d);
  result.diagonal().setConstant(base);
  if (k == 0) return result;

  // Lift Gram eigenvectors to covariance eigenvectors of unit norm.
  Matrix lifted(d, k);
  for (Index i = 0; i < k; ++i) {
    lifted.col(i) = centered.transpose() * E.vectors.col(i) /
                    std::sqrt(double(n - 1) * E.values(i));
  }
  Vector gain(k);
  for (Index i = 0; i < k; ++i) {
    const double v = E.values(i) + lambda;
    gain(i) = (p == 0.5 ? std::sqrt(v) : 1.0 / std::sqrt(v)) - base;
  }
  result.noalias() += (lifted * gain.asDiagonal()) * lifted.transpose();
  return result;
}

inline Matrix covariance_power(const Matrix& features, double lambda,
                               double p) {
  if (features.rows() < features.cols() && lambda > 0.0) {
    return covariance_power_gram(features, lambda, p);
  }
  return power_from_eig(linalg::sym_eig(estimate_covariance(features, lambda)),
                        p);
}

inline void require_same_dim(const Matrix& source, const Matrix& target) {
  if (source.cols() != target.cols()) {
    std::ostringstream os;
    os << "source dimension " << source.cols() << " does not match target "
       << target.cols();
    throw ShapeError(os.str());
  }
}

}  // namespace detail

/// (cov(F) + lambda I)^{-1/2}: the map that whitens F's feature rows.
inline Matrix whitening_transform(const Matrix& features, double lambda) {
  return detail::covariance_power(features, lambda, -0.5);
}

/// (cov(F) + lambda I)^{+1/2}: the map that re-colors whitened rows with
/// F's covariance.
inline Matrix coloring_transform(const Matrix& features, double lambda) {
  return detail::covariance_power(features, lambda, 0.5);
}

/// Regularized CORAL: whiten the source with (C_S + lambda I)^{-1/2}, then
/// re-color with (C_T + lambda I)^{+1/2}. Returns the adjusted source
/// features and the fitted transform. lambda = 0 requires both covariances
/// to be full rank.
inline std::pair<Matrix, CoralTransform> coral_regularized(
    const Matrix& source, const Matrix& target, double lambda = 1.0) {
  detail::require_same_dim(source, target);
  if (lambda < 0.0) throw InputError("lambda must be non-negative");
  if (source.rows() < 2 || target.rows() < 2) {
    throw ProtocolError("both domains need at least two samples");
  }

  const Index d = source.cols();
  Matrix map;
  if (lambda == 0.0) {
    const auto es = linalg::sym_eig(estimate_covariance(source, 0.0));
    const auto et = linalg::sym_eig(estimate_covariance(target, 0.0));
    if (linalg::numerical_rank(es) < d || linalg::numerical_rank(et) < d) {
      throw NumericalError(
          "covariance is singular at lambda = 0; use the analytical mode or "
          "a positive lambda");
    }
    map = detail::power_from_eig(es, -0.5) * detail::power_from_eig(et, 0.5);
  } else {
    map = whitening_transform(source, lambda) *
          coloring_transform(target, lambda);
  }

  CoralTransform transform{std::move(map), lambda,
                           CoralTransform::Mode::regularized, d};
  return {source * transform.matrix, std::move(transform)};
}

/// Analytical CORAL for (possibly) low-rank covariances:
/// A = U_S (Sigma_S^+)^{1/2} U_S^T . U_T[1:r] Sigma_T[1:r]^{1/2} U_T[1:r]^T
/// with r = min(rank C_S, rank C_T) and unregularized covariances.
inline CoralTransform coral_analytical(const Matrix& source,
                                       const Matrix& target) {
  detail::require_same_dim(source, target);
  if (source.rows() < 2 || target.rows() < 2) {
    throw ProtocolError("both domains need at least two samples");
  }

  const auto es = linalg::sym_eig(estimate_covariance(source, 0.0));
  const auto et = linalg::sym_eig(estimate_covariance(target, 0.0));
  const Index r =
      std::min(linalg::numerical_rank(es), linalg::numerical_rank(et));

  const Matrix whitener = linalg::pseudo_inverse_sqrt(es);
  Matrix colorer = Matrix::Zero(es.dim(), es.dim());
  if (r > 0) {
    const Vector roots = et.values.head(r).cwiseMax(0.0).cwiseSqrt();
    colorer = et.vectors.leftCols(r) * roots.asDiagonal() *
              et.vectors.leftCols(r).transpose();
  }
  return CoralTransform{whitener * colorer, 0.0,
                        CoralTransform::Mode::analytical, r};
}

/// Row-wise application of a fitted transform.
inline Matrix apply_transform(const Matrix& features,
                              const CoralTransform& transform) {
  if (features.cols() != transform.dim()) {
    std::ostringstream os;
    os << "feature dimension " << features.cols()
       << " does not match transform " << transform.dim();
    throw ShapeError(os.str());
  }
  return features * transform.matrix;
}

/// Fold the feature map into the classifier: score(pulled, u) equals
/// score(model, u * A) for every row u, so high-volume inputs need no
/// per-example transform. Biases are untouched.
inline LinearModel pull_back_weights(const LinearModel& model,
                                     const CoralTransform& transform) {
  if (model.dim() != transform.dim()) {
    std::ostringstream os;
    os << "model dimension " << model.dim() << " does not match transform "
       << transform.dim();
    throw ShapeError(os.str());
  }
  LinearModel pulled = model;
  pulled.weights = model.weights * transform.matrix.transpose();
  return pulled;
}

/// Center each column and scale non-constant columns to unit sample
/// standard deviation; constant columns map to zero. Returns the applied
/// statistics.
inline std::pair<Matrix, NormalizationStats> normalize_features(
    const Matrix& features) {
  if (features.rows() < 2) {
    throw ProtocolError("normalization needs at least two samples");
  }
  linalg::detail::require_finite(features, "normalization input");

  const Index n = features.rows();
  const Index d = features.cols();
  Matrix out(n, d);
  NormalizationStats stats{Vector(d), Vector(d)};

  for (Index j = 0; j < d; ++j) {
    const auto col = features.col(j);
    if (col.maxCoeff() == col.minCoeff()) {
      out.col(j).setZero();
      stats.means(j) = col(0);
      stats.stds(j) = 0.0;
      continue;
    }
    const double mean = col.mean();
    Vector centered = col.array() - mean;
    const double residual = centered.mean();  // second pass kills fp drift
    centered.array() -= residual;
    const double std_dev = std::sqrt(centered.squaredNorm() / double(n - 1));
    out.col(j) = centered / std_dev;
    stats.means(j) = mean + residual;
    stats.stds(j) = std_dev;
  }
  return {std::move(out), std::move(stats)};
}

}  // namespace coral

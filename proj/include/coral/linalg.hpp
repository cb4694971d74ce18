// Dense symmetric-matrix primitives: eigendecomposition, fractional powers,
// pseudo-inverse square roots, low-rank truncation and rank estimation.
#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "coral/errors.hpp"
#include "coral/types.hpp"

namespace coral::linalg {

/// Eigendecomposition of a symmetric matrix. `vectors` has orthonormal
/// columns, `values` is sorted non-increasing, and
/// vectors * diag(values) * vectors^T reconstructs the input.
struct EigenDecomposition {
  Matrix vectors;
  Vector values;

  Index dim() const { return values.size(); }

  Matrix recompose() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/// Default relative tolerance for rank decisions: D * machine epsilon.
/// Absolute cutoffs are formed as tol * max(eigenvalue, 0).
inline double default_rank_tol(Index dim) {
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
}

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + " contains non-finite entries");
  }
}

inline void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw ShapeError(os.str());
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = j + 1; i < m.rows(); ++i) {
      const double a = m(i, j), b = m(j, i);
      if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) {
        std::ostringstream os;
        os << "matrix is not symmetric at (" << i << "," << j << "): " << a
           << " vs " << b;
        throw InputError(os.str());
      }
    }
  }
}

// Deterministic orientation: flip each column so that its first entry of
// non-negligible magnitude is positive.
inline void fix_eigenvector_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double v = vectors(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) vectors.col(j) = -vectors.col(j);
        break;
      }
    }
  }
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix. The input is symmetrized as
/// (S + S^T)/2 first to absorb accumulation drift; grossly asymmetric or
/// non-finite input is rejected.
inline EigenDecomposition sym_eig(const Matrix& S) {
  detail::require_finite(S, "sym_eig input");
  detail::require_symmetric(S);

  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed to converge");
  }

  // Eigen returns ascending order; flip to non-increasing.
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  detail::fix_eigenvector_signs(out.vectors);
  return out;
}

/// Count of eigenvalues above the relative tolerance cutoff. Zero for the
/// zero matrix.
inline Index numerical_rank(const EigenDecomposition& E, double rank_tol) {
  const double largest = E.values.size() > 0 ? std::max(E.values(0), 0.0) : 0.0;
  const double cutoff = rank_tol * largest;
  Index rank = 0;
  for (Index i = 0; i < E.values.size(); ++i) {
    if (E.values(i) > cutoff) ++rank;
  }
  return rank;
}

inline Index numerical_rank(const EigenDecomposition& E) {
  return numerical_rank(E, default_rank_tol(E.dim()));
}

/// S^p for p in {+1/2, -1/2} of a PSD matrix.
///
/// For the inverse root, eigenvalues are clamped from below at
/// 1e-12 * max(lambda_max, 1) so near-singular covariances stay usable.
inline Matrix matrix_power(const Matrix& S, double p) {
  if (p != 0.5 && p != -0.5) {
    std::ostringstream os;
    os << "unsupported matrix power " << p << " (only +1/2 and -1/2)";
    throw InputError(os.str());
  }
  const EigenDecomposition E = sym_eig(S);
  const double largest = std::max(E.values(0), 0.0);
  if (E.values(E.values.size() - 1) < -1e-8 * largest) {
    std::ostringstream os;
    os << "matrix is not positive semi-definite (min eigenvalue "
       << E.values(E.values.size() - 1) << ")";
    throw NumericalError(os.str());
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
  return E.vectors * powered.asDiagonal() * E.vectors.transpose();
}

/// U * (Sigma^+)^{1/2} * U^T: eigenvalues at or below the relative cutoff
/// map to zero, the rest to lambda^{-1/2}.
inline Matrix pseudo_inverse_sqrt(const EigenDecomposition& E,
                                  double rank_tol) {
  const double largest = E.values.size() > 0 ? std::max(E.values(0), 0.0) : 0.0;
  const double cutoff = rank_tol * largest;
  Vector powered(E.values.size());
  for (Index i = 0; i < E.values.size(); ++i) {
    powered(i) = E.values(i) > cutoff ? 1.0 / std::sqrt(E.values(i)) : 0.0;
  }
  return E.vectors * powered.asDiagonal() * E.vectors.transpose();
}

inline Matrix pseudo_inverse_sqrt(const EigenDecomposition& E) {
  return pseudo_inverse_sqrt(E, default_rank_tol(E.dim()));
}

/// Best rank-r approximation: keep the r largest eigenpairs
/// (Eckart-Young in the Frobenius norm).
inline Matrix truncated_reconstruction(const EigenDecomposition& E, Index r) {
  if (r < 0 || r > E.dim()) {
    std::ostringstream os;
    os << "rank " << r << " out of range [0," << E.dim() << "]";
    throw InputError(os.str());
  }
  if (r == 0) return Matrix::Zero(E.dim(), E.dim());
  return E.vectors.leftCols(r) * E.values.head(r).asDiagonal() *
         E.vectors.leftCols(r).transpose();
}

/// ||X - Y||_F.
inline double frobenius_distance(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    std::ostringstream os;
    os << "dimension mismatch: " << X.rows() << "x" << X.cols() << " vs "
       << Y.rows() << "x" << Y.cols();
    throw ShapeError(os.str());
  }
  return (X - Y).norm();
}

}  // namespace coral::linalg

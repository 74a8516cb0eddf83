#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "datos/errors.hpp"

namespace datos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-stacked agent variables: row i belongs to agent i.
using Stack = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are the matching unit eigenvectors
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `tol * max(1, ||A||_F)`. Only the symmetric part of `a` is used.
inline SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-13, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) {
    throw DataError("jacobi_eigen: matrix is not square");
  }
  Matrix work = 0.5 * (a + a.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double threshold = tol * std::max(1.0, work.norm());

  auto off_norm = [&] {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) sum += work(i, j) * work(i, j);
      }
    }
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() > threshold; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = work(p, q);
        if (apq == 0.0) continue;
        const double theta = (work(q, q) - work(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = work(k, p);
          const double akq = work(k, q);
          work(k, p) = c * akp - s * akq;
          work(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = work(p, k);
          const double aqk = work(q, k);
          work(p, k) = c * apk - s * aqk;
          work(q, k) = s * apk + c * aqk;
        }
        work(p, q) = 0.0;
        work(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index lhs, Eigen::Index rhs) { return work(lhs, lhs) < work(rhs, rhs); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = work(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// V diag(fn(lambda)) V^T for symmetric `a`.
template <class Fn>
Matrix spectral_map(const Matrix& a, Fn&& fn) {
  const SymmetricEigen eig = jacobi_eigen(a);
  Vector mapped = eig.values.unaryExpr(std::forward<Fn>(fn));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

/// Symmetric PSD square root. Eigenvalues in [-1e-12, 0) are clamped to 0.
inline Matrix psd_sqrt(const Matrix& a) {
  return spectral_map(a, [](double lambda) {
    if (lambda < -1e-12) {
      throw NumericalError("psd_sqrt: matrix has a negative eigenvalue");
    }
    return std::sqrt(std::max(lambda, 0.0));
  });
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues with
/// |lambda| <= cutoff * max|lambda| are treated as zero.
inline Matrix symmetric_pinv(const Matrix& a, double cutoff = 1e-10) {
  const SymmetricEigen eig = jacobi_eigen(a);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  Vector inv = eig.values.unaryExpr([&](double lambda) {
    return std::abs(lambda) <= cutoff * scale ? 0.0 : 1.0 / lambda;
  });
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

inline double min_eigenvalue(const Matrix& a) { return jacobi_eigen(a).values.minCoeff(); }

/// Column sums as a row vector (1^T X).
inline Eigen::RowVectorXd column_sums(const Stack& x) { return x.colwise().sum(); }

}  // namespace datos

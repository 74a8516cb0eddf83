#pragma once

#include <cstdint>
#include <random>

#include "datos/linalg.hpp"
#include "datos/problems.hpp"

namespace datos::testing {

// Hand-rolled generators for property tests.

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Stack random_stack(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Stack s(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) s(i, j) = normal(rng);
  }
  return s;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  const Matrix a = random_stack(rng, n, n, scale);
  return 0.5 * (a + a.transpose());
}

/// Symmetric positive definite with eigenvalues in [lo, hi].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  const Eigen::HouseholderQR<Matrix> qr(random_stack(rng, n, n));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> unit(lo, hi);
  Vector ev(n);
  for (Eigen::Index i = 0; i < n; ++i) ev(i) = unit(rng);
  const Matrix out = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

inline Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix square(const Vector& v, Eigen::Index side) { return Eigen::Map<const Matrix>(v.data(), side, side); }

/// Central differences with step h scaled by coordinate magnitude.
template <class Fn>
Vector finite_difference_gradient(const Fn& value, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    Vector plus = x;
    Vector minus = x;
    plus(i) += step;
    minus(i) -= step;
    g(i) = (value(plus) - value(minus)) / (2.0 * step);
  }
  return g;
}

/// Symmetric perturbation keeps flattened-matrix losses on their natural
/// subspace: perturbing (i,j) and (j,i) together.
template <class Fn>
Vector finite_difference_symmetric(const Fn& value, const Vector& x, Eigen::Index side, double h = 1e-6) {
  Vector g = Vector::Zero(x.size());
  for (Eigen::Index i = 0; i < side; ++i) {
    for (Eigen::Index j = i; j < side; ++j) {
      const double step = h * std::max(1.0, std::abs(x(i + j * side)));
      Vector plus = x;
      Vector minus = x;
      plus(i + j * side) += step;
      minus(i + j * side) -= step;
      if (i != j) {
        plus(j + i * side) += step;
        minus(j + i * side) -= step;
      }
      const double directional = (value(plus) - value(minus)) / (2.0 * step);
      if (i == j) {
        g(i + j * side) = directional;
      } else {
        g(i + j * side) = directional / 2.0;
        g(j + i * side) = directional / 2.0;
      }
    }
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace datos::testing

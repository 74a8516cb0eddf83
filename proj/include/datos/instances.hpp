#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "datos/errors.hpp"
#include "datos/libsvm.hpp"
#include "datos/linalg.hpp"
#include "datos/problems.hpp"

namespace datos {

/// Per-agent least squares with ridge weights gamma_i = gamma_base + i * gamma_step
/// (0-based i) and an l1 regularizer. Entries of A_i and b_i are i.i.d. N(0,1).
struct RegressionSpec {
  std::size_t agents = 20;
  std::size_t samples = 20;  // n per agent
  std::size_t dim = 500;
  double gamma_base = 0.1;
  double gamma_step = 0.1;
  double lambda = 1e-5;
  std::uint64_t seed = 0;
};

struct RegressionInstance {
  CompositeProblem problem;
  std::vector<Matrix> a;
  std::vector<Vector> b;
  std::vector<double> gamma;
};

inline RegressionInstance gen_regression_instance(const RegressionSpec& spec) {
  if (spec.agents == 0 || spec.samples == 0 || spec.dim == 0) {
    throw ConfigError("gen_regression_instance: sizes must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(spec.samples);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  std::vector<LossPtr> losses;
  std::vector<Matrix> as;
  std::vector<Vector> bs;
  std::vector<double> gammas;
  for (std::size_t i = 0; i < spec.agents; ++i) {
    Matrix a(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) = normal(rng);
    }
    Vector b(n);
    for (Eigen::Index r = 0; r < n; ++r) b(r) = normal(rng);
    const double gamma = spec.gamma_base + static_cast<double>(i) * spec.gamma_step;
    losses.push_back(quadratic_ridge_loss(a, b, gamma));
    as.push_back(std::move(a));
    bs.push_back(std::move(b));
    gammas.push_back(gamma);
  }
  return RegressionInstance{CompositeProblem(std::move(losses), prox_l1(spec.lambda)), std::move(as), std::move(bs),
                            std::move(gammas)};
}

/// Condition number max_i L_i / mu, where L_i are the local smoothness
/// constants and mu is the strong-convexity modulus of f = (1/m) sum f_i.
inline double regression_condition_number(const RegressionInstance& inst) {
  const auto d = inst.a.front().cols();
  Matrix hessian = Matrix::Zero(d, d);
  double l_max = 0.0;
  for (std::size_t i = 0; i < inst.a.size(); ++i) {
    const double n = static_cast<double>(inst.a[i].rows());
    hessian += (2.0 / n) * (inst.a[i].transpose() * inst.a[i]);
    hessian.diagonal().array() += inst.gamma[i];
    l_max = std::max(l_max, inst.problem.loss(i).lipschitz().value());
  }
  hessian /= static_cast<double>(inst.a.size());
  const double mu = Eigen::SelfAdjointEigenSolver<Matrix>(hessian, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return l_max / mu;
}

/// Per-agent sample covariances Y_i = (1/n) sum_j y_j y_j^T, y_j ~ N(0, Sigma),
/// with the spectral-box constraint a I <= X <= b I.
struct CovarianceSpec {
  Matrix sigma;
  std::size_t samples = 100;
  std::size_t agents = 20;
  double lower = 0.1;
  double upper = 10.0;
  TraceSign sign = TraceSign::kAsPrinted;
  std::uint64_t seed = 0;
};

struct CovarianceInstance {
  CompositeProblem problem;
  std::vector<Matrix> y;
};

inline CovarianceInstance gen_covariance_instance(const CovarianceSpec& spec) {
  const Matrix& sigma = spec.sigma;
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols() ||
      (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw DataError("gen_covariance_instance: Sigma must be square and symmetric");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DataError("gen_covariance_instance: Sigma is not positive definite");
  }
  if (spec.samples == 0 || spec.agents == 0) {
    throw ConfigError("gen_covariance_instance: sizes must be positive");
  }
  const Matrix chol = llt.matrixL();
  const Eigen::Index d = sigma.rows();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<LossPtr> losses;
  std::vector<Matrix> ys;
  for (std::size_t i = 0; i < spec.agents; ++i) {
    Matrix y = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < spec.samples; ++j) {
      Vector z(d);
      for (Eigen::Index c = 0; c < d; ++c) z(c) = normal(rng);
      const Vector sample = chol * z;
      y += sample * sample.transpose();
    }
    y /= static_cast<double>(spec.samples);
    y = 0.5 * (y + y.transpose());
    losses.push_back(logdet_loss(y, static_cast<double>(spec.samples), spec.sign));
    ys.push_back(std::move(y));
  }
  return CovarianceInstance{CompositeProblem(std::move(losses), prox_spectral_box(spec.lower, spec.upper)),
                            std::move(ys)};
}

/// AR(1) covariance Sigma_ij = rho^|i-j|.
inline Matrix ar1_covariance(std::size_t d, double rho) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return sigma;
}

/// Synthetic sparse classification data: features N(0,1) with the given
/// density, labels sign(<a, w_true>) flipped with probability `flip`.
struct LogisticSpec {
  std::size_t rows = 200;
  std::size_t dim = 30;
  double density = 0.3;
  double flip = 0.1;
  std::uint64_t seed = 0;
};

inline Dataset gen_logistic_dataset(const LogisticSpec& spec) {
  if (spec.rows == 0 || spec.dim == 0 || !(spec.density > 0.0 && spec.density <= 1.0)) {
    throw ConfigError("gen_logistic_dataset: invalid sizes or density");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector truth(static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index c = 0; c < truth.size(); ++c) truth(c) = normal(rng);

  Dataset data;
  data.dim = spec.dim;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    SparseRow row;
    double margin = 0.0;
    for (std::size_t c = 0; c < spec.dim; ++c) {
      if (unit(rng) < spec.density) {
        const double v = normal(rng);
        row.features.emplace_back(c, v);
        margin += v * truth(static_cast<Eigen::Index>(c));
      }
    }
    row.label = margin >= 0.0 ? 1.0 : -1.0;
    if (unit(rng) < spec.flip) row.label = -row.label;
    data.rows.push_back(std::move(row));
  }
  return data;
}

/// One logistic loss per contiguous shard plus lambda * ||x||_1.
inline CompositeProblem logistic_problem(const std::vector<Dataset>& shards, std::size_t dim, double lambda) {
  std::vector<LossPtr> losses;
  for (const auto& shard : shards) losses.push_back(logistic_loss(shard, dim));
  return CompositeProblem(std::move(losses), prox_l1(lambda));
}

}  // namespace datos

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "datos/errors.hpp"
#include "datos/libsvm.hpp"
#include "datos/linalg.hpp"

namespace datos {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Convex, locally smooth per-agent loss f_i over flat d-vectors.
///
/// `value` returns +inf exactly when `in_domain` is false; `gradient` is only
/// meaningful inside the domain.
class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual bool in_domain(const Vector& /*x*/) const { return true; }
  /// Global gradient-Lipschitz constant, if the loss is globally smooth.
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
};

/// Convex, proper, lsc regularizer r with a cheap proximal map.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  virtual double value(const Vector& x) const = 0;
  /// argmin_y r(y) + ||x - y||^2 / (2 alpha), alpha > 0.
  virtual Vector prox(const Vector& x, double alpha) const = 0;
};

namespace detail {

// log(1 + exp(-t)) without overflow.
inline double log1p_exp_neg(double t) {
  return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// 1 / (1 + exp(-z))
inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double max_eigenvalue(const Matrix& symmetric) { return jacobi_eigen(symmetric).values.maxCoeff(); }

inline std::size_t square_side(Eigen::Index flat_size, const char* who) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat_size))));
  if (static_cast<Eigen::Index>(side * side) != flat_size) {
    throw DataError(std::string(who) + ": input of length " + std::to_string(flat_size) +
                    " is not a flattened square matrix");
  }
  return side;
}

inline Matrix unflatten_symmetric(const Vector& x, std::size_t side) {
  const auto n = static_cast<Eigen::Index>(side);
  Eigen::Map<const Matrix> raw(x.data(), n, n);
  return 0.5 * (raw + raw.transpose());
}

inline Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline bool nearly_symmetric(const Vector& x, std::size_t side) {
  const auto n = static_cast<Eigen::Index>(side);
  Eigen::Map<const Matrix> raw(x.data(), n, n);
  const double scale = 1.0 + raw.cwiseAbs().maxCoeff();
  return (raw - raw.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

}  // namespace detail

/// (1/n) sum_j log(1 + exp(-b_j <x, a_j>)) over sparse samples.
class LogisticLoss final : public SmoothLoss {
 public:
  LogisticLoss(std::vector<SparseRow> rows, std::size_t dim) : rows_(std::move(rows)), dim_(dim) {
    if (rows_.empty()) {
      throw DataError("logistic_loss: empty shard");
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const double label = rows_[r].label;
      if (label != 1.0 && label != -1.0) {
        throw DataError("logistic_loss: label " + std::to_string(label) + " in row " + std::to_string(r) +
                        " is not +1/-1");
      }
      for (const auto& [index, unused] : rows_[r].features) {
        if (index >= dim_) {
          throw DataError("logistic_loss: feature index exceeds dimension");
        }
      }
    }
  }

  std::size_t dim() const override { return dim_; }

  double value(const Vector& x) const override {
    double sum = 0.0;
    for (const auto& row : rows_) sum += detail::log1p_exp_neg(row.label * margin(row, x));
    return sum / static_cast<double>(rows_.size());
  }

  Vector gradient(const Vector& x) const override {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (const auto& row : rows_) {
      const double weight = -row.label * detail::logistic(-row.label * margin(row, x));
      for (const auto& [index, value] : row.features) g(static_cast<Eigen::Index>(index)) += weight * value;
    }
    return g / static_cast<double>(rows_.size());
  }

  /// (1/4n) * lambda_max(A^T A), computed on the n x n Gram matrix.
  std::optional<double> lipschitz() const override {
    const auto n = static_cast<Eigen::Index>(rows_.size());
    Matrix dense = Matrix::Zero(n, static_cast<Eigen::Index>(dim_));
    for (Eigen::Index r = 0; r < n; ++r) {
      for (const auto& [index, value] : rows_[static_cast<std::size_t>(r)].features) {
        dense(r, static_cast<Eigen::Index>(index)) = value;
      }
    }
    const Matrix gram = dense * dense.transpose();
    return detail::max_eigenvalue(gram) / (4.0 * static_cast<double>(n));
  }

  const std::vector<SparseRow>& rows() const noexcept { return rows_; }

 private:
  static double margin(const SparseRow& row, const Vector& x) {
    double t = 0.0;
    for (const auto& [index, value] : row.features) t += x(static_cast<Eigen::Index>(index)) * value;
    return t;
  }

  std::vector<SparseRow> rows_;
  std::size_t dim_;
};

/// Which sign the linear trace term carries in the log-det loss.
enum class TraceSign {
  kAsPrinted,     // -n log det X - trace(X Y)
  kConventional,  // -n log det X + trace(X Y)
};

/// -n log det X -/+ trace(X Y) over flattened d x d matrices. The variable is
/// symmetrized before evaluation; the domain is the positive definite cone.
class LogDetLoss final : public SmoothLoss {
 public:
  LogDetLoss(Matrix y, double n, TraceSign sign) : y_(std::move(y)), n_(n), sign_(sign) {
    if (y_.rows() != y_.cols() || y_.rows() == 0) {
      throw DataError("logdet_loss: sample covariance must be square and nonempty");
    }
    const double scale = 1.0 + y_.cwiseAbs().maxCoeff();
    if ((y_ - y_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DataError("logdet_loss: sample covariance is not symmetric");
    }
    if (!(n_ > 0.0)) {
      throw DataError("logdet_loss: sample count must be positive");
    }
  }

  std::size_t dim() const override { return static_cast<std::size_t>(y_.size()); }
  std::size_t side() const noexcept { return static_cast<std::size_t>(y_.rows()); }

  bool in_domain(const Vector& x) const override { return factor(x).has_value(); }

  double value(const Vector& x) const override {
    const auto llt = factor(x);
    if (!llt) return kInfinity;
    const Matrix s = detail::unflatten_symmetric(x, side());
    const double log_det = 2.0 * llt->matrixLLT().diagonal().array().log().sum();
    return -n_ * log_det + trace_sign() * (s.cwiseProduct(y_)).sum();
  }

  Vector gradient(const Vector& x) const override {
    const auto llt = factor(x);
    if (!llt) {
      throw DataError("logdet_loss: gradient requested outside the positive definite cone");
    }
    const auto d = static_cast<Eigen::Index>(side());
    const Matrix inverse = llt->solve(Matrix::Identity(d, d));
    const Matrix g = -n_ * 0.5 * (inverse + inverse.transpose()) + trace_sign() * y_;
    return detail::flatten(g);
  }

  const Matrix& sample_covariance() const noexcept { return y_; }

 private:
  double trace_sign() const { return sign_ == TraceSign::kAsPrinted ? -1.0 : 1.0; }

  std::optional<Eigen::LLT<Matrix>> factor(const Vector& x) const {
    if (x.size() != y_.size()) {
      throw DataError("logdet_loss: dimension mismatch");
    }
    if (!x.allFinite() || !detail::nearly_symmetric(x, side())) return std::nullopt;
    Eigen::LLT<Matrix> llt(detail::unflatten_symmetric(x, side()));
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
      return std::nullopt;
    }
    return llt;
  }

  Matrix y_;
  double n_;
  TraceSign sign_;
};

/// (1/n) ||A x - b||^2 + (gamma/2) ||x||^2.
class QuadraticRidgeLoss final : public SmoothLoss {
 public:
  QuadraticRidgeLoss(Matrix a, Vector b, double gamma) : a_(std::move(a)), b_(std::move(b)), gamma_(gamma) {
    if (a_.rows() != b_.size() || a_.rows() == 0) {
      throw DataError("quadratic_ridge_loss: A has " + std::to_string(a_.rows()) + " rows but b has " +
                      std::to_string(b_.size()) + " entries");
    }
    if (!(gamma_ >= 0.0)) {
      throw DataError("quadratic_ridge_loss: ridge weight must be nonnegative");
    }
  }

  std::size_t dim() const override { return static_cast<std::size_t>(a_.cols()); }

  double value(const Vector& x) const override {
    check(x);
    return (a_ * x - b_).squaredNorm() / samples() + 0.5 * gamma_ * x.squaredNorm();
  }

  Vector gradient(const Vector& x) const override {
    check(x);
    return (2.0 / samples()) * (a_.transpose() * (a_ * x - b_)) + gamma_ * x;
  }

  std::optional<double> lipschitz() const override {
    const Matrix gram = a_ * a_.transpose();
    return 2.0 / samples() * detail::max_eigenvalue(gram) + gamma_;
  }

  /// Smallest Hessian eigenvalue, (2/n) lambda_min(A^T A) + gamma.
  double strong_convexity() const {
    const Matrix gram = a_.transpose() * a_;
    return 2.0 / samples() * jacobi_eigen(gram).values.minCoeff() + gamma_;
  }

  const Matrix& design() const noexcept { return a_; }
  const Vector& response() const noexcept { return b_; }
  double ridge() const noexcept { return gamma_; }

 private:
  double samples() const { return static_cast<double>(a_.rows()); }
  void check(const Vector& x) const {
    if (x.size() != a_.cols()) {
      throw DataError("quadratic_ridge_loss: dimension mismatch");
    }
  }

  Matrix a_;
  Vector b_;
  double gamma_;
};

/// (1/2) (x - center)^T H (x - center), H symmetric PSD.
class QuadraticLoss final : public SmoothLoss {
 public:
  QuadraticLoss(Matrix h, Vector center) : h_(std::move(h)), center_(std::move(center)) {
    if (h_.rows() != h_.cols() || h_.rows() != center_.size()) {
      throw DataError("quadratic_loss: shape mismatch");
    }
  }

  std::size_t dim() const override { return static_cast<std::size_t>(center_.size()); }
  double value(const Vector& x) const override {
    const Vector r = x - center_;
    return 0.5 * r.dot(h_ * r);
  }
  Vector gradient(const Vector& x) const override { return h_ * (x - center_); }
  std::optional<double> lipschitz() const override { return detail::max_eigenvalue(h_); }

 private:
  Matrix h_;
  Vector center_;
};

class ZeroRegularizer final : public Regularizer {
 public:
  double value(const Vector&) const override { return 0.0; }
  Vector prox(const Vector& x, double) const override { return x; }
};

/// lambda * ||x||_1, prox = soft thresholding at alpha * lambda.
class L1Regularizer final : public Regularizer {
 public:
  explicit L1Regularizer(double lambda) : lambda_(lambda) {
    if (!(lambda_ >= 0.0)) {
      throw ConfigError("prox_l1: weight must be nonnegative");
    }
  }

  double value(const Vector& x) const override { return lambda_ * x.lpNorm<1>(); }

  Vector prox(const Vector& x, double alpha) const override {
    const double level = alpha * lambda_;
    return x.unaryExpr([level](double v) {
      const double shrunk = std::abs(v) - level;
      return shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
    });
  }

  double weight() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// Indicator of {X symmetric : a I <= X <= b I} over flattened matrices.
class SpectralBoxRegularizer final : public Regularizer {
 public:
  SpectralBoxRegularizer(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower_ > 0.0 && upper_ >= lower_)) {
      throw ConfigError("prox_spectral_box: need 0 < a <= b");
    }
  }

  double value(const Vector& x) const override {
    const std::size_t side = detail::square_side(x.size(), "prox_spectral_box");
    if (!detail::nearly_symmetric(x, side)) return kInfinity;
    const Vector lambda = jacobi_eigen(detail::unflatten_symmetric(x, side)).values;
    const double tol = 1e-9 * (1.0 + upper_);
    return (lambda.minCoeff() >= lower_ - tol && lambda.maxCoeff() <= upper_ + tol) ? 0.0 : kInfinity;
  }

  /// Euclidean projection; independent of alpha.
  Vector prox(const Vector& x, double) const override {
    const std::size_t side = detail::square_side(x.size(), "prox_spectral_box");
    const double lo = lower_;
    const double hi = upper_;
    const Matrix projected = spectral_map(detail::unflatten_symmetric(x, side),
                                          [lo, hi](double lambda) { return std::clamp(lambda, lo, hi); });
    // Exact symmetry so downstream domain tests never see rounding asymmetry.
    return detail::flatten(0.5 * (projected + projected.transpose()));
  }

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

using LossPtr = std::shared_ptr<const SmoothLoss>;
using RegularizerPtr = std::shared_ptr<const Regularizer>;

inline LossPtr logistic_loss(const Dataset& shard, std::size_t dim) {
  return std::make_shared<LogisticLoss>(shard.rows, dim);
}
inline LossPtr logdet_loss(const Matrix& y, double n, TraceSign sign = TraceSign::kAsPrinted) {
  return std::make_shared<LogDetLoss>(y, n, sign);
}
inline LossPtr quadratic_ridge_loss(const Matrix& a, const Vector& b, double gamma) {
  return std::make_shared<QuadraticRidgeLoss>(a, b, gamma);
}
inline LossPtr quadratic_loss(const Matrix& h, const Vector& center) {
  return std::make_shared<QuadraticLoss>(h, center);
}
inline RegularizerPtr prox_l1(double lambda) { return std::make_shared<L1Regularizer>(lambda); }
inline RegularizerPtr prox_spectral_box(double a, double b) { return std::make_shared<SpectralBoxRegularizer>(a, b); }
inline RegularizerPtr zero_regularizer() { return std::make_shared<ZeroRegularizer>(); }

/// min_x (1/m) sum_i f_i(x) + r(x), with f_i held by agent i.
class CompositeProblem {
 public:
  CompositeProblem(std::vector<LossPtr> losses, RegularizerPtr regularizer)
      : losses_(std::move(losses)), regularizer_(std::move(regularizer)) {
    if (losses_.empty()) {
      throw ConfigError("composite problem: need at least one agent");
    }
    if (!regularizer_) {
      throw ConfigError("composite problem: missing regularizer");
    }
    for (const auto& loss : losses_) {
      if (!loss || loss->dim() != losses_.front()->dim()) {
        throw ConfigError("composite problem: all losses must share one dimension");
      }
    }
  }

  std::size_t agents() const noexcept { return losses_.size(); }
  std::size_t dim() const { return losses_.front()->dim(); }
  const SmoothLoss& loss(std::size_t i) const { return *losses_.at(i); }
  const Regularizer& regularizer() const noexcept { return *regularizer_; }
  const std::vector<LossPtr>& losses() const noexcept { return losses_; }

  /// f(x) = (1/m) sum_i f_i(x)
  double average_value(const Vector& x) const {
    double sum = 0.0;
    for (const auto& loss : losses_) {
      const double v = loss->value(x);
      if (!std::isfinite(v)) return kInfinity;
      sum += v;
    }
    return sum / static_cast<double>(agents());
  }

  Vector average_gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (const auto& loss : losses_) g += loss->gradient(x);
    return g / static_cast<double>(agents());
  }

  bool in_domain(const Vector& x) const {
    for (const auto& loss : losses_) {
      if (!loss->in_domain(x)) return false;
    }
    return true;
  }

  /// u(x) = f(x) + r(x)
  double objective(const Vector& x) const {
    const double f = average_value(x);
    return std::isfinite(f) ? f + regularizer_->value(x) : kInfinity;
  }

  /// Row i is grad f_i(x_i).
  Stack stacked_gradient(const Stack& x) const {
    Stack g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      g.row(i) = losses_[static_cast<std::size_t>(i)]->gradient(x.row(i).transpose()).transpose();
    }
    return g;
  }

  /// Row-wise prox with a common stepsize.
  Stack prox_rows(const Stack& v, double alpha) const {
    Stack out(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      out.row(i) = regularizer_->prox(v.row(i).transpose(), alpha).transpose();
    }
    return out;
  }

  /// Row-wise prox with per-row stepsizes.
  Stack prox_rows(const Stack& v, const Vector& alphas) const {
    Stack out(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      out.row(i) = regularizer_->prox(v.row(i).transpose(), alphas(i)).transpose();
    }
    return out;
  }

  /// Lipschitz bound max_i L_i, when every loss is globally smooth.
  std::optional<double> max_lipschitz() const {
    double best = 0.0;
    for (const auto& loss : losses_) {
      const auto l = loss->lipschitz();
      if (!l) return std::nullopt;
      best = std::max(best, *l);
    }
    return best;
  }

 private:
  std::vector<LossPtr> losses_;
  RegularizerPtr regularizer_;
};

/// f = (1/m) sum_i f_i viewed as a single smooth function.
struct AverageObjective {
  const CompositeProblem& problem;

  double value(const Vector& x) const { return problem.average_value(x); }
  Vector gradient(const Vector& x) const { return problem.average_gradient(x); }
};

}  // namespace datos

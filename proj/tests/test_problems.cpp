#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "datos/instances.hpp"
#include "datos/problems.hpp"
#include "support.hpp"

namespace datos {
namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;
using testing::finite_difference_gradient;
using testing::finite_difference_symmetric;
using testing::flat;
using testing::random_vector;
using testing::relative_error;

Dataset random_shard(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Dataset data;
  data.dim = d;
  for (std::size_t r = 0; r < n; ++r) {
    SparseRow row;
    row.label = coin(rng) ? 1.0 : -1.0;
    for (std::size_t c = 0; c < d; ++c) row.features.emplace_back(c, normal(rng));
    data.rows.push_back(row);
  }
  return data;
}

TEST(LogisticLoss, ValueAndGradientAtZero) {
  std::mt19937_64 rng(1);
  const Dataset shard = random_shard(rng, 6, 4);
  const auto loss = logistic_loss(shard, 4);
  const Vector zero = Vector::Zero(4);
  EXPECT_NEAR(loss->value(zero), std::log(2.0), 1e-15);
  Vector expected = Vector::Zero(4);
  for (const auto& row : shard.rows) {
    for (const auto& [j, v] : row.features) expected(static_cast<Eigen::Index>(j)) -= row.label * v / 2.0;
  }
  expected /= 6.0;
  EXPECT_LE((loss->gradient(zero) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LogisticLoss, SingleSampleAsymptote) {
  Dataset data;
  data.dim = 2;
  data.rows.push_back(SparseRow{1.0, {{0, 1.0}}});
  const auto loss = logistic_loss(data, 2);
  Vector x = Vector::Zero(2);
  x(0) = 50.0;
  EXPECT_LT(loss->value(x), 1e-20);
}

TEST(LogisticLoss, StableForLargeMargins) {
  Dataset data;
  data.dim = 1;
  data.rows.push_back(SparseRow{1.0, {{0, 1.0}}});
  data.rows.push_back(SparseRow{-1.0, {{0, 1.0}}});
  const auto loss = logistic_loss(data, 1);
  for (double t : {-700.0, -100.0, 100.0, 700.0}) {
    const Vector x = Vector::Constant(1, t);
    EXPECT_TRUE(std::isfinite(loss->value(x)));
    EXPECT_TRUE(loss->gradient(x).allFinite());
    // One of the two terms is ~|t|.
    EXPECT_NEAR(loss->value(x), std::abs(t) / 2.0, 1e-9 * std::abs(t));
  }
}

TEST(LogisticLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  const auto loss = logistic_loss(random_shard(rng, 5, 3), 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(rng, 3);
    const Vector fd = finite_difference_gradient([&](const Vector& v) { return loss->value(v); }, x);
    EXPECT_LE(relative_error(loss->gradient(x), fd), 1e-5);
  }
}

TEST(LogisticLoss, RejectsNonBinaryLabels) {
  Dataset data;
  data.dim = 1;
  data.rows.push_back(SparseRow{2.0, {{0, 1.0}}});
  EXPECT_THROW(logistic_loss(data, 1), DataError);
}

TEST(LogisticLoss, LipschitzBoundsGradientChange) {
  std::mt19937_64 rng(3);
  const auto loss = logistic_loss(random_shard(rng, 8, 5), 5);
  const double l = loss->lipschitz().value();
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = random_vector(rng, 5, 3.0);
    const Vector y = random_vector(rng, 5, 3.0);
    EXPECT_LE((loss->gradient(x) - loss->gradient(y)).norm(), l * (x - y).norm() * (1.0 + 1e-12));
  }
}

TEST(LogDetLoss, IdentityWithZeroData) {
  const auto loss = logdet_loss(Matrix::Zero(3, 3), 1.0);
  const Vector x = flat(Matrix::Identity(3, 3));
  EXPECT_NEAR(loss->value(x), 0.0, 1e-15);
  EXPECT_LE((loss->gradient(x) - flat(-Matrix::Identity(3, 3))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LogDetLoss, SingularIsOutsideDomain) {
  const auto loss = logdet_loss(Matrix::Identity(2, 2), 1.0);
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 1.0;
  EXPECT_FALSE(loss->in_domain(flat(x)));
  EXPECT_EQ(loss->value(flat(x)), kInfinity);
}

TEST(LogDetLoss, DiagonalHandExample) {
  const Matrix x = Vector2d(2.0, 1.0).asDiagonal();
  const Matrix y = Matrix::Identity(2, 2);
  const auto loss = logdet_loss(y, 3.0);
  EXPECT_NEAR(loss->value(flat(x)), -3.0 * std::log(2.0) - 3.0, 1e-14);
  const Matrix expected = Vector2d(-1.5 - 1.0, -3.0 - 1.0).asDiagonal();
  EXPECT_LE((loss->gradient(flat(x)) - flat(expected)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LogDetLoss, ConventionalSignFlipsTraceTerm) {
  const Matrix x = Vector2d(2.0, 1.0).asDiagonal();
  const auto loss = logdet_loss(Matrix::Identity(2, 2), 3.0, TraceSign::kConventional);
  EXPECT_NEAR(loss->value(flat(x)), -3.0 * std::log(2.0) + 3.0, 1e-14);
}

TEST(LogDetLoss, RejectsAsymmetricData) {
  Matrix y = Matrix::Identity(2, 2);
  y(0, 1) = 0.5;
  EXPECT_THROW(logdet_loss(y, 1.0), DataError);
}

TEST(LogDetLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (auto sign : {TraceSign::kAsPrinted, TraceSign::kConventional}) {
    const auto loss = logdet_loss(testing::random_spd(rng, 3, 0.5, 2.0), 10.0, sign);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = flat(testing::random_spd(rng, 3, 0.5, 3.0));
      const Vector fd = finite_difference_symmetric([&](const Vector& v) { return loss->value(v); }, x, 3);
      EXPECT_LE(relative_error(loss->gradient(x), fd), 1e-5);
    }
  }
}

TEST(QuadraticRidgeLoss, ZeroPoint) {
  std::mt19937_64 rng(2);
  const Matrix a = testing::random_stack(rng, 4, 3);
  const Vector b = random_vector(rng, 4);
  const auto loss = quadratic_ridge_loss(a, b, 0.3);
  const Vector zero = Vector::Zero(3);
  EXPECT_NEAR(loss->value(zero), b.squaredNorm() / 4.0, 1e-14);
  EXPECT_LE((loss->gradient(zero) - (-(2.0 / 4.0) * a.transpose() * b)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(QuadraticRidgeLoss, IdentityDesign) {
  const auto loss = quadratic_ridge_loss(Matrix::Identity(3, 3), Vector::Zero(3), 0.0);
  const Vector x(Vector3d(1.0, -2.0, 0.5));
  EXPECT_NEAR(loss->value(x), x.squaredNorm() / 3.0, 1e-15);
}

TEST(QuadraticRidgeLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const auto loss = quadratic_ridge_loss(testing::random_stack(rng, 4, 3), random_vector(rng, 4), 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(rng, 3);
    const Vector fd = finite_difference_gradient([&](const Vector& v) { return loss->value(v); }, x);
    EXPECT_LE(relative_error(loss->gradient(x), fd), 1e-6);
  }
}

TEST(ProxL1, Examples) {
  const auto r = prox_l1(1.0);
  EXPECT_EQ(r->prox(Vector::Zero(3), 0.5), Vector::Zero(3));
  const Vector out = r->prox(Vector2d(2.0, -0.3), 0.5);
  EXPECT_DOUBLE_EQ(out(0), 1.5);
  EXPECT_EQ(out(1), 0.0);
}

TEST(ProxL1, MatchesGridSearch) {
  std::mt19937_64 rng(6);
  const double lambda = 0.4;
  const double alpha = 0.5;  // alpha * lambda = 0.2
  const auto r = prox_l1(lambda);
  const Vector x = random_vector(rng, 6);
  const Vector p = r->prox(x, alpha);
  for (Eigen::Index j = 0; j < 6; ++j) {
    double best_y = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double y = -4.0; y <= 4.0; y += 1e-5) {
      const double v = lambda * std::abs(y) + (x(j) - y) * (x(j) - y) / (2.0 * alpha);
      if (v < best) {
        best = v;
        best_y = y;
      }
    }
    EXPECT_NEAR(p(j), best_y, 1e-4);
  }
}

TEST(ProxSpectralBox, DiagonalClamp) {
  const auto r = prox_spectral_box(1.0, 2.0);
  const Matrix x = Vector2d(3.0, 0.5).asDiagonal();
  const Matrix expected = Vector2d(2.0, 1.0).asDiagonal();
  EXPECT_LE((r->prox(flat(x), 1.0) - flat(expected)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProxSpectralBox, Idempotent) {
  std::mt19937_64 rng(5);
  const auto r = prox_spectral_box(0.5, 1.5);
  const Vector x = flat(testing::random_spd(rng, 4, 0.6, 1.4));
  EXPECT_LE((r->prox(x, 0.3) - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(r->value(x), 0.0);
}

TEST(ProxSpectralBox, MatchesIndependentEigensolver) {
  std::mt19937_64 rng(5);
  const auto r = prox_spectral_box(0.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = testing::random_symmetric(rng, 3, 1.5);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(x);
    const Vector clamped = eig.eigenvalues().cwiseMax(0.5).cwiseMin(1.5);
    const Matrix expected = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    EXPECT_LE((r->prox(flat(x), 1.0) - flat(expected)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProxSpectralBox, ValueIsIndicator) {
  const auto r = prox_spectral_box(1.0, 2.0);
  EXPECT_EQ(r->value(flat(Matrix::Identity(2, 2))), 0.0);
  EXPECT_EQ(r->value(flat(3.0 * Matrix::Identity(2, 2))), kInfinity);
}

// Prox optimality against random probes, and firm nonexpansiveness.
template <class Probe>
void check_prox_properties(const Regularizer& r, std::mt19937_64& rng, Probe probe) {
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = probe(rng);
    const double alpha = 0.1 + 0.9 * static_cast<double>(trial) / 9.0;
    const Vector v = r.prox(x, alpha);
    const double at_v = r.value(v) + (x - v).squaredNorm() / (2.0 * alpha);
    const double scale = 1.0 + std::abs(at_v);
    for (int k = 0; k < 100; ++k) {
      const Vector y = r.prox(probe(rng), 1.0);  // feasible probe
      const double at_y = r.value(y) + (x - y).squaredNorm() / (2.0 * alpha);
      EXPECT_LE(at_v, at_y + 1e-10 * scale);
    }
    const Vector z = probe(rng);
    const Vector pz = r.prox(z, alpha);
    EXPECT_LE((v - pz).squaredNorm(), (v - pz).dot(x - z) + 1e-10);
  }
}

TEST(RegularizerProperties, L1) {
  std::mt19937_64 rng(9);
  const auto r = prox_l1(0.7);
  check_prox_properties(*r, rng, [](std::mt19937_64& g) { return random_vector(g, 5, 2.0); });
}

TEST(RegularizerProperties, SpectralBox) {
  std::mt19937_64 rng(9);
  const auto r = prox_spectral_box(0.5, 2.0);
  check_prox_properties(*r, rng, [](std::mt19937_64& g) { return flat(testing::random_symmetric(g, 3, 2.0)); });
}

template <class Sample>
void check_convexity(const SmoothLoss& loss, std::mt19937_64& rng, Sample sample) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = sample(rng);
    const Vector y = sample(rng);
    const double t = unit(rng);
    const double mixed = loss.value(t * x + (1.0 - t) * y);
    EXPECT_LE(mixed, t * loss.value(x) + (1.0 - t) * loss.value(y) + 1e-10);
  }
}

TEST(LossProperties, Convexity) {
  std::mt19937_64 rng(10);
  check_convexity(*logistic_loss(random_shard(rng, 7, 4), 4), rng,
                  [](std::mt19937_64& g) { return random_vector(g, 4, 2.0); });
  check_convexity(*quadratic_ridge_loss(testing::random_stack(rng, 3, 4), random_vector(rng, 3), 0.1), rng,
                  [](std::mt19937_64& g) { return random_vector(g, 4, 2.0); });
  check_convexity(*logdet_loss(testing::random_spd(rng, 3, 0.5, 2.0), 5.0), rng,
                  [](std::mt19937_64& g) { return flat(testing::random_spd(g, 3, 0.2, 4.0)); });
}

TEST(CompositeProblem, AveragesAndStacks) {
  std::vector<LossPtr> losses;
  losses.push_back(quadratic_loss(Matrix::Identity(2, 2), Vector2d(1.0, 0.0)));
  losses.push_back(quadratic_loss(Matrix::Identity(2, 2), Vector2d(-1.0, 2.0)));
  const CompositeProblem prob(std::move(losses), zero_regularizer());
  const Vector x = Vector::Zero(2);
  EXPECT_LE((prob.average_gradient(x) - Vector2d(0.0, -1.0)).norm(), 1e-15);
  Stack rows(2, 2);
  rows << 1.0, 0.0, -1.0, 2.0;
  EXPECT_LE(prob.stacked_gradient(rows).norm(), 1e-15);
  EXPECT_NEAR(prob.objective(x), (0.5 * 1.0 + 0.5 * 5.0) / 2.0, 1e-15);
}

TEST(CompositeProblem, RejectsMismatchedDimensions) {
  std::vector<LossPtr> losses;
  losses.push_back(quadratic_loss(Matrix::Identity(2, 2), Vector::Zero(2)));
  losses.push_back(quadratic_loss(Matrix::Identity(3, 3), Vector::Zero(3)));
  EXPECT_THROW(CompositeProblem(std::move(losses), zero_regularizer()), ConfigError);
}

TEST(RegressionInstance, GammaSchedule) {
  RegressionSpec spec;
  spec.agents = 3;
  spec.samples = 4;
  spec.dim = 2;
  const auto inst = gen_regression_instance(spec);
  ASSERT_EQ(inst.gamma.size(), 3u);
  EXPECT_DOUBLE_EQ(inst.gamma[0], 0.1);
  EXPECT_DOUBLE_EQ(inst.gamma[1], 0.2);
  EXPECT_NEAR(inst.gamma[2], 0.3, 1e-15);
}

TEST(RegressionInstance, Deterministic) {
  RegressionSpec spec;
  spec.agents = 4;
  spec.samples = 5;
  spec.dim = 6;
  spec.seed = 17;
  const auto a = gen_regression_instance(spec);
  const auto b = gen_regression_instance(spec);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE((a.a[i].array() == b.a[i].array()).all());
    EXPECT_TRUE((a.b[i].array() == b.b[i].array()).all());
  }
}

TEST(RegressionInstance, ConditionNumberOrderOfMagnitude) {
  RegressionSpec spec;  // m = 20, n = 20, d = 500
  spec.seed = 1;
  const double kappa = regression_condition_number(gen_regression_instance(spec));
  EXPECT_GE(kappa, 30.0);
  EXPECT_LE(kappa, 300.0);
}

TEST(CovarianceInstance, LargeSampleApproachesSigma) {
  CovarianceSpec spec;
  spec.sigma = Matrix::Identity(3, 3);
  spec.samples = 10000;
  spec.agents = 2;
  spec.seed = 3;
  const auto inst = gen_covariance_instance(spec);
  for (const auto& y : inst.y) EXPECT_LT((y - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.2);
}

TEST(CovarianceInstance, ScalarVariance) {
  CovarianceSpec spec;
  spec.sigma = Matrix::Constant(1, 1, 4.0);
  spec.samples = 20000;
  spec.agents = 1;
  spec.seed = 8;
  const auto inst = gen_covariance_instance(spec);
  EXPECT_NEAR(inst.y[0](0, 0), 4.0, 0.2);
}

TEST(CovarianceInstance, RejectsIndefiniteSigma) {
  CovarianceSpec spec;
  spec.sigma = Vector2d(1.0, -1.0).asDiagonal();
  EXPECT_THROW(gen_covariance_instance(spec), DataError);
}

TEST(CovarianceInstance, Deterministic) {
  CovarianceSpec spec;
  spec.sigma = ar1_covariance(3, 0.5);
  spec.agents = 3;
  spec.seed = 12;
  const auto a = gen_covariance_instance(spec);
  const auto b = gen_covariance_instance(spec);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE((a.y[i].array() == b.y[i].array()).all());
}

}  // namespace
}  // namespace datos

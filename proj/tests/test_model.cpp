#include <catch2/catch.hpp>
#include <plagg/plagg.hpp>

#include "helpers.hpp"

using namespace plagg;

TEST_CASE("node_design replaces component j by one") {
  Dataset ds;
  ds.g = Vector::Zero(1);
  ds.z.resize(1, 2);
  ds.z << 2.0, 3.0;

  NodeDesign d0 = node_design(ds, 0);
  CHECK(d0.x(0, 0) == 1.0);
  CHECK(d0.x(0, 1) == 3.0);
  CHECK(d0.y[0] == 2.0);

  NodeDesign d1 = node_design(ds, 1);
  CHECK(d1.x(0, 0) == 2.0);
  CHECK(d1.x(0, 1) == 1.0);
  CHECK(d1.y[0] == 3.0);
}

TEST_CASE("node_design on zero data keeps only the intercept column") {
  Dataset ds;
  ds.g = Vector::Zero(4);
  ds.z = Matrix::Zero(4, 3);
  for (int j = 0; j < 3; ++j) {
    NodeDesign nd = node_design(ds, j);
    CHECK(nd.x.col(j).isOnes());
    for (int k = 0; k < 3; ++k)
      if (k != j) CHECK(nd.x.col(k).isZero());
  }
  CHECK_THROWS_AS(node_design(ds, 3), DimensionError);
  CHECK_THROWS_AS(node_design(ds, -1), DimensionError);
}

TEST_CASE("precision_from_param") {
  SECTION("identity for zero interactions") {
    SymmetricParam theta = SymmetricParam::zeros(3);
    theta.diag << 1.0, -2.0, 0.5;  // intercepts never touch the precision
    CHECK(precision_from_param(theta) == Matrix::Identity(3, 3));
  }
  SECTION("p = 2 with one interaction") {
    SymmetricParam theta = SymmetricParam::zeros(2);
    theta.offdiag[0] = 0.3;
    Matrix k = precision_from_param(theta);
    CHECK(k(0, 0) == 1.0);
    CHECK(k(1, 1) == 1.0);
    CHECK(k(0, 1) == -0.3);
    CHECK(k(1, 0) == -0.3);
  }
  SECTION("bitwise symmetry on random parameters") {
    SymmetricParam theta = testutil::random_param(6, 99);
    Matrix k = precision_from_param(theta);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) CHECK(k(a, b) == k(b, a));
  }
  SECTION("p = 3 single edge") {
    SymmetricParam theta = SymmetricParam::zeros(3);
    theta.offdiag[FlatIndex(3).offdiag(0, 1) - 3] = 0.5;
    Matrix k = precision_from_param(theta);
    CHECK(k(0, 1) == -0.5);
    CHECK(k(1, 0) == -0.5);
    CHECK(k.diagonal().isOnes());
    CHECK(k(0, 2) == 0.0);
  }
}

TEST_CASE("sample_ggm draws from the implied Gaussian") {
  SECTION("zero parameter gives standard normal rows") {
    SymmetricParam theta = SymmetricParam::zeros(2);
    Rng rng(11);
    Matrix draws = sample_ggm(theta, 100000, rng);
    CHECK(std::abs(draws.col(0).mean()) < 0.02);
    CHECK(std::abs(draws.col(1).mean()) < 0.02);
    CHECK(std::abs(draws.col(0).squaredNorm() / draws.rows() - 1.0) < 0.02);
  }
  SECTION("empirical covariance matches the closed-form inverse") {
    SymmetricParam theta = SymmetricParam::zeros(2);
    theta.offdiag[0] = 0.3;
    Rng rng(12);
    Matrix draws = sample_ggm(theta, 200000, rng);
    // Oracle: inverse of [[1,-0.3],[-0.3,1]] by hand.
    double det = 1.0 - 0.09;
    Matrix cov_true(2, 2);
    cov_true << 1.0 / det, 0.3 / det, 0.3 / det, 1.0 / det;
    Matrix centered = draws.rowwise() - draws.colwise().mean();
    Matrix cov_emp = centered.transpose() * centered / draws.rows();
    CHECK((cov_emp - cov_true).cwiseAbs().maxCoeff() < 0.02);
  }
  SECTION("intercepts shift the mean by K^-1 eta") {
    SymmetricParam theta = SymmetricParam::zeros(2);
    theta.diag << 1.0, 0.0;
    Rng rng(13);
    Matrix draws = sample_ggm(theta, 100000, rng);
    CHECK(std::abs(draws.col(0).mean() - 1.0) < 0.02);
    CHECK(std::abs(draws.col(1).mean() - 0.0) < 0.02);
  }
  SECTION("seeded draws are reproducible") {
    SymmetricParam theta = testutil::random_param(4, 5, 0.2);
    Rng a(77), b(77);
    CHECK(sample_ggm(theta, 50, a) == sample_ggm(theta, 50, b));
  }
  SECTION("indefinite precision is rejected") {
    SymmetricParam theta = SymmetricParam::zeros(2);
    theta.offdiag[0] = 1.5;
    Rng rng(1);
    CHECK_THROWS_AS(sample_ggm(theta, 1, rng), NotPositiveDefinite);
  }
}

namespace {

// Independent re-implementation of the pseudo-likelihood by triple loop.
double naive_pl(const Dataset& ds, const std::vector<SymmetricParam>& omega) {
  double total = 0.0;
  for (int i = 0; i < ds.n(); ++i) {
    Matrix om = omega[i].omega();
    for (int j = 0; j < ds.p(); ++j) {
      double eta = om(j, j);
      for (int k = 0; k < ds.p(); ++k)
        if (k != j) eta += om(k, j) * ds.z(i, k);
      total += ds.z(i, j) * eta - 0.5 * ds.z(i, j) * ds.z(i, j) - 0.5 * eta * eta;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("log_pseudo_likelihood") {
  SECTION("all zero data and parameters") {
    Dataset ds;
    ds.g = Vector::Zero(3);
    ds.z = Matrix::Zero(3, 2);
    std::vector<SymmetricParam> omega(3, SymmetricParam::zeros(2));
    CHECK(log_pseudo_likelihood(ds, omega) == 0.0);
  }
  SECTION("hand-evaluated single sample") {
    Dataset ds;
    ds.g = Vector::Zero(1);
    ds.z.resize(1, 2);
    ds.z << 1.0, 1.0;
    std::vector<SymmetricParam> omega(1, SymmetricParam::zeros(2));
    CHECK(log_pseudo_likelihood(ds, omega) == Approx(-1.0).margin(1e-15));
  }
  SECTION("matches the naive triple loop on a random instance") {
    Dataset ds = testutil::random_dataset(17, 4, 21);
    std::vector<SymmetricParam> omega;
    for (int i = 0; i < 17; ++i)
      omega.push_back(testutil::random_param(4, 100 + i, 0.3));
    double got = log_pseudo_likelihood(ds, omega);
    CHECK(got == Approx(naive_pl(ds, omega)).margin(1e-12));
  }
  SECTION("zero interactions reduce to independent location models") {
    Dataset ds = testutil::random_dataset(11, 3, 33);
    SymmetricParam theta = SymmetricParam::zeros(3);
    theta.diag << 0.4, -0.2, 1.1;
    std::vector<SymmetricParam> omega(11, theta);
    double scalar_oracle = 0.0;
    for (int i = 0; i < 11; ++i)
      for (int j = 0; j < 3; ++j)
        scalar_oracle += ds.z(i, j) * theta.diag[j] -
                         0.5 * ds.z(i, j) * ds.z(i, j) -
                         0.5 * theta.diag[j] * theta.diag[j];
    CHECK(log_pseudo_likelihood(ds, omega) == Approx(scalar_oracle).margin(1e-12));
  }
  SECTION("length mismatch is rejected") {
    Dataset ds = testutil::random_dataset(5, 3, 1);
    std::vector<SymmetricParam> omega(4, SymmetricParam::zeros(3));
    CHECK_THROWS_AS(log_pseudo_likelihood(ds, omega), DimensionError);
  }
}

TEST_CASE("pseudo-likelihood prefers the generating parameters") {
  Rng rng(91);
  auto [ds, truth] = simulate_dataset(5, 200, rng);
  std::vector<SymmetricParam> at_truth, at_zero;
  for (int i = 0; i < ds.n(); ++i) {
    at_truth.push_back(omega_at(ds.g[i], truth));
    at_zero.push_back(SymmetricParam::zeros(5));
  }
  CHECK(log_pseudo_likelihood(ds, at_truth) > log_pseudo_likelihood(ds, at_zero));
}

TEST_CASE("flat index round trip") {
  FlatIndex ix(5);
  CHECK(ix.dim() == 15);
  int m = 0;
  for (int j = 0; j < 5; ++j)
    for (int k = j + 1; k < 5; ++k, ++m) {
      CHECK(ix.offdiag(j, k) == 5 + m);
      CHECK(ix.offdiag(k, j) == 5 + m);
      auto [a, b] = ix.offdiag_pair(m);
      CHECK(a == j);
      CHECK(b == k);
    }
}

// Node-wise conditional representation of the Gaussian graphical model with
// intercepts, the implied precision matrix, an exact sampler and the plain
// log pseudo-likelihood.
#pragma once

#include <Eigen/Cholesky>

#include <span>

#include "plagg/core.hpp"

namespace plagg {

// Design for the node-j regression: covariate rows are z_i with component j
// replaced by 1 (so slot j acts as the intercept), response is column j.
struct NodeDesign {
  int node = 0;
  Matrix x;  // n x p, column `node` is all ones
  Vector y;  // length n, column `node` of the data
};

inline NodeDesign node_design(const Dataset& ds, int j) {
  ds.validate();
  if (j < 0 || j >= ds.p()) throw DimensionError("node index out of range");
  NodeDesign nd;
  nd.node = j;
  nd.x = ds.z;
  nd.x.col(j).setOnes();
  nd.y = ds.z.col(j);
  return nd;
}

// Conditional precision implied by the node-wise densities: K = I - B with
// B the off-diagonal interactions. Intercepts enter the linear term only.
// Note the convention: each node conditional has unit variance, so the
// precision diagonal is one; marginal variances are diag(K^-1) and exceed
// one whenever interactions are present.
inline Matrix precision_from_param(const SymmetricParam& theta) {
  theta.validate();
  Matrix k = theta.omega();
  k = -k;
  k.diagonal().setOnes();
  return k;
}

// n i.i.d. draws from N(K^-1 eta, K^-1) with K = precision_from_param(theta)
// and eta = theta.diag. Factorizes K and solves; never forms K^-1.
inline Matrix sample_ggm(const SymmetricParam& theta, int n, Rng& rng) {
  const int p = theta.p;
  Matrix k = precision_from_param(theta);
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("precision matrix is not positive definite");
  Vector mean = llt.solve(theta.diag);
  Matrix l = llt.matrixL();

  Matrix out(n, p);
  Vector u(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) u[j] = rng.normal();
    // cov(L^-T u) = (L L^T)^-1 = K^-1
    out.row(i) = (mean + l.transpose().triangularView<Eigen::Upper>().solve(u))
                     .transpose();
  }
  return out;
}

// Sum over samples and nodes of z_ij * eta_ij - z_ij^2 / 2 - eta_ij^2 / 2,
// where eta_ij is the node-j conditional mean under the i-th parameter.
inline double log_pseudo_likelihood(const Dataset& ds,
                                    std::span<const SymmetricParam> omega) {
  ds.validate();
  if (static_cast<int>(omega.size()) != ds.n())
    throw DimensionError("need one parameter per sample");
  const int n = ds.n();
  const int p = ds.p();
  double total = 0.0;
  Vector xrow(p);
  for (int i = 0; i < n; ++i) {
    if (omega[i].p != p) throw DimensionError("parameter dimension mismatch");
    for (int j = 0; j < p; ++j) {
      xrow = ds.z.row(i);
      xrow[j] = 1.0;
      double eta = xrow.dot(omega[i].node_column(j));
      double zij = ds.z(i, j);
      total += zij * eta - 0.5 * zij * zij - 0.5 * eta * eta;
    }
  }
  return total;
}

}  // namespace plagg

// The profile-likelihood loss F as an explicit quadratic over the unique
// parameter coordinates, with its exact gradient. Off-diagonal coordinates
// collect contributions from both node regressions they appear in.
#pragma once

#include <vector>

#include "plagg/core.hpp"
#include "plagg/kernel.hpp"

namespace plagg {

// F(theta) = (1/n) sum_j [ 0.5 |Xp_j b_j|^2 - Yp_j . Xp_j b_j + 0.5 |Yp_j|^2 ]
// with b_j = theta.node_column(j). The constant keeps F nonnegative at a
// perfect fit and does not move minimizers.
inline double ppl_value(const SymmetricParam& theta, const ProfileDesign& pd) {
  theta.validate();
  if (theta.p != pd.p) throw DimensionError("parameter/design dimension mismatch");
  double total = 0.0;
  for (int j = 0; j < pd.p; ++j) {
    Vector fit = pd.xp[j] * theta.node_column(j);
    total += 0.5 * fit.squaredNorm() - pd.yp[j].dot(fit) + 0.5 * pd.yp[j].squaredNorm();
  }
  return total / pd.n;
}

// Exact gradient of ppl_value in flat layout (diag block, then upper
// triangle). Coordinate (j,k) receives the node-j and node-k terms.
inline Vector ppl_gradient(const SymmetricParam& theta, const ProfileDesign& pd) {
  theta.validate();
  if (theta.p != pd.p) throw DimensionError("parameter/design dimension mismatch");
  const int p = pd.p;
  FlatIndex ix(p);
  Vector grad = Vector::Zero(ix.dim());
  for (int j = 0; j < p; ++j) {
    Vector resid = pd.xp[j] * theta.node_column(j) - pd.yp[j];
    Vector nodal = pd.xp[j].transpose() * resid / pd.n;
    grad[ix.diag(j)] += nodal[j];
    for (int k = 0; k < p; ++k)
      if (k != j) grad[ix.offdiag(j, k)] += nodal[k];
  }
  return grad;
}

// Precomputed per-node Gram blocks: F(theta) = sum_j (0.5 b_j' G_j b_j -
// v_j . b_j) + c. Evaluation, gradients and curvatures cost O(p^2) each.
struct QuadraticForm {
  int n = 0;
  int p = 0;
  std::vector<Matrix> gram;  // p matrices, each p x p: Xp_j' Xp_j / n
  Matrix linear;             // p x p, column j: Xp_j' Yp_j / n
  double constant = 0.0;     // sum_j |Yp_j|^2 / (2n)
  FlatIndex index;

  double value(const SymmetricParam& theta) const {
    double total = constant;
    for (int j = 0; j < p; ++j) {
      Vector b = theta.node_column(j);
      total += 0.5 * b.dot(gram[j] * b) - linear.col(j).dot(b);
    }
    return total;
  }

  Vector gradient(const SymmetricParam& theta) const {
    Vector grad = Vector::Zero(index.dim());
    for (int j = 0; j < p; ++j) {
      Vector nodal = gram[j] * theta.node_column(j) - linear.col(j);
      grad[index.diag(j)] += nodal[j];
      for (int k = 0; k < p; ++k)
        if (k != j) grad[index.offdiag(j, k)] += nodal[k];
    }
    return grad;
  }

  double curvature_diag(int j) const { return gram[j](j, j); }
  double curvature_offdiag(int j, int k) const {
    return gram[j](k, k) + gram[k](j, j);
  }
};

inline QuadraticForm assemble_quadratic(const ProfileDesign& pd) {
  QuadraticForm qf;
  qf.n = pd.n;
  qf.p = pd.p;
  qf.index = FlatIndex(pd.p);
  qf.gram.resize(pd.p);
  qf.linear.resize(pd.p, pd.p);
  qf.constant = 0.0;
  for (int j = 0; j < pd.p; ++j) {
    qf.gram[j] = pd.xp[j].transpose() * pd.xp[j] / pd.n;
    qf.linear.col(j) = pd.xp[j].transpose() * pd.yp[j] / pd.n;
    qf.constant += 0.5 * pd.yp[j].squaredNorm() / pd.n;
  }
  return qf;
}

}  // namespace plagg

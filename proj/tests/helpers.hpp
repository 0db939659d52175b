#pragma once

#include <plagg/plagg.hpp>

namespace testutil {

// Random dataset with i.i.d. standard normal entries and uniform confounder.
inline plagg::Dataset random_dataset(int n, int p, std::uint64_t seed,
                                     double g_lo = -1.0, double g_hi = 1.0) {
  plagg::Rng rng(seed);
  plagg::Dataset ds;
  ds.g.resize(n);
  ds.z.resize(n, p);
  for (int i = 0; i < n; ++i) ds.g[i] = rng.uniform(g_lo, g_hi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) ds.z(i, j) = rng.normal();
  return ds;
}

inline plagg::SymmetricParam random_param(int p, std::uint64_t seed,
                                          double scale = 0.5) {
  plagg::Rng rng(seed);
  plagg::SymmetricParam theta = plagg::SymmetricParam::zeros(p);
  for (int j = 0; j < p; ++j) theta.diag[j] = scale * (rng.uniform() - 0.5);
  for (int m = 0; m < theta.offdiag.size(); ++m)
    theta.offdiag[m] = scale * (rng.uniform() - 0.5);
  return theta;
}

// Naive dense Hessian and linear term of the quadratic loss, assembled
// coordinate by coordinate from the design columns.
inline std::pair<plagg::Matrix, plagg::Vector> naive_quadratic(
    const plagg::ProfileDesign& pd) {
  plagg::FlatIndex ix(pd.p);
  const int dim = ix.dim();
  plagg::Matrix h = plagg::Matrix::Zero(dim, dim);
  plagg::Vector b = plagg::Vector::Zero(dim);
  auto coord_of = [&](int node, int pos) {
    return pos == node ? ix.diag(node) : ix.offdiag(node, pos);
  };
  for (int j = 0; j < pd.p; ++j) {
    for (int a = 0; a < pd.p; ++a) {
      b[coord_of(j, a)] += pd.xp[j].col(a).dot(pd.yp[j]) / pd.n;
      for (int c = 0; c < pd.p; ++c)
        h(coord_of(j, a), coord_of(j, c)) +=
            pd.xp[j].col(a).dot(pd.xp[j].col(c)) / pd.n;
    }
  }
  return {h, b};
}

}  // namespace testutil

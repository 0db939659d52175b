// Synthetic-data generator: sparse target structure, dense confounding
// direction, piecewise confounding magnitude over an integer grid, one draw
// per grid point.
#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

#include "plagg/core.hpp"
#include "plagg/model.hpp"

namespace plagg {

// Piecewise confounding magnitude: zero on [-10, 10], quadratic blend on
// 10 < |g| <= 12, linear beyond, odd throughout. Both |g| = 12 boundaries
// carry a unit jump (1 vs a limit of 2).
inline double f_of_g(double g) {
  if (g > 12.0) return g - 10.0;
  if (g > 10.0) return g + (g - 12.0) * (g - 12.0) / 4.0 - 11.0;
  if (g >= -10.0) return 0.0;
  if (g > -12.0) return g - (g + 12.0) * (g + 12.0) / 4.0 + 11.0;
  return g + 10.0;
}

namespace detail {

inline double spectral_norm(const Matrix& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Matrix offdiag_matrix(const SymmetricParam& theta) {
  Matrix b = theta.omega();
  b.diagonal().setZero();
  return b;
}

inline SymmetricParam gen_sparse_omega0_scaled(int p, double density, Rng& rng,
                                               double& scale) {
  if (p < 2) throw DimensionError("generator needs p >= 2");
  SymmetricParam theta = SymmetricParam::zeros(p);
  for (int m = 0; m < theta.offdiag.size(); ++m) {
    if (!rng.bernoulli(density)) continue;
    double mag = rng.uniform(0.1, 0.3);
    theta.offdiag[m] = rng.bernoulli(0.5) ? mag : -mag;
  }
  scale = 1.0;
  double norm = spectral_norm(offdiag_matrix(theta));
  if (norm > 0.5) {
    scale = 0.5 / norm;
    theta.offdiag *= scale;
  }
  return theta;
}

}  // namespace detail

// Upper-triangle entries nonzero with the given probability, magnitudes
// uniform in [0.1, 0.3] with random sign, rescaled so the interaction block
// has spectral norm at most 0.5. Intercepts stay zero.
inline SymmetricParam gen_sparse_omega0(int p, double density, Rng& rng) {
  double scale = 1.0;
  return detail::gen_sparse_omega0_scaled(p, density, rng, scale);
}

// Fully dense symmetric confounding direction, zero diagonal, off-diagonal
// magnitudes uniform in [0.5, 1] with random sign.
inline Matrix gen_dense_W(int p, Rng& rng) {
  if (p < 2) throw DimensionError("generator needs p >= 2");
  Matrix w = Matrix::Zero(p, p);
  for (int j = 0; j < p; ++j)
    for (int k = j + 1; k < p; ++k) {
      double mag = rng.uniform(0.5, 1.0);
      double v = rng.bernoulli(0.5) ? mag : -mag;
      w(j, k) = v;
      w(k, j) = v;
    }
  return w;
}

struct SimTruth {
  SymmetricParam theta0;
  Matrix w;              // confounding direction actually used (post-scaling)
  Vector g_grid;
  double omega0_scale = 1.0;
  double w_scale = 1.0;
};

// Parameter at confounder value g: theta0 plus f(g) times the scaled
// confounding direction.
inline SymmetricParam omega_at(double g, const SimTruth& truth) {
  SymmetricParam theta = truth.theta0;
  double f = f_of_g(g);
  if (f != 0.0) {
    FlatIndex ix(theta.p);
    for (int m = 0; m < theta.offdiag.size(); ++m) {
      auto [j, k] = ix.offdiag_pair(m);
      theta.offdiag[m] += f * truth.w(j, k);
    }
  }
  return theta;
}

// Confounders on the grid {-n/2, ..., n/2 - 1} times grid_step, one draw
// per grid point from the parameter at that point. The confounding direction
// is rescaled once so the interaction block stays below spectral norm 0.9
// over the whole grid, keeping every per-sample precision positive definite.
// grid_step != 1 refines the same confounder range with more points (sample
// size scaling at fixed clean fraction).
inline std::pair<Dataset, SimTruth> simulate_dataset(int p, int n, Rng& rng,
                                                     double density = 0.3,
                                                     double grid_step = 1.0) {
  if (p < 2) throw DimensionError("simulation needs p >= 2");
  if (n < 2 || n % 2 != 0) throw DimensionError("simulation needs even n >= 2");
  if (!(grid_step > 0.0)) throw DegenerateInput("grid step must be positive");

  SimTruth truth;
  truth.theta0 =
      detail::gen_sparse_omega0_scaled(p, density, rng, truth.omega0_scale);
  Matrix w_raw = gen_dense_W(p, rng);

  truth.g_grid.resize(n);
  double f_max = 0.0;
  for (int i = 0; i < n; ++i) {
    truth.g_grid[i] = static_cast<double>(i - n / 2) * grid_step;
    f_max = std::max(f_max, std::abs(f_of_g(truth.g_grid[i])));
  }

  // Largest scale keeping max_g |B0 + s f(g) Bw|_2 <= 0.9. The norm is
  // convex in f, so only the extreme f values matter; bisect on s.
  double f_lo = 0.0, f_hi = 0.0;
  for (int i = 0; i < n; ++i) {
    f_lo = std::min(f_lo, f_of_g(truth.g_grid[i]));
    f_hi = std::max(f_hi, f_of_g(truth.g_grid[i]));
  }
  Matrix b0 = detail::offdiag_matrix(truth.theta0);
  double w_norm = detail::spectral_norm(w_raw);
  truth.w_scale = 1.0;
  if (f_max > 0.0 && w_norm > 0.0) {
    auto worst = [&](double s) {
      return std::max(detail::spectral_norm(b0 + s * f_lo * w_raw),
                      detail::spectral_norm(b0 + s * f_hi * w_raw));
    };
    double lo = 0.0, hi = (0.9 - detail::spectral_norm(b0)) / (f_max * w_norm);
    while (worst(2.0 * hi) <= 0.9) hi *= 2.0;  // hi from the triangle bound
    double hi2 = 2.0 * hi;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi2);
      (worst(mid) <= 0.9 ? lo : hi2) = mid;
    }
    truth.w_scale = lo;
  }
  truth.w = truth.w_scale * w_raw;

  Dataset ds;
  ds.g = truth.g_grid;
  ds.z.resize(n, p);
  for (int i = 0; i < n; ++i)
    ds.z.row(i) = sample_ggm(omega_at(ds.g[i], truth), 1, rng);
  return {std::move(ds), std::move(truth)};
}

}  // namespace plagg

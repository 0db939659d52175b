// Comparison estimators sharing the coordinate-descent core: plain fits on
// non-confounded samples, linear-regression deconfounding, the joint-model
// conditional structure, and the kernel-weighted varying-structure fit.
#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <string>
#include <vector>

#include "plagg/core.hpp"
#include "plagg/kernel.hpp"
#include "plagg/objective.hpp"
#include "plagg/solver.hpp"

namespace plagg {

struct BaselineResult {
  std::string method;
  FitPath path;
  std::vector<double> lambdas;
  std::vector<std::string> notes;
};

namespace detail {

inline BaselineResult run_lasso_path(const std::string& method, const ProfileDesign& pd,
                                     const SolverConfig& cfg,
                                     const std::vector<double>* grid = nullptr) {
  QuadraticForm qf = assemble_quadratic(pd);
  BaselineResult out;
  out.method = method;
  out.lambdas = grid ? *grid
                     : make_lambda_grid(lambda_max(qf), cfg.n_lambda,
                                        cfg.lambda_min_ratio);
  out.path = fit_path(qf, out.lambdas, cfg);
  return out;
}

}  // namespace detail

inline int clean_sample_floor(int p) { return std::max(10, 3 * p); }

// Smallest |g| cutoff retaining at least the clean-sample floor.
inline double pick_clean_threshold(const Vector& g, int p) {
  std::vector<double> mags(g.size());
  for (int i = 0; i < g.size(); ++i) mags[i] = std::abs(g[i]);
  std::sort(mags.begin(), mags.end());
  int need = clean_sample_floor(p);
  if (static_cast<int>(mags.size()) < need)
    throw InsufficientCleanSamples("fewer samples than the clean-sample floor");
  return mags[need - 1];
}

// Plain pseudo-likelihood lasso on the samples with |g| <= g_threshold.
inline BaselineResult fit_plain_ggm(const Dataset& ds, double g_threshold,
                                    const SolverConfig& cfg = {}) {
  ds.validate();
  std::vector<int> keep;
  for (int i = 0; i < ds.n(); ++i)
    if (std::abs(ds.g[i]) <= g_threshold) keep.push_back(i);
  int need = clean_sample_floor(ds.p());
  if (static_cast<int>(keep.size()) < need)
    throw InsufficientCleanSamples("only " + std::to_string(keep.size()) +
                                   " samples with |g| <= threshold, need " +
                                   std::to_string(need));
  Dataset sub = ds.rows(keep);
  BaselineResult out = detail::run_lasso_path("plain", raw_design(sub), cfg);
  out.notes.push_back("retained " + std::to_string(keep.size()) + " of " +
                      std::to_string(ds.n()) + " samples");
  return out;
}

// Per-column least squares of z on (1, g); constant g degenerates to
// centering. Returns intercept/slope per column.
inline std::pair<Vector, Vector> linear_confounder_fit(const Dataset& ds) {
  const int n = ds.n();
  double gm = ds.g.mean();
  double gvar = (ds.g.array() - gm).square().sum() / n;
  Vector slope = Vector::Zero(ds.p());
  if (gvar > 1e-300)
    slope = ds.z.transpose() * (ds.g.array() - gm).matrix() / (n * gvar);
  Vector intercept = ds.z.colwise().mean().transpose() - slope * gm;
  return {intercept, slope};
}

// Regress the confounder out of every column, then run the plain lasso path
// on the residuals.
inline BaselineResult fit_lr_ggm(const Dataset& ds, const SolverConfig& cfg = {}) {
  ds.validate();
  if (ds.n() < 3) throw DimensionError("linear deconfounding needs n >= 3");
  auto [intercept, slope] = linear_confounder_fit(ds);
  Dataset resid = ds;
  resid.z = ds.z - Vector::Ones(ds.n()) * intercept.transpose() -
            ds.g * slope.transpose();
  BaselineResult out = detail::run_lasso_path("lr", raw_design(resid), cfg);
  out.notes.push_back("columns residualized against (1, g)");
  return out;
}

// Inverse conditional covariance [S_zz - S_zg S_gg^-1 S_gz]^-1 for a joint
// covariance with the confounder first; equals the ZZ block of Sigma^-1.
inline Matrix conditional_precision(const Matrix& sigma) {
  const int d = static_cast<int>(sigma.rows());
  if (sigma.cols() != d || d < 2) throw DimensionError("need a square (1+p) covariance");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw DimensionError("covariance must be symmetric");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("joint covariance is not positive definite");
  const int p = d - 1;
  Matrix s_zz = sigma.bottomRightCorner(p, p);
  Vector s_zg = sigma.bottomLeftCorner(p, 1);
  double s_gg = sigma(0, 0);
  Matrix schur = s_zz - s_zg * s_zg.transpose() / s_gg;
  Eigen::LLT<Matrix> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success)
    throw NotPositiveDefinite("conditional covariance is not positive definite");
  return schur_llt.solve(Matrix::Identity(p, p));
}

// Joint sparse fit over (g, z) at natural scales; the ZZ block of the
// estimated joint precision is the conditional structure. The joint model is
// fit with the pseudo-likelihood lasso rather than a covariance graphical
// lasso so the solver core is shared. The confounder enters as-is: a uniform
// penalty over the joint edges means a widely dispersed confounder dominates
// the auto-generated grid, exactly as in the off-the-shelf protocol this
// baseline mirrors.
inline BaselineResult fit_con_ggm(const Dataset& ds, const SolverConfig& cfg = {}) {
  ds.validate();
  const int n = ds.n();
  const int p = ds.p();
  Dataset joint;
  joint.g = ds.g;
  joint.z.resize(n, p + 1);
  joint.z.col(0) = ds.g;
  joint.z.rightCols(p) = ds.z;
  BaselineResult aug = detail::run_lasso_path("con", raw_design(joint), cfg);

  // Drop the confounder node from every path entry.
  FlatIndex ix_aug(p + 1);
  FlatIndex ix(p);
  BaselineResult out;
  out.method = "con";
  out.lambdas = aug.lambdas;
  out.notes.push_back("joint pseudo-likelihood fit over (g, z); ZZ block extracted");
  out.path.entries.reserve(aug.path.entries.size());
  for (const FitResult& fr : aug.path.entries) {
    FitResult sub = fr;
    sub.theta = SymmetricParam::zeros(p);
    for (int j = 0; j < p; ++j) sub.theta.diag[j] = fr.theta.diag[j + 1];
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k)
        sub.theta.offdiag[ix.offdiag(j, k) - p] =
            fr.theta.offdiag[ix_aug.offdiag(j + 1, k + 1) - (p + 1)];
    sub.active = static_cast<int>((sub.theta.offdiag.array() != 0.0).count());
    out.path.entries.push_back(std::move(sub));
  }
  return out;
}

struct TvOptions {
  double eval_point = 0.0;
  KernelSpec kernel;
  bool average = false;               // average estimates over eval_grid
  std::vector<double> eval_grid;      // used when average is true
};

// Kernel-weighted pseudo-likelihood lasso at one evaluation point; weights
// are normalized to mean one so lambda scales comparably across methods.
inline BaselineResult fit_tv_ggm(const Dataset& ds, const TvOptions& tv,
                                 const SolverConfig& cfg = {}) {
  ds.validate();
  auto fit_at = [&](double point, const std::vector<double>* grid) {
    Vector w = kernel_weights(point, ds.g, tv.kernel);
    double total = w.sum();
    if (total < 3.0 * ds.p())
      throw EffectiveSampleTooSmall("kernel mass " + std::to_string(total) +
                                    " below 3p at eval point");
    w *= ds.n() / total;
    return detail::run_lasso_path("tv", raw_design(ds, &w), cfg, grid);
  };

  if (!tv.average || tv.eval_grid.empty()) {
    BaselineResult out = fit_at(tv.eval_point, nullptr);
    out.notes.push_back("evaluated at g = " + std::to_string(tv.eval_point));
    return out;
  }

  // One shared grid so entries line up across eval points.
  BaselineResult out = fit_at(tv.eval_grid[0], nullptr);
  for (size_t e = 1; e < tv.eval_grid.size(); ++e) {
    BaselineResult next = fit_at(tv.eval_grid[e], &out.lambdas);
    for (size_t k = 0; k < out.path.entries.size(); ++k) {
      out.path.entries[k].theta.diag += next.path.entries[k].theta.diag;
      out.path.entries[k].theta.offdiag += next.path.entries[k].theta.offdiag;
    }
  }
  for (FitResult& fr : out.path.entries) {
    fr.theta.diag /= static_cast<double>(tv.eval_grid.size());
    fr.theta.offdiag /= static_cast<double>(tv.eval_grid.size());
    fr.active = static_cast<int>((fr.theta.offdiag.array() != 0.0).count());
  }
  out.notes.push_back("averaged over " + std::to_string(tv.eval_grid.size()) +
                      " eval points");
  return out;
}

}  // namespace plagg

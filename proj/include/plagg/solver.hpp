// L1-regularized minimization of the quadratic loss by cyclic coordinate
// descent with soft-thresholding: warm-started paths, the sequential strong
// screening rule with KKT repair, and k-fold cross-validation.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "plagg/core.hpp"
#include "plagg/kernel.hpp"
#include "plagg/objective.hpp"

namespace plagg {

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

struct SolverConfig {
  double tol = 1e-7;             // max coordinate change declaring a sweep stable
  double kkt_tol = 1e-8;         // stationarity certificate required at solutions
  int max_sweeps = 10000;
  int n_lambda = 100;
  double lambda_min_ratio = 0.01;
  bool screening = true;
  int folds = 10;
  std::uint64_t seed = 0;
  bool cv_one_sd = false;        // pick largest lambda within one sd of the minimum

  void validate() const {
    if (!(tol > 0.0)) throw DegenerateInput("tol must be positive");
    if (n_lambda < 1) throw DegenerateInput("n_lambda must be >= 1");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
      throw DegenerateInput("lambda_min_ratio must be in (0, 1)");
  }
};

struct FitResult {
  double lambda = 0.0;
  SymmetricParam theta;
  double objective = 0.0;   // F + lambda * |offdiag|_1
  int active = 0;           // nonzero off-diagonal count
  int sweeps = 0;
  double kkt = 0.0;         // max stationarity violation over all coordinates
  int repairs = 0;          // coordinates re-admitted by the KKT repair loop
  bool converged = true;
};

struct FitPath {
  std::vector<FitResult> entries;
};

namespace detail {

// Coordinate-descent state: theta plus the per-node gradient columns
// q.col(j) = G_j b_j - v_j, updated in O(p) per coordinate move.
struct CdState {
  const QuadraticForm* qf = nullptr;
  SymmetricParam theta;
  Matrix q;

  void reset(const QuadraticForm& q_, const SymmetricParam& warm) {
    qf = &q_;
    theta = warm;
    q.resize(qf->p, qf->p);
    for (int j = 0; j < qf->p; ++j)
      q.col(j) = qf->gram[j] * theta.node_column(j) - qf->linear.col(j);
  }

  double grad_diag(int j) const { return q(j, j); }
  double grad_offdiag(int j, int k) const { return q(k, j) + q(j, k); }

  void move_diag(int j, double delta) {
    theta.diag[j] += delta;
    q.col(j) += delta * qf->gram[j].col(j);
  }

  void move_offdiag(int m, int j, int k, double delta) {
    theta.offdiag[m] += delta;
    q.col(j) += delta * qf->gram[j].col(k);
    q.col(k) += delta * qf->gram[k].col(j);
  }

  Vector full_gradient() const {
    const FlatIndex& ix = qf->index;
    Vector grad(ix.dim());
    for (int j = 0; j < qf->p; ++j) grad[ix.diag(j)] = grad_diag(j);
    for (int m = 0; m < ix.n_offdiag(); ++m) {
      auto [j, k] = ix.offdiag_pair(m);
      grad[qf->p + m] = grad_offdiag(j, k);
    }
    return grad;
  }
};

inline double kkt_violation(const CdState& st, double lambda,
                            const std::vector<int>& offdiag_coords) {
  double worst = 0.0;
  for (int j = 0; j < st.qf->p; ++j)
    worst = std::max(worst, std::abs(st.grad_diag(j)));
  for (int m : offdiag_coords) {
    auto [j, k] = st.qf->index.offdiag_pair(m);
    double g = st.grad_offdiag(j, k);
    double t = st.theta.offdiag[m];
    if (t != 0.0)
      worst = std::max(worst, std::abs(g + lambda * (t > 0.0 ? 1.0 : -1.0)));
    else
      worst = std::max(worst, std::max(0.0, std::abs(g) - lambda));
  }
  return worst;
}

inline double cd_sweep(CdState& st, double lambda,
                       const std::vector<int>& offdiag_coords) {
  double max_change = 0.0;
  for (int j = 0; j < st.qf->p; ++j) {
    double a = st.qf->curvature_diag(j);
    if (a <= 0.0) continue;
    double delta = -st.grad_diag(j) / a;
    if (delta != 0.0) {
      st.move_diag(j, delta);
      max_change = std::max(max_change, std::abs(delta));
    }
  }
  for (int m : offdiag_coords) {
    auto [j, k] = st.qf->index.offdiag_pair(m);
    double a = st.qf->curvature_offdiag(j, k);
    if (a <= 0.0) continue;
    double old = st.theta.offdiag[m];
    double z = a * old - st.grad_offdiag(j, k);
    double next = soft_threshold(z, lambda) / a;
    double delta = next - old;
    if (delta != 0.0) {
      st.move_offdiag(m, j, k, delta);
      max_change = std::max(max_change, std::abs(delta));
    }
  }
  return max_change;
}

struct CdOutcome {
  int sweeps = 0;
  bool converged = false;
  double kkt = 0.0;
};

// Active-set cycling over the allowed off-diagonal coordinates: iterate on
// the current support until stable, then one full pass to admit new actives;
// done once a full pass is stable and the KKT certificate holds.
inline CdOutcome cd_solve(CdState& st, double lambda,
                          const std::vector<int>& allowed, const SolverConfig& cfg) {
  CdOutcome out;
  std::vector<int> active;
  active.reserve(allowed.size());
  auto collect_active = [&] {
    active.clear();
    for (int m : allowed)
      if (st.theta.offdiag[m] != 0.0) active.push_back(m);
  };
  collect_active();
  while (out.sweeps < cfg.max_sweeps) {
    double mc;
    do {
      mc = cd_sweep(st, lambda, active);
      ++out.sweeps;
    } while (mc >= cfg.tol && out.sweeps < cfg.max_sweeps);
    double mc_full = cd_sweep(st, lambda, allowed);
    ++out.sweeps;
    collect_active();
    if (mc_full < cfg.tol) {
      out.kkt = kkt_violation(st, lambda, allowed);
      if (out.kkt <= cfg.kkt_tol) {
        out.converged = true;
        return out;
      }
    }
  }
  out.kkt = kkt_violation(st, lambda, allowed);
  return out;
}

inline std::vector<int> all_offdiag(const QuadraticForm& qf) {
  std::vector<int> coords(qf.index.n_offdiag());
  for (int m = 0; m < static_cast<int>(coords.size()); ++m) coords[m] = m;
  return coords;
}

}  // namespace detail

// Unpenalized intercept-only solution; intercept coordinates are uncoupled
// across nodes so a single exact pass suffices.
inline SymmetricParam intercept_only(const QuadraticForm& qf) {
  SymmetricParam theta = SymmetricParam::zeros(qf.p);
  for (int j = 0; j < qf.p; ++j) {
    double a = qf.gram[j](j, j);
    if (a > 0.0) theta.diag[j] = qf.linear(j, j) / a;
  }
  return theta;
}

// Smallest lambda with empty off-diagonal support: the largest off-diagonal
// gradient magnitude at the intercept-only solution.
inline double lambda_max(const QuadraticForm& qf) {
  double scale = 0.0;
  for (int j = 0; j < qf.p; ++j)
    scale = std::max(scale, qf.gram[j].cwiseAbs().maxCoeff());
  if (scale == 0.0) throw DegenerateInput("all-zero design");
  Vector grad = qf.gradient(intercept_only(qf));
  double lmax = 0.0;
  for (int m = qf.p; m < grad.size(); ++m)
    lmax = std::max(lmax, std::abs(grad[m]));
  return lmax;
}

// Log-spaced grid from lmax down to ratio * lmax.
inline std::vector<double> make_lambda_grid(double lmax, int count, double ratio) {
  if (!(lmax > 0.0)) return {0.0};
  if (count == 1) return {lmax};
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lmax * std::pow(ratio, static_cast<double>(i) / (count - 1));
  return grid;
}

namespace detail {

inline FitResult snapshot(const CdState& st, double lambda, const CdOutcome& run,
                          int repairs) {
  FitResult fr;
  fr.lambda = lambda;
  fr.theta = st.theta;
  fr.objective = st.qf->value(st.theta) +
                 lambda * st.theta.offdiag.cwiseAbs().sum();
  fr.active = static_cast<int>((st.theta.offdiag.array() != 0.0).count());
  fr.sweeps = run.sweeps;
  fr.repairs = repairs;
  fr.converged = run.converged;
  // Certificate over every coordinate, screened ones included.
  fr.kkt = kkt_violation(st, lambda, all_offdiag(*st.qf));
  return fr;
}

}  // namespace detail

inline FitResult fit_single(const QuadraticForm& qf, double lambda,
                            const SymmetricParam& warm, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (lambda < 0.0) throw DegenerateInput("lambda must be nonnegative");
  detail::CdState st;
  st.reset(qf, warm);
  auto allowed = detail::all_offdiag(qf);
  auto run = detail::cd_solve(st, lambda, allowed, cfg);
  return detail::snapshot(st, lambda, run, 0);
}

inline FitResult fit_single(const QuadraticForm& qf, double lambda,
                            const SolverConfig& cfg = {}) {
  return fit_single(qf, lambda, SymmetricParam::zeros(qf.p), cfg);
}

// Warm-started path over a strictly decreasing lambda sequence. With
// screening on, coordinate m is skipped at lambda_k unless
// |grad_m(theta_{k-1})| >= 2 lambda_k - lambda_{k-1}; skipped coordinates
// are KKT-checked after convergence and violators re-admitted until clean.
inline FitPath fit_path(const QuadraticForm& qf, const std::vector<double>& lambdas,
                        const SolverConfig& cfg = {}) {
  cfg.validate();
  for (size_t k = 0; k + 1 < lambdas.size(); ++k)
    if (!(lambdas[k] > lambdas[k + 1]))
      throw DegenerateInput("lambda sequence must be strictly decreasing");

  const int n_off = qf.index.n_offdiag();
  detail::CdState st;
  st.reset(qf, intercept_only(qf));
  Vector grad_prev = st.full_gradient();
  double lambda_prev = 0.0;
  for (int m = 0; m < n_off; ++m)
    lambda_prev = std::max(lambda_prev, std::abs(grad_prev[qf.p + m]));

  FitPath path;
  path.entries.reserve(lambdas.size());
  std::vector<char> in_set(n_off, 0);
  std::vector<int> allowed;
  for (double lambda : lambdas) {
    allowed.clear();
    if (cfg.screening) {
      double cut = 2.0 * lambda - lambda_prev;
      for (int m = 0; m < n_off; ++m) {
        in_set[m] = st.theta.offdiag[m] != 0.0 ||
                    std::abs(grad_prev[qf.p + m]) >= cut;
        if (in_set[m]) allowed.push_back(m);
      }
    } else {
      allowed = detail::all_offdiag(qf);
      std::fill(in_set.begin(), in_set.end(), 1);
    }

    int repairs = 0;
    detail::CdOutcome run;
    for (;;) {
      run = detail::cd_solve(st, lambda, allowed, cfg);
      if (!cfg.screening) break;
      int admitted = 0;
      for (int m = 0; m < n_off; ++m) {
        if (in_set[m]) continue;
        auto [j, k] = qf.index.offdiag_pair(m);
        if (std::abs(st.grad_offdiag(j, k)) > lambda + cfg.kkt_tol) {
          in_set[m] = 1;
          allowed.push_back(m);
          ++admitted;
        }
      }
      if (admitted == 0) break;
      repairs += admitted;
    }

    path.entries.push_back(detail::snapshot(st, lambda, run, repairs));
    grad_prev = st.full_gradient();
    lambda_prev = lambda;
  }
  return path;
}

struct CvPoint {
  double lambda = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int folds = 0;  // folds this lambda was scored on
};

struct CvResult {
  double best_lambda = 0.0;
  int best_index = -1;  // index into curve
  std::vector<CvPoint> curve;
  std::vector<std::string> notes;
};

// Generic k-fold path cross-validation. `make_qf(train)` builds the training
// loss and `make_eval(train, eval)` the held-out design scored by ppl_value.
// Lambdas failing in at least half the folds are dropped.
template <class MakeQf, class MakeEval>
CvResult cross_validate_generic(const Dataset& ds, const std::vector<double>& lambdas,
                                const SolverConfig& cfg, MakeQf&& make_qf,
                                MakeEval&& make_eval) {
  cfg.validate();
  const int n = ds.n();
  const int folds = cfg.folds;
  if (folds < 2) throw DegenerateInput("cross-validation needs folds >= 2");
  if (n < folds) throw DimensionError("cross-validation needs n >= folds");

  Rng rng(cfg.seed);
  std::vector<int> perm = rng.permutation(n);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;

  const int n_lambda = static_cast<int>(lambdas.size());
  Matrix loss = Matrix::Zero(folds, n_lambda);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> valid(folds, n_lambda);
  valid.setZero();
  CvResult out;

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_idx, eval_idx;
    for (int i = 0; i < n; ++i)
      (fold_of[i] == f ? eval_idx : train_idx).push_back(i);
    Dataset train = ds.rows(train_idx);
    Dataset eval = ds.rows(eval_idx);
    try {
      QuadraticForm qf = make_qf(train);
      ProfileDesign heldout = make_eval(train, eval);
      FitPath path = fit_path(qf, lambdas, cfg);
      for (int k = 0; k < n_lambda; ++k) {
        if (!path.entries[k].converged) continue;
        loss(f, k) = ppl_value(path.entries[k].theta, heldout);
        valid(f, k) = 1;
      }
    } catch (const Error& err) {
      out.notes.push_back("fold " + std::to_string(f) + " failed: " + err.what());
    }
  }

  for (int k = 0; k < n_lambda; ++k) {
    int ok = 0;
    for (int f = 0; f < folds; ++f) ok += valid(f, k);
    int fails = folds - ok;
    if (2 * fails >= folds) continue;
    CvPoint pt;
    pt.lambda = lambdas[k];
    pt.folds = ok;
    double sum = 0.0;
    for (int f = 0; f < folds; ++f)
      if (valid(f, k)) sum += loss(f, k);
    pt.mean = sum / ok;
    double ss = 0.0;
    for (int f = 0; f < folds; ++f)
      if (valid(f, k)) ss += (loss(f, k) - pt.mean) * (loss(f, k) - pt.mean);
    pt.sd = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
    out.curve.push_back(pt);
  }

  if (out.curve.empty()) throw DegenerateInput("every lambda failed cross-validation");

  int best = 0;
  for (int k = 1; k < static_cast<int>(out.curve.size()); ++k)
    if (out.curve[k].mean < out.curve[best].mean) best = k;
  if (cfg.cv_one_sd) {
    double cap = out.curve[best].mean + out.curve[best].sd;
    for (int k = 0; k < static_cast<int>(out.curve.size()); ++k)
      if (out.curve[k].mean <= cap) {
        best = k;  // curve is ordered by decreasing lambda
        break;
      }
  }
  out.best_index = best;
  out.best_lambda = out.curve[best].lambda;
  return out;
}

// Cross-validation for the kernel-profile pipeline: per fold, smoothers are
// rebuilt from the training split and held-out rows are transformed against
// them before scoring.
inline CvResult cross_validate(const Dataset& ds, const IndicatorSpec& ind,
                               const KernelSpec& kern, const SolverConfig& cfg,
                               const std::vector<double>& lambdas,
                               const ProfileOptions& opts = {}) {
  return cross_validate_generic(
      ds, lambdas, cfg,
      [&](const Dataset& train) {
        return assemble_quadratic(profile_design(train, ind, kern, opts));
      },
      [&](const Dataset& train, const Dataset& eval) {
        return profile_transform(train, eval, ind, kern, opts);
      });
}

// Overload generating the lambda grid from the full-data design.
inline CvResult cross_validate(const Dataset& ds, const IndicatorSpec& ind,
                               const KernelSpec& kern, const SolverConfig& cfg,
                               const ProfileOptions& opts = {}) {
  QuadraticForm qf = assemble_quadratic(profile_design(ds, ind, kern, opts));
  auto grid = make_lambda_grid(lambda_max(qf), cfg.n_lambda, cfg.lambda_min_ratio);
  return cross_validate(ds, ind, kern, cfg, grid, opts);
}

}  // namespace plagg

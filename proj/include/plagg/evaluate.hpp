// Structure-recovery scoring: confusion counts over off-diagonal support and
// ROC/AUC across a regularization path.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "plagg/core.hpp"
#include "plagg/solver.hpp"

namespace plagg {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

// Counts over the unique off-diagonal entries; "positive" means magnitude
// above zero_tol.
inline Confusion support_confusion(const SymmetricParam& est, const SymmetricParam& truth,
                                   double zero_tol = 1e-10) {
  if (est.p != truth.p) throw DimensionError("support comparison dimension mismatch");
  Confusion c;
  for (int m = 0; m < est.offdiag.size(); ++m) {
    bool e = std::abs(est.offdiag[m]) > zero_tol;
    bool t = std::abs(truth.offdiag[m]) > zero_tol;
    if (e && t)
      ++c.tp;
    else if (e && !t)
      ++c.fp;
    else if (!e && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

struct RocPoint {
  double lambda = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // one per path entry, path order
  double auc = 0.5;
  bool degenerate = false;  // truth support empty or full
};

namespace detail {

inline double trapezoid_auc(std::vector<RocPoint> pts) {
  pts.push_back({0.0, 0.0, 0.0});
  pts.push_back({0.0, 1.0, 1.0});
  std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
  });
  // Ties on FPR keep the maximal TPR.
  std::vector<RocPoint> uniq;
  for (const RocPoint& pt : pts) {
    if (!uniq.empty() && uniq.back().fpr == pt.fpr)
      uniq.back().tpr = std::max(uniq.back().tpr, pt.tpr);
    else
      uniq.push_back(pt);
  }
  double auc = 0.0;
  for (size_t i = 1; i < uniq.size(); ++i)
    auc += (uniq[i].fpr - uniq[i - 1].fpr) * (uniq[i].tpr + uniq[i - 1].tpr) / 2.0;
  return auc;
}

inline RocPoint roc_point(double lambda, const Confusion& c) {
  RocPoint pt;
  pt.lambda = lambda;
  pt.fpr = (c.fp + c.tn) > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
  pt.tpr = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 1.0;
  return pt;
}

}  // namespace detail

// ROC over the path supports, swept by lambda. Endpoints (0,0) and (1,1) are
// appended and the trapezoid rule is applied to the FPR-sorted staircase.
inline RocCurve roc_auc(const FitPath& path, const SymmetricParam& truth,
                        double zero_tol = 1e-10) {
  if (path.entries.empty()) throw DimensionError("empty path");
  RocCurve curve;
  long truth_support = 0;
  for (int m = 0; m < truth.offdiag.size(); ++m)
    if (std::abs(truth.offdiag[m]) > zero_tol) ++truth_support;
  curve.degenerate =
      truth_support == 0 || truth_support == truth.offdiag.size();
  for (const FitResult& fr : path.entries)
    curve.points.push_back(
        detail::roc_point(fr.lambda, support_confusion(fr.theta, truth, zero_tol)));
  curve.auc = detail::trapezoid_auc(curve.points);
  return curve;
}

// Threshold-mode ROC: supports obtained by sweeping a magnitude cutoff over
// a single estimate.
inline RocCurve roc_threshold(const SymmetricParam& est, const SymmetricParam& truth,
                              double zero_tol = 1e-10) {
  if (est.p != truth.p) throw DimensionError("threshold ROC dimension mismatch");
  std::vector<double> cuts;
  for (int m = 0; m < est.offdiag.size(); ++m)
    cuts.push_back(std::abs(est.offdiag[m]));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  RocCurve curve;
  long truth_support = 0;
  for (int m = 0; m < truth.offdiag.size(); ++m)
    if (std::abs(truth.offdiag[m]) > zero_tol) ++truth_support;
  curve.degenerate =
      truth_support == 0 || truth_support == truth.offdiag.size();
  for (double cut : cuts) {
    SymmetricParam cut_est = est;
    for (int m = 0; m < cut_est.offdiag.size(); ++m)
      if (std::abs(cut_est.offdiag[m]) < cut) cut_est.offdiag[m] = 0.0;
    curve.points.push_back(
        detail::roc_point(cut, support_confusion(cut_est, truth, zero_tol)));
  }
  curve.auc = detail::trapezoid_auc(curve.points);
  return curve;
}

}  // namespace plagg

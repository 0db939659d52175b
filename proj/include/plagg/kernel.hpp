// Local-linear kernel machinery: confounding indicator, per-sample weight
// vectors, augmented designs, smoother rows and the profile-transformed
// node designs that reduce the profile likelihood to a quadratic.
#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

#include "plagg/core.hpp"
#include "plagg/model.hpp"

namespace plagg {

enum class KernelFamily { Epanechnikov, Gaussian };

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double bandwidth = 1.0;

  // Symmetric kernel density psi evaluated at u = |dg| / h.
  double density(double u) const {
    switch (family) {
      case KernelFamily::Epanechnikov: {
        double s = 1.0 - u * u;
        return s > 0.0 ? 0.75 * s : 0.0;
      }
      case KernelFamily::Gaussian:
        return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    }
    return 0.0;
  }

  void validate() const {
    if (!(bandwidth > 0.0)) throw DegenerateInput("bandwidth must be positive");
  }
};

// Smooth confounding indicator 1 - exp(-k^2 g^2) / 2: even in g, valued in
// (0, 1], increasing in |g|. A hard 0/1 threshold variant exists for tests.
struct IndicatorSpec {
  enum class Mode { Soft, Hard };
  Mode mode = Mode::Soft;
  double k = 0.578;       // sharpness of the soft indicator
  double g_star = 0.0;    // threshold of the hard indicator

  static IndicatorSpec soft(double k) {
    IndicatorSpec s;
    s.mode = Mode::Soft;
    s.k = k;
    return s;
  }
  static IndicatorSpec hard(double g_star) {
    IndicatorSpec s;
    s.mode = Mode::Hard;
    s.g_star = g_star;
    return s;
  }

  double operator()(double g) const {
    if (mode == Mode::Hard) return std::abs(g) >= g_star ? 1.0 : 0.0;
    return 1.0 - 0.5 * std::exp(-k * k * g * g);
  }
};

inline double indicator(double g, const IndicatorSpec& spec) { return spec(g); }

// Rate sd(g) * n^(-1/4), scaled by c_h; population standard deviation.
inline double default_bandwidth(const Vector& g, double c_h = 1.0) {
  const int n = static_cast<int>(g.size());
  if (n < 2) throw DegenerateInput("bandwidth needs n >= 2");
  double mean = g.mean();
  double var = (g.array() - mean).square().sum() / n;
  if (!(var > 0.0)) throw DegenerateInput("confounder has zero variance");
  return c_h * std::sqrt(var) * std::pow(static_cast<double>(n), -0.25);
}

// Diagonal of the kernel weight matrix centered at confounder value g0:
// entry t is psi(|g0 - g_t| / h).
inline Vector kernel_weights(double g0, const Vector& g, const KernelSpec& spec) {
  spec.validate();
  Vector w(g.size());
  for (int t = 0; t < g.size(); ++t)
    w[t] = spec.density(std::abs(g0 - g[t]) / spec.bandwidth);
  return w;
}

inline Vector build_weight_matrix(int i, const Vector& g, const KernelSpec& spec) {
  if (i < 0 || i >= g.size()) throw DimensionError("sample index out of range");
  return kernel_weights(g[i], g, spec);
}

// Auxiliary n x 2p design centered at sample i: row t is
// [ind(g_t) x_tj^T, ((g_t - g_i)/h) ind(g_t) x_tj^T] with x_tj = z_t,-j.
inline Matrix build_dij(int i, int j, const Dataset& ds, const IndicatorSpec& ind,
                        const KernelSpec& kern) {
  ds.validate();
  kern.validate();
  const int n = ds.n();
  const int p = ds.p();
  if (i < 0 || i >= n) throw DimensionError("sample index out of range");
  if (j < 0 || j >= p) throw DimensionError("node index out of range");
  Matrix d(n, 2 * p);
  for (int t = 0; t < n; ++t) {
    double a = ind(ds.g[t]);
    double u = (ds.g[t] - ds.g[i]) / kern.bandwidth;
    for (int m = 0; m < p; ++m) {
      double zt = (m == j) ? 1.0 : ds.z(t, m);
      d(t, m) = a * zt;
      d(t, p + m) = u * a * zt;
    }
  }
  return d;
}

struct ProfileOptions {
  double ridge = 0.0;              // added to the Gram diagonal when > 0
  double rcond_min = 1e-12;        // reciprocal condition estimate threshold
};

namespace detail {

inline void check_gram(const Eigen::LDLT<Matrix>& ldlt, const ProfileOptions& opts,
                       int sample, int node) {
  // Pivot-ratio reciprocal condition estimate; a nonpositive pivot means the
  // Gram is numerically rank deficient (it is PSD by construction).
  const Vector& d = ldlt.vectorD();
  double dmax = d.cwiseAbs().maxCoeff();
  double rc = dmax > 0.0 ? d.minCoeff() / dmax : 0.0;
  if (ldlt.info() != Eigen::Success || !d.allFinite() || !(rc >= opts.rcond_min))
    throw SingularSmoother(sample, node);
}

// S_ij^T = [x_ij^T, 0] (D^T W D)^-1 D^T W given the auxiliary design and the
// weight diagonal.
inline Vector smoother_from_parts(const Matrix& d, const Vector& w, const Vector& xij,
                                  const ProfileOptions& opts, int i, int j) {
  const int p = static_cast<int>(xij.size());
  Matrix gram = d.transpose() * w.asDiagonal() * d;
  if (opts.ridge > 0.0) gram.diagonal().array() += opts.ridge;
  Eigen::LDLT<Matrix> ldlt(gram);
  check_gram(ldlt, opts, i, j);
  Vector rhs = Vector::Zero(2 * p);
  rhs.head(p) = xij;
  Vector v = ldlt.solve(rhs);
  return w.asDiagonal() * (d * v);
}

}  // namespace detail

// Smoother row S_ij as an explicit length-n vector:
// S_ij^T = [x_ij^T, 0] (D_ij^T W_i D_ij)^-1 D_ij^T W_i.
// Direct dense evaluation; the profile transform below avoids forming it.
inline Vector smoother_row(int i, int j, const Dataset& ds, const IndicatorSpec& ind,
                           const KernelSpec& kern, const ProfileOptions& opts = {}) {
  Matrix d = build_dij(i, j, ds, ind, kern);
  Vector w = build_weight_matrix(i, ds.g, kern);
  Vector xij = ds.z.row(i);
  xij[j] = 1.0;
  return detail::smoother_from_parts(d, w, xij, opts, i, j);
}

// Per-node profile-transformed designs: row i of xp[j] is (1_i - S_ij)^T x_j
// and entry i of yp[j] is (1_i - S_ij)^T y_j.
struct ProfileDesign {
  int n = 0;
  int p = 0;
  std::vector<Matrix> xp;  // p matrices, each n x p
  std::vector<Vector> yp;  // p vectors, length n
  double bandwidth = 0.0;
  double ridge = 0.0;
};

// Profile transform of `eval` rows against smoothers built from `train`.
// With eval == train this is the plain in-sample transform. For each center
// sample one augmented (p+1)-basis set of weighted Grams is assembled, and
// the per-node 2p x 2p Gram is extracted by swapping the dropped z_j column
// for the intercept column.
inline ProfileDesign profile_transform(const Dataset& train, const Dataset& eval,
                                       const IndicatorSpec& ind, const KernelSpec& kern,
                                       const ProfileOptions& opts = {}) {
  train.validate();
  eval.validate();
  kern.validate();
  const int nt = train.n();
  const int ne = eval.n();
  const int p = train.p();
  if (eval.p() != p) throw DimensionError("train/eval dimension mismatch");

  ProfileDesign out;
  out.n = ne;
  out.p = p;
  out.bandwidth = kern.bandwidth;
  out.ridge = opts.ridge;
  out.xp.assign(p, Matrix(ne, p));
  out.yp.assign(p, Vector(ne));

  // Training rows in the augmented [z, 1] basis and their indicator values.
  Matrix basis(nt, p + 1);
  basis.leftCols(p) = train.z;
  basis.col(p).setOnes();
  Vector a(nt);
  for (int t = 0; t < nt; ++t) a[t] = ind(train.g[t]);

  Matrix gram(2 * p, 2 * p);
  Matrix cross_x(2 * p, p);
  Vector cross_y(2 * p);
  Vector rhs(2 * p);
  Vector xej(p);
  std::vector<int> idx(p);

  for (int e = 0; e < ne; ++e) {
    Vector w = kernel_weights(eval.g[e], train.g, kern);
    Vector u = (train.g.array() - eval.g[e]) / kern.bandwidth;

    // P_k = sum_t w u^k a^2 b b^T (Gram blocks), Q_k with a single indicator
    // factor (cross blocks against the unscaled node designs).
    Vector wa2 = w.array() * a.array().square();
    Vector wa = w.array() * a.array();
    Matrix p0 = basis.transpose() * wa2.asDiagonal() * basis;
    Matrix p1 = basis.transpose() * (wa2.array() * u.array()).matrix().asDiagonal() * basis;
    Matrix p2 = basis.transpose() * (wa2.array() * u.array().square()).matrix().asDiagonal() * basis;
    Matrix q0 = basis.transpose() * wa.asDiagonal() * basis;
    Matrix q1 = basis.transpose() * (wa.array() * u.array()).matrix().asDiagonal() * basis;

    for (int j = 0; j < p; ++j) {
      for (int m = 0; m < p; ++m) idx[m] = (m == j) ? p : m;

      for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) {
          gram(r, c) = p0(idx[r], idx[c]);
          gram(r, p + c) = p1(idx[r], idx[c]);
          gram(p + r, c) = p1(idx[r], idx[c]);
          gram(p + r, p + c) = p2(idx[r], idx[c]);
          cross_x(r, c) = q0(idx[r], idx[c]);
          cross_x(p + r, c) = q1(idx[r], idx[c]);
        }
        cross_y[r] = q0(idx[r], j);
        cross_y[p + r] = q1(idx[r], j);
      }
      if (opts.ridge > 0.0) gram.diagonal().array() += opts.ridge;

      Eigen::LDLT<Matrix> ldlt(gram);
      detail::check_gram(ldlt, opts, e, j);

      xej = eval.z.row(e);
      xej[j] = 1.0;
      rhs.head(p) = xej;
      rhs.tail(p).setZero();
      Vector v = ldlt.solve(rhs);

      out.xp[j].row(e) = xej.transpose() - v.transpose() * cross_x;
      out.yp[j][e] = eval.z(e, j) - v.dot(cross_y);
    }
  }
  return out;
}

inline ProfileDesign profile_design(const Dataset& ds, const IndicatorSpec& ind,
                                    const KernelSpec& kern,
                                    const ProfileOptions& opts = {}) {
  return profile_transform(ds, ds, ind, kern, opts);
}

// Identity transform (smoothing disabled): xp[j] is the raw node design and
// yp[j] the raw response. Optional nonnegative row weights are applied as
// sqrt-weights so the induced quadratic is the weighted least squares one.
inline ProfileDesign raw_design(const Dataset& ds, const Vector* weights = nullptr) {
  ds.validate();
  const int n = ds.n();
  const int p = ds.p();
  if (weights && weights->size() != n)
    throw DimensionError("weight length does not match sample count");
  ProfileDesign out;
  out.n = n;
  out.p = p;
  out.xp.assign(p, Matrix());
  out.yp.assign(p, Vector());
  Vector sw;
  if (weights) sw = weights->array().max(0.0).sqrt();
  for (int j = 0; j < p; ++j) {
    NodeDesign nd = node_design(ds, j);
    if (weights) {
      out.xp[j] = sw.asDiagonal() * nd.x;
      out.yp[j] = sw.asDiagonal() * nd.y;
    } else {
      out.xp[j] = nd.x;
      out.yp[j] = nd.y;
    }
  }
  return out;
}

}  // namespace plagg

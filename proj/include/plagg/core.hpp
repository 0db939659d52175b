// Core types shared across the library: datasets with an observed scalar
// confounder, the unique-entry symmetric parameterization, flat coordinate
// indexing, error types and a deterministic random source.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plagg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

// The 2p x 2p local-linear Gram is numerically singular; carries the sample
// and node the failure occurred at (0-based).
struct SingularSmoother : Error {
  SingularSmoother(int sample_, int node_)
      : Error("singular smoother Gram at sample " + std::to_string(sample_) +
              ", node " + std::to_string(node_) +
              "; increase bandwidth or indicator coefficient"),
        sample(sample_),
        node(node_) {}
  int sample;
  int node;
};

struct InsufficientCleanSamples : Error {
  using Error::Error;
};

struct EffectiveSampleTooSmall : Error {
  using Error::Error;
};

struct DegenerateInput : Error {
  using Error::Error;
};

// n observations of a p-vector z plus a scalar confounder g per row.
struct Dataset {
  Vector g;  // length n
  Matrix z;  // n x p

  int n() const { return static_cast<int>(z.rows()); }
  int p() const { return static_cast<int>(z.cols()); }

  void validate() const {
    if (z.rows() < 1 || z.cols() < 2)
      throw DimensionError("dataset needs n >= 1 and p >= 2");
    if (g.size() != z.rows())
      throw DimensionError("confounder length does not match sample count");
    if (!g.allFinite() || !z.allFinite())
      throw DegenerateInput("dataset contains non-finite entries");
  }

  Dataset rows(const std::vector<int>& idx) const {
    Dataset out;
    out.g.resize(static_cast<int>(idx.size()));
    out.z.resize(static_cast<int>(idx.size()), z.cols());
    for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
      out.g[i] = g[idx[i]];
      out.z.row(i) = z.row(idx[i]);
    }
    return out;
  }
};

// Bijection between matrix positions and flat coordinates: p intercept
// (diagonal) slots first, then the upper triangle row-major. (j,k) and (k,j)
// share one off-diagonal slot.
struct FlatIndex {
  int p = 0;

  explicit FlatIndex(int p_ = 0) : p(p_) {}

  int n_offdiag() const { return p * (p - 1) / 2; }
  int dim() const { return p + n_offdiag(); }
  int diag(int j) const { return j; }

  int offdiag(int j, int k) const {
    if (j > k) std::swap(j, k);
    return p + j * (2 * p - j - 1) / 2 + (k - j - 1);
  }

  // Inverse of offdiag() for m in [0, n_offdiag).
  std::pair<int, int> offdiag_pair(int m) const {
    int j = 0;
    while (m >= p - 1 - j) {
      m -= p - 1 - j;
      ++j;
    }
    return {j, j + 1 + m};
  }
};

// Unique-entry parameterization: p intercepts plus p(p-1)/2 interaction
// terms (upper triangle, row-major).
struct SymmetricParam {
  int p = 0;
  Vector diag;     // length p
  Vector offdiag;  // length p(p-1)/2

  static SymmetricParam zeros(int p) {
    SymmetricParam out;
    out.p = p;
    out.diag = Vector::Zero(p);
    out.offdiag = Vector::Zero(p * (p - 1) / 2);
    return out;
  }

  void validate() const {
    if (p < 2) throw DimensionError("parameter needs p >= 2");
    if (diag.size() != p || offdiag.size() != p * (p - 1) / 2)
      throw DimensionError("parameter block lengths inconsistent with p");
    if (!diag.allFinite() || !offdiag.allFinite())
      throw DegenerateInput("parameter contains non-finite entries");
  }

  // Full symmetric matrix with the intercepts on the diagonal.
  Matrix omega() const {
    FlatIndex ix(p);
    Matrix out(p, p);
    for (int j = 0; j < p; ++j) {
      out(j, j) = diag[j];
      for (int k = j + 1; k < p; ++k) {
        double v = offdiag[ix.offdiag(j, k) - p];
        out(j, k) = v;
        out(k, j) = v;
      }
    }
    return out;
  }

  // Column j of omega() with the intercept in slot j; this is the node-j
  // regression coefficient vector (slot j multiplies the constant 1).
  Vector node_column(int j) const {
    FlatIndex ix(p);
    Vector beta(p);
    beta[j] = diag[j];
    for (int k = 0; k < p; ++k)
      if (k != j) beta[k] = offdiag[ix.offdiag(j, k) - p];
    return beta;
  }

  Vector to_flat() const {
    Vector out(diag.size() + offdiag.size());
    out << diag, offdiag;
    return out;
  }

  static SymmetricParam from_flat(int p, const Vector& flat) {
    SymmetricParam out = zeros(p);
    if (flat.size() != out.diag.size() + out.offdiag.size())
      throw DimensionError("flat vector length inconsistent with p");
    out.diag = flat.head(p);
    out.offdiag = flat.tail(flat.size() - p);
    return out;
  }
};

// Deterministic random source. Draws are fully specified (explicit 53-bit
// uniforms and Box-Muller normals) so seeded results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer on [0, bound).
  int uniform_int(int bound) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(bound));
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_int(i + 1)]);
    return perm;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace plagg

#include <catch2/catch.hpp>
#include <plagg/plagg.hpp>

#include "helpers.hpp"

using namespace plagg;

namespace {

SymmetricParam from_support(int p, const std::vector<std::pair<int, int>>& edges,
                            double value = 1.0) {
  SymmetricParam theta = SymmetricParam::zeros(p);
  FlatIndex ix(p);
  for (auto [j, k] : edges) theta.offdiag[ix.offdiag(j, k) - p] = value;
  return theta;
}

FitPath path_of(const std::vector<SymmetricParam>& thetas) {
  FitPath path;
  double lambda = 1.0;
  for (const SymmetricParam& t : thetas) {
    FitResult fr;
    fr.lambda = lambda;
    fr.theta = t;
    path.entries.push_back(fr);
    lambda /= 2.0;
  }
  return path;
}

}  // namespace

TEST_CASE("support confusion") {
  SECTION("exact match") {
    SymmetricParam truth = from_support(4, {{0, 1}, {2, 3}});
    Confusion c = support_confusion(truth, truth);
    CHECK(c.tp == 2);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(c.tn == 4);
  }
  SECTION("dense estimate against sparse truth") {
    SymmetricParam truth = from_support(4, {{0, 1}});
    SymmetricParam est = from_support(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    Confusion c = support_confusion(est, truth);
    CHECK(c.tp == 1);
    CHECK(c.fp == 5);
    CHECK(c.tn == 0);
    CHECK(c.fn == 0);
  }
  SECTION("enumerated p = 3 example") {
    SymmetricParam truth = from_support(3, {{0, 1}});
    SymmetricParam est = from_support(3, {{0, 1}, {0, 2}});
    Confusion c = support_confusion(est, truth);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fn == 0);
  }
  SECTION("zero tolerance boundary") {
    SymmetricParam truth = from_support(3, {{0, 1}});
    SymmetricParam est = from_support(3, {{0, 1}}, 1e-12);
    Confusion c = support_confusion(est, truth);  // below default tolerance
    CHECK(c.tp == 0);
    CHECK(c.fn == 1);
  }
  SECTION("invariant under consistent relabeling") {
    Rng rng(17);
    SymmetricParam est = testutil::random_param(5, 3, 1.0);
    SymmetricParam truth = from_support(5, {{0, 2}, {1, 4}, {2, 3}});
    // sparsify the estimate a little
    for (int m = 0; m < est.offdiag.size(); m += 2) est.offdiag[m] = 0.0;
    std::vector<int> perm = rng.permutation(5);
    FlatIndex ix(5);
    auto relabel = [&](const SymmetricParam& t) {
      SymmetricParam out = SymmetricParam::zeros(5);
      for (int j = 0; j < 5; ++j)
        for (int k = j + 1; k < 5; ++k)
          out.offdiag[ix.offdiag(perm[j], perm[k]) - 5] =
              t.offdiag[ix.offdiag(j, k) - 5];
      return out;
    };
    Confusion a = support_confusion(est, truth);
    Confusion b = support_confusion(relabel(est), relabel(truth));
    CHECK(a.tp == b.tp);
    CHECK(a.fp == b.fp);
    CHECK(a.tn == b.tn);
    CHECK(a.fn == b.fn);
  }
}

TEST_CASE("roc over a path") {
  SymmetricParam truth = from_support(4, {{0, 1}, {1, 2}});

  SECTION("perfect staircase reaches AUC 1") {
    std::vector<SymmetricParam> thetas = {
        from_support(4, {}),
        from_support(4, {{0, 1}}),
        from_support(4, {{0, 1}, {1, 2}}),
        from_support(4, {{0, 1}, {1, 2}, {0, 2}}),
        from_support(4, {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}})};
    RocCurve curve = roc_auc(path_of(thetas), truth);
    CHECK(curve.auc == Approx(1.0));
    CHECK(!curve.degenerate);
  }
  SECTION("single all-zero estimate is uninformative") {
    RocCurve curve = roc_auc(path_of({from_support(4, {})}), truth);
    CHECK(curve.auc == Approx(0.5));
  }
  SECTION("auc is within [0, 1] and order-invariant") {
    Rng rng(23);
    std::vector<SymmetricParam> thetas;
    for (int k = 0; k < 8; ++k) {
      SymmetricParam t = SymmetricParam::zeros(4);
      for (int m = 0; m < 6; ++m)
        if (rng.bernoulli(0.4)) t.offdiag[m] = rng.uniform(-1.0, 1.0);
      thetas.push_back(t);
    }
    FitPath fwd = path_of(thetas);
    RocCurve a = roc_auc(fwd, truth);
    std::reverse(thetas.begin(), thetas.end());
    FitPath rev = path_of(thetas);
    RocCurve b = roc_auc(rev, truth);
    CHECK(a.auc >= 0.0);
    CHECK(a.auc <= 1.0);
    CHECK(a.auc == Approx(b.auc));
  }
  SECTION("data-ignoring estimator scores near one half on average") {
    // Null estimator: rank the edges at random and sweep the ranking along
    // the path, the way a real path nests its supports.
    double total = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(3000 + s);
      SymmetricParam t5 = from_support(5, {{0, 1}, {2, 4}, {1, 3}});
      std::vector<int> order = rng.permutation(10);
      std::vector<SymmetricParam> thetas(1, SymmetricParam::zeros(5));
      for (int k = 0; k < 10; ++k) {
        SymmetricParam t = thetas.back();
        t.offdiag[order[k]] = 1.0;
        thetas.push_back(t);
      }
      total += roc_auc(path_of(thetas), t5).auc;
    }
    CHECK(total / seeds == Approx(0.5).margin(0.1));
  }
  SECTION("degenerate truths are flagged") {
    RocCurve empty = roc_auc(path_of({from_support(4, {{0, 1}})}),
                             from_support(4, {}));
    CHECK(empty.degenerate);
    SymmetricParam full = from_support(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    RocCurve fullc = roc_auc(path_of({from_support(4, {{0, 1}})}), full);
    CHECK(fullc.degenerate);
    CHECK_THROWS_AS(roc_auc(FitPath{}, full), DimensionError);
  }
}

TEST_CASE("roc by magnitude threshold") {
  SymmetricParam truth = from_support(3, {{0, 1}});
  SymmetricParam est = SymmetricParam::zeros(3);
  est.offdiag << 0.9, 0.1, 0.0;  // (0,1) strongest, (0,2) weak, (1,2) absent
  RocCurve curve = roc_threshold(est, truth);
  CHECK(curve.auc == Approx(1.0));  // truth edge dominates every cutoff
  SymmetricParam bad = SymmetricParam::zeros(3);
  bad.offdiag << 0.0, 0.9, 0.8;  // misses the true edge entirely
  CHECK(roc_threshold(bad, truth).auc < 0.5);
}

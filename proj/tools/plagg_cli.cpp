// Command-line front end: simulate synthetic confounded datasets, fit the
// profile-likelihood estimator and its baselines over a regularization path
// with cross-validation, and score structure recovery against a known truth.
#include <CLI11.hpp>

#include <plagg/plagg.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace plagg;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct RunConfig {
  int p = 10;
  int n = 800;
  std::uint64_t seed = 0;
  double density = 0.3;
  double grid_step = 1.0;
  std::string kernel = "epanechnikov";
  std::string bandwidth = "auto";
  std::string indicator_k = "auto";
  int n_lambda = 100;
  double lambda_min_ratio = 0.01;
  int folds = 10;
  std::string methods = "pla";
  std::string roc_mode = "path";
  double ridge = 0.0;
  bool dense = false;
  std::string data_path = "dataset.csv";
  std::string truth_path = "truth.json";
  std::string out_dir = ".";
  std::string fit_dir = ".";
};

double parse_auto(const std::string& text, const std::string& flag) {
  if (text == "auto") return -1.0;
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !(v > 0.0)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected 'auto' or a positive number");
  }
}

KernelSpec make_kernel(const RunConfig& rc, const Vector& g) {
  KernelSpec kern;
  if (rc.kernel == "epanechnikov")
    kern.family = KernelFamily::Epanechnikov;
  else if (rc.kernel == "gaussian")
    kern.family = KernelFamily::Gaussian;
  else
    throw CLI::ValidationError("--kernel", "must be epanechnikov or gaussian");
  double h = parse_auto(rc.bandwidth, "--bandwidth");
  kern.bandwidth = h > 0.0 ? h : default_bandwidth(g);
  return kern;
}

double population_sd(const Vector& g) {
  return std::sqrt((g.array() - g.mean()).square().sum() / g.size());
}

IndicatorSpec make_indicator(const RunConfig& rc, const Vector& g) {
  double k = parse_auto(rc.indicator_k, "--indicator-k");
  if (k <= 0.0) {
    double sd = population_sd(g);
    if (!(sd > 0.0)) throw DegenerateInput("confounder has zero variance");
    k = 1.0 / (2.0 * sd);  // transition spans about two standard deviations
  }
  return IndicatorSpec::soft(k);
}

SolverConfig make_solver(const RunConfig& rc) {
  SolverConfig cfg;
  cfg.n_lambda = rc.n_lambda;
  cfg.lambda_min_ratio = rc.lambda_min_ratio;
  cfg.folds = rc.folds;
  cfg.seed = rc.seed;
  cfg.validate();
  return cfg;
}

std::vector<std::string> parse_methods(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item != "pla" && item != "plain" && item != "lr" && item != "con" &&
        item != "tv")
      throw CLI::ValidationError("--methods", "unknown method '" + item + "'");
    out.push_back(item);
  }
  if (out.empty()) throw CLI::ValidationError("--methods", "empty method list");
  return out;
}

int cmd_simulate(const RunConfig& rc) {
  if (rc.p < 2) throw CLI::ValidationError("--p", "need p >= 2");
  if (rc.n < 2 || rc.n % 2 != 0) throw CLI::ValidationError("--n", "need even n >= 2");
  Rng rng(rc.seed);
  auto [ds, truth] = simulate_dataset(rc.p, rc.n, rng, rc.density, rc.grid_step);
  io::write_dataset_csv(rc.data_path, ds);
  io::write_truth_json(rc.truth_path, truth);
  std::cout << "wrote " << rc.data_path << " (" << ds.n() << " x " << ds.p()
            << ") and " << rc.truth_path << "\n";
  return 0;
}

// Path plus optional cross-validation for one method; writes the output
// files under out_dir.
void fit_one_method(const std::string& method, const Dataset& ds, const RunConfig& rc) {
  SolverConfig cfg = make_solver(rc);
  ProfileOptions opts;
  opts.ridge = rc.ridge;

  BaselineResult result;
  json meta;
  meta["method"] = method;
  meta["n"] = ds.n();
  meta["p"] = ds.p();
  meta["seed"] = rc.seed;
  meta["n_lambda"] = cfg.n_lambda;
  meta["lambda_min_ratio"] = cfg.lambda_min_ratio;
  meta["screening"] = cfg.screening;
  meta["ridge"] = rc.ridge;

  // Builders for the generic cross-validation; each method owns its data
  // transform and held-out design.
  std::function<QuadraticForm(const Dataset&)> make_qf;
  std::function<ProfileDesign(const Dataset&, const Dataset&)> make_eval;
  const Dataset* cv_data = &ds;
  Dataset filtered;  // keeps the plain-method subsample alive for CV

  if (method == "pla") {
    KernelSpec kern = make_kernel(rc, ds.g);
    IndicatorSpec ind = make_indicator(rc, ds.g);
    meta["kernel"] = rc.kernel;
    meta["bandwidth"] = kern.bandwidth;
    meta["indicator_k"] = ind.k;
    QuadraticForm qf = assemble_quadratic(profile_design(ds, ind, kern, opts));
    result.method = "pla";
    result.lambdas =
        make_lambda_grid(lambda_max(qf), cfg.n_lambda, cfg.lambda_min_ratio);
    result.path = fit_path(qf, result.lambdas, cfg);
    make_qf = [ind, kern, opts](const Dataset& train) {
      return assemble_quadratic(profile_design(train, ind, kern, opts));
    };
    make_eval = [ind, kern, opts](const Dataset& train, const Dataset& eval) {
      return profile_transform(train, eval, ind, kern, opts);
    };
  } else if (method == "plain") {
    double threshold = pick_clean_threshold(ds.g, ds.p());
    meta["clean_threshold"] = threshold;
    result = fit_plain_ggm(ds, threshold, cfg);
    std::vector<int> keep;
    for (int i = 0; i < ds.n(); ++i)
      if (std::abs(ds.g[i]) <= threshold) keep.push_back(i);
    filtered = ds.rows(keep);
    cv_data = &filtered;
    make_qf = [](const Dataset& train) {
      return assemble_quadratic(raw_design(train));
    };
    make_eval = [](const Dataset&, const Dataset& eval) {
      return raw_design(eval);
    };
  } else if (method == "lr") {
    result = fit_lr_ggm(ds, cfg);
    make_qf = [](const Dataset& train) {
      auto [ic, sl] = linear_confounder_fit(train);
      Dataset r = train;
      r.z = train.z - Vector::Ones(train.n()) * ic.transpose() -
            train.g * sl.transpose();
      return assemble_quadratic(raw_design(r));
    };
    make_eval = [](const Dataset& train, const Dataset& eval) {
      auto [ic, sl] = linear_confounder_fit(train);
      Dataset r = eval;
      r.z = eval.z - Vector::Ones(eval.n()) * ic.transpose() -
            eval.g * sl.transpose();
      return raw_design(r);
    };
  } else if (method == "con") {
    result = fit_con_ggm(ds, cfg);
    auto augment = [](const Dataset& base) {
      Dataset joint;
      joint.g = base.g;
      joint.z.resize(base.n(), base.p() + 1);
      joint.z.col(0) = base.g;
      joint.z.rightCols(base.p()) = base.z;
      return joint;
    };
    make_qf = [=](const Dataset& train) {
      return assemble_quadratic(raw_design(augment(train)));
    };
    make_eval = [=](const Dataset&, const Dataset& eval) {
      return raw_design(augment(eval));
    };
  } else {  // tv
    TvOptions tv;
    tv.kernel = make_kernel(rc, ds.g);
    meta["kernel"] = rc.kernel;
    meta["bandwidth"] = tv.kernel.bandwidth;
    meta["eval_point"] = tv.eval_point;
    result = fit_tv_ggm(ds, tv, cfg);
    KernelSpec kern = tv.kernel;
    make_qf = [kern](const Dataset& train) {
      Vector w = kernel_weights(0.0, train.g, kern);
      double total = w.sum();
      if (total < 3.0 * train.p())
        throw EffectiveSampleTooSmall("kernel mass below 3p in fold");
      w *= train.n() / total;
      return assemble_quadratic(raw_design(train, &w));
    };
    make_eval = [kern](const Dataset& train, const Dataset& eval) {
      Vector w_train = kernel_weights(0.0, train.g, kern);
      Vector w = kernel_weights(0.0, eval.g, kern);
      w *= train.n() / w_train.sum();
      return raw_design(eval, &w);
    };
  }

  int repairs = 0;
  for (const FitResult& fr : result.path.entries) repairs += fr.repairs;
  meta["screening_repairs"] = repairs;
  meta["notes"] = result.notes;

  namespace fs = std::filesystem;
  fs::create_directories(rc.out_dir);
  std::string stem = (fs::path(rc.out_dir) / method).string();

  // Cross-validation on the method's own grid; folds = 0 skips it. A CV
  // breakdown (every fold singular) is recorded, not fatal: the path output
  // is still useful and the remedy is a wider bandwidth.
  if (cfg.folds > 0) {
    try {
      CvResult cv = cross_validate_generic(*cv_data, result.lambdas, cfg,
                                           make_qf, make_eval);
      io::write_cv_csv(stem + ".cv.csv", cv.curve);
      meta["cv_best_lambda"] = cv.best_lambda;
      meta["cv_notes"] = cv.notes;
      int sel = 0;
      for (size_t k = 0; k < result.lambdas.size(); ++k)
        if (result.lambdas[k] == cv.best_lambda) sel = static_cast<int>(k);
      const FitResult& chosen = result.path.entries[sel];
      io::write_selected_json(stem + ".selected.json", method, chosen.lambda,
                              chosen.theta);
      if (rc.dense)
        io::write_dense_csv(stem + ".selected.dense.csv", chosen.theta);
    } catch (const Error& err) {
      meta["cv_error"] = err.what();
      std::cerr << method << ": cross-validation failed (" << err.what()
                << "); path written without a selected estimate\n";
    }
  }

  io::PathFile pf;
  pf.method = method;
  pf.lambdas = result.lambdas;
  pf.path = result.path;
  pf.meta = meta;
  io::write_path_json(stem + ".path.json", pf);
}

int cmd_fit(const RunConfig& rc) {
  auto methods = parse_methods(rc.methods);
  Dataset ds = io::read_dataset_csv(rc.data_path);
  for (const std::string& method : methods) {
    fit_one_method(method, ds, rc);
    std::cout << "fit " << method << " -> " << rc.out_dir << "/" << method
              << ".path.json\n";
  }
  return 0;
}

int cmd_roc(const RunConfig& rc) {
  auto methods = parse_methods(rc.methods);
  SymmetricParam truth = io::read_truth_json(rc.truth_path);
  namespace fs = std::filesystem;
  fs::create_directories(rc.out_dir);

  std::ostringstream roc_csv;
  roc_csv << "method,lambda,fpr,tpr\n";
  json summary;
  summary["mode"] = rc.roc_mode;
  for (const std::string& method : methods) {
    std::string stem = (fs::path(rc.fit_dir) / method).string();
    RocCurve curve;
    if (rc.roc_mode == "path") {
      io::PathFile pf = io::read_path_json(stem + ".path.json");
      for (const FitResult& fr : pf.path.entries)
        if (fr.theta.p != truth.p)
          throw DimensionError("estimate/truth dimension mismatch for " + method);
      curve = roc_auc(pf.path, truth);
    } else if (rc.roc_mode == "threshold") {
      std::ifstream in(stem + ".selected.json");
      if (!in) throw IoError("cannot open " + stem + ".selected.json");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw IoError(stem + ".selected.json: " + e.what());
      }
      SymmetricParam est = io::param_from_json(j);
      if (est.p != truth.p)
        throw DimensionError("estimate/truth dimension mismatch for " + method);
      curve = roc_threshold(est, truth);
    } else {
      throw CLI::ValidationError("--roc-mode", "must be path or threshold");
    }
    for (const RocPoint& pt : curve.points)
      roc_csv << method << "," << io::format_double(pt.lambda) << ","
              << io::format_double(pt.fpr) << "," << io::format_double(pt.tpr)
              << "\n";
    summary["auc"][method] = curve.auc;
    summary["degenerate"][method] = curve.degenerate;
  }
  io::write_text_atomic((fs::path(rc.out_dir) / "roc.csv").string(), roc_csv.str());
  io::write_text_atomic((fs::path(rc.out_dir) / "summary.json").string(),
                        summary.dump(2) + "\n");
  std::cout << "wrote " << (fs::path(rc.out_dir) / "summary.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  CLI::App app{"Sparse Gaussian graphical structure estimation under an observed confounder"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--p", rc.p, "variable count");
  sim->add_option("--n", rc.n, "sample count (even)");
  sim->add_option("--seed", rc.seed, "random seed");
  sim->add_option("--density", rc.density, "target support density");
  sim->add_option("--grid-step", rc.grid_step, "confounder grid spacing");
  sim->add_option("--out-data", rc.data_path, "dataset CSV path");
  sim->add_option("--out-truth", rc.truth_path, "truth JSON path");

  auto* fit = app.add_subcommand("fit", "fit estimators over a lambda path");
  fit->add_option("--data", rc.data_path, "dataset CSV path");
  fit->add_option("--out-dir", rc.out_dir, "output directory");
  fit->add_option("--methods", rc.methods, "comma list: pla,plain,lr,con,tv");
  fit->add_option("--kernel", rc.kernel, "epanechnikov or gaussian");
  fit->add_option("--bandwidth", rc.bandwidth, "'auto' or a positive value");
  fit->add_option("--indicator-k", rc.indicator_k, "'auto' or a positive value");
  fit->add_option("--n-lambda", rc.n_lambda, "path length");
  fit->add_option("--lambda-min-ratio", rc.lambda_min_ratio, "grid floor ratio");
  fit->add_option("--folds", rc.folds, "cross-validation folds (0 = skip)");
  fit->add_option("--seed", rc.seed, "fold-assignment seed");
  fit->add_option("--ridge", rc.ridge, "Gram ridge (0 disables)");
  fit->add_flag("--dense", rc.dense, "also write the selected estimate as dense CSV");

  auto* roc = app.add_subcommand("roc", "score estimates against a truth file");
  roc->add_option("--truth", rc.truth_path, "truth JSON path");
  roc->add_option("--fit-dir", rc.fit_dir, "directory with fit outputs");
  roc->add_option("--out-dir", rc.out_dir, "output directory");
  roc->add_option("--methods", rc.methods, "comma list: pla,plain,lr,con,tv");
  roc->add_option("--roc-mode", rc.roc_mode, "path or threshold");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(rc);
    if (fit->parsed()) return cmd_fit(rc);
    return cmd_roc(rc);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const plagg::IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const plagg::DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const plagg::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

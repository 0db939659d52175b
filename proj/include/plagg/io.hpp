// File formats used by the command-line tool: dataset CSV, truth and
// estimate JSON, CV/ROC CSV. Writers are atomic (temp file + rename) and
// doubles round-trip exactly.
#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "plagg/core.hpp"
#include "plagg/simulate.hpp"
#include "plagg/solver.hpp"

namespace plagg {

struct IoError : Error {
  using Error::Error;
};

namespace io {

using nlohmann::json;

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("bad number '" + s + "' at " + where);
  return v;
}

inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

// Dataset CSV: header g,z1,...,zp then one sample per row.
inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ostringstream out;
  out << "g";
  for (int j = 0; j < ds.p(); ++j) out << ",z" << (j + 1);
  out << "\n";
  for (int i = 0; i < ds.n(); ++i) {
    out << format_double(ds.g[i]);
    for (int j = 0; j < ds.p(); ++j) out << "," << format_double(ds.z(i, j));
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "g")
    throw IoError(path + ":1: header must start with 'g'");
  const int p = static_cast<int>(header.size()) - 1;
  if (p < 2) throw IoError(path + ":1: need at least two z columns");
  for (int j = 0; j < p; ++j)
    if (header[j + 1] != "z" + std::to_string(j + 1))
      throw IoError(path + ":1: expected column z" + std::to_string(j + 1));

  std::vector<double> g;
  std::vector<double> z;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = parse_double(cell, path + ":" + std::to_string(lineno));
      if (col == 0)
        g.push_back(v);
      else
        z.push_back(v);
      ++col;
    }
    if (col != p + 1)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(p + 1) + " fields, got " + std::to_string(col));
  }
  if (g.empty()) throw IoError(path + ": no data rows");

  Dataset ds;
  const int n = static_cast<int>(g.size());
  ds.g = Eigen::Map<Vector>(g.data(), n);
  ds.z.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) ds.z(i, j) = z[static_cast<size_t>(i) * p + j];
  try {
    ds.validate();
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
  return ds;
}

// Edge lists use 1-based node indices, upper triangle only.
inline json param_to_json(const SymmetricParam& theta, double zero_tol = 0.0) {
  FlatIndex ix(theta.p);
  json edges = json::array();
  for (int m = 0; m < theta.offdiag.size(); ++m) {
    if (std::abs(theta.offdiag[m]) <= zero_tol) continue;
    auto [j, k] = ix.offdiag_pair(m);
    edges.push_back({j + 1, k + 1, theta.offdiag[m]});
  }
  json out;
  out["p"] = theta.p;
  out["diag"] = std::vector<double>(theta.diag.begin(), theta.diag.end());
  out["edges"] = edges;
  return out;
}

inline SymmetricParam param_from_json(const json& j) {
  int p = j.at("p").get<int>();
  SymmetricParam theta = SymmetricParam::zeros(p);
  auto diag = j.at("diag").get<std::vector<double>>();
  if (static_cast<int>(diag.size()) != p) throw IoError("diag length mismatch");
  for (int d = 0; d < p; ++d) theta.diag[d] = diag[d];
  FlatIndex ix(p);
  for (const auto& e : j.at("edges")) {
    int a = e.at(0).get<int>() - 1;
    int b = e.at(1).get<int>() - 1;
    if (a < 0 || b < 0 || a >= p || b >= p || a == b)
      throw IoError("edge endpoints out of range");
    theta.offdiag[ix.offdiag(a, b) - p] = e.at(2).get<double>();
  }
  return theta;
}

inline void write_truth_json(const std::string& path, const SimTruth& truth) {
  json out = param_to_json(truth.theta0);
  out["scale"] = {{"omega0", truth.omega0_scale}, {"w", truth.w_scale}};
  write_text_atomic(path, out.dump(2) + "\n");
}

inline SymmetricParam read_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
    return param_from_json(j);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

struct PathFile {
  std::string method;
  std::vector<double> lambdas;
  FitPath path;
  json meta;
};

inline void write_path_json(const std::string& path, const PathFile& pf) {
  json out;
  out["method"] = pf.method;
  out["lambdas"] = pf.lambdas;
  out["meta"] = pf.meta;
  json estimates = json::array();
  for (const FitResult& fr : pf.path.entries) {
    json e = param_to_json(fr.theta);
    e["lambda"] = fr.lambda;
    e["objective"] = fr.objective;
    e["active"] = fr.active;
    e["sweeps"] = fr.sweeps;
    e["kkt"] = fr.kkt;
    e["repairs"] = fr.repairs;
    e["converged"] = fr.converged;
    estimates.push_back(std::move(e));
  }
  out["estimates"] = std::move(estimates);
  write_text_atomic(path, out.dump(2) + "\n");
}

inline PathFile read_path_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PathFile pf;
  try {
    json j;
    in >> j;
    pf.method = j.at("method").get<std::string>();
    pf.lambdas = j.at("lambdas").get<std::vector<double>>();
    pf.meta = j.value("meta", json::object());
    for (const auto& e : j.at("estimates")) {
      FitResult fr;
      fr.theta = param_from_json(e);
      fr.lambda = e.at("lambda").get<double>();
      fr.objective = e.value("objective", 0.0);
      fr.active = e.value("active", 0);
      fr.sweeps = e.value("sweeps", 0);
      fr.kkt = e.value("kkt", 0.0);
      fr.repairs = e.value("repairs", 0);
      fr.converged = e.value("converged", true);
      pf.path.entries.push_back(std::move(fr));
    }
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return pf;
}

inline void write_selected_json(const std::string& path, const std::string& method,
                                double lambda, const SymmetricParam& theta) {
  json out = param_to_json(theta);
  out["method"] = method;
  out["lambda"] = lambda;
  write_text_atomic(path, out.dump(2) + "\n");
}

inline void write_cv_csv(const std::string& path, const std::vector<CvPoint>& curve) {
  std::ostringstream out;
  out << "lambda,mean,sd,folds\n";
  for (const CvPoint& pt : curve)
    out << format_double(pt.lambda) << "," << format_double(pt.mean) << ","
        << format_double(pt.sd) << "," << pt.folds << "\n";
  write_text_atomic(path, out.str());
}

inline void write_dense_csv(const std::string& path, const SymmetricParam& theta) {
  Matrix m = theta.omega();
  std::ostringstream out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ",";
      out << format_double(m(r, c));
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

}  // namespace io
}  // namespace plagg

#include <catch2/catch.hpp>
#include <plagg/plagg.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace plagg;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform_int(8) - 4);
    std::string s = io::format_double(v);
    CHECK(io::parse_double(s, "test") == v);
  }
  CHECK_THROWS_AS(io::parse_double("1.2.3", "test"), IoError);
  CHECK_THROWS_AS(io::parse_double("abc", "test"), IoError);
}

TEST_CASE("dataset csv") {
  Dataset ds = testutil::random_dataset(23, 4, 77);
  std::string path = tmp_path("plagg_ds.csv");

  SECTION("write, read, write is byte-stable") {
    io::write_dataset_csv(path, ds);
    Dataset back = io::read_dataset_csv(path);
    CHECK(back.g == ds.g);
    CHECK(back.z == ds.z);
    std::string first = slurp(path);
    io::write_dataset_csv(path, back);
    CHECK(slurp(path) == first);
  }
  SECTION("header errors carry the file and line") {
    std::ofstream(path) << "x,z1,z2\n0,1,2\n";
    CHECK_THROWS_WITH(io::read_dataset_csv(path),
                      Catch::Contains(":1") && Catch::Contains("header"));
  }
  SECTION("bad rows are rejected with a line number") {
    std::ofstream(path) << "g,z1,z2\n0,1,2\n1,oops,3\n";
    CHECK_THROWS_WITH(io::read_dataset_csv(path), Catch::Contains(":3"));
    std::ofstream(path) << "g,z1,z2\n0,1\n";
    CHECK_THROWS_WITH(io::read_dataset_csv(path),
                      Catch::Contains(":2") && Catch::Contains("fields"));
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(io::read_dataset_csv(tmp_path("plagg_missing.csv")), IoError);
  }
  SECTION("crlf line endings are tolerated") {
    std::ofstream(path, std::ios::binary) << "g,z1,z2\r\n0,1,2\r\n1,3,4\r\n";
    Dataset back = io::read_dataset_csv(path);
    CHECK(back.n() == 2);
    CHECK(back.z(1, 1) == 4.0);
  }
  SECTION("non-finite entries are a data error") {
    std::ofstream(path) << "g,z1,z2\n0,inf,2\n";
    CHECK_THROWS_AS(io::read_dataset_csv(path), IoError);
  }
}

TEST_CASE("parameter json round trip") {
  SymmetricParam theta = testutil::random_param(5, 31);
  // sparsify to exercise the edge list
  for (int m = 0; m < theta.offdiag.size(); m += 3) theta.offdiag[m] = 0.0;
  auto j = io::param_to_json(theta);
  SymmetricParam back = io::param_from_json(j);
  CHECK(back.diag == theta.diag);
  CHECK(back.offdiag == theta.offdiag);
}

TEST_CASE("truth json round trip") {
  Rng rng(41);
  auto [ds, truth] = simulate_dataset(5, 60, rng);
  std::string path = tmp_path("plagg_truth.json");
  io::write_truth_json(path, truth);
  SymmetricParam back = io::read_truth_json(path);
  CHECK(back.diag == truth.theta0.diag);
  CHECK(back.offdiag == truth.theta0.offdiag);
  std::string first = slurp(path);
  io::write_truth_json(path, truth);
  CHECK(slurp(path) == first);
}

TEST_CASE("path json round trip") {
  Dataset ds = testutil::random_dataset(50, 3, 51);
  QuadraticForm qf = assemble_quadratic(raw_design(ds));
  auto grid = make_lambda_grid(lambda_max(qf), 7, 0.05);
  io::PathFile pf;
  pf.method = "plain";
  pf.lambdas = grid;
  pf.path = fit_path(qf, grid, {});
  pf.meta = {{"bandwidth", 1.5}, {"ridge", 0.0}};
  std::string path = tmp_path("plagg_path.json");
  io::write_path_json(path, pf);
  io::PathFile back = io::read_path_json(path);
  CHECK(back.method == "plain");
  CHECK(back.lambdas == grid);
  REQUIRE(back.path.entries.size() == pf.path.entries.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    CHECK(back.path.entries[k].theta.offdiag == pf.path.entries[k].theta.offdiag);
    CHECK(back.path.entries[k].lambda == pf.path.entries[k].lambda);
    CHECK(back.path.entries[k].kkt == pf.path.entries[k].kkt);
    CHECK(back.path.entries[k].converged == pf.path.entries[k].converged);
  }
  CHECK(back.meta.at("bandwidth").get<double>() == 1.5);
  std::string first = slurp(path);
  io::write_path_json(path, back);
  CHECK(slurp(path) == first);
}

TEST_CASE("cv and dense csv writers") {
  std::vector<CvPoint> curve = {{0.5, 1.25, 0.1, 10}, {0.25, 1.125, 0.05, 10}};
  std::string path = tmp_path("plagg_cv.csv");
  io::write_cv_csv(path, curve);
  CHECK(slurp(path) == "lambda,mean,sd,folds\n0.5,1.25,0.1,10\n0.25,1.125,0.05,10\n");

  SymmetricParam theta = SymmetricParam::zeros(2);
  theta.diag << 1.0, 2.0;
  theta.offdiag[0] = -0.5;
  std::string dense = tmp_path("plagg_dense.csv");
  io::write_dense_csv(dense, theta);
  CHECK(slurp(dense) == "1,-0.5\n-0.5,2\n");
}

TEST_CASE("atomic writes leave no temp file") {
  std::string path = tmp_path("plagg_atomic.txt");
  io::write_text_atomic(path, "payload");
  CHECK(slurp(path) == "payload");
  CHECK(!std::filesystem::exists(path + ".tmp"));
}

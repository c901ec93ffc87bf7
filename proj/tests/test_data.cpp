#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "apm/data.hpp"

using namespace apm;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("load_csv maps the two label values lexicographically") {
  const auto path = write_temp_csv("apm_labels.csv",
                                   "f1,f2,diagnosis\n"
                                   "1.0,2.0,M\n"
                                   "0.5,1.5,B\n"
                                   "2.0,0.0,M\n"
                                   "0.0,1.0,B\n");
  const Dataset ds = load_csv(path, "diagnosis");
  REQUIRE(ds.n() == 4);
  REQUIRE(ds.d() == 2);
  // 'B' < 'M' lexicographically, so B -> -1 and M -> +1
  CHECK(ds.y[0] == 1);
  CHECK(ds.y[1] == -1);
  CHECK(ds.y[2] == 1);
  CHECK(ds.y[3] == -1);
  CHECK(ds.X(0, 0) == 1.0);
  CHECK(ds.X(3, 1) == 1.0);
}

TEST_CASE("load_csv rejects three classes, missing values, and bad files") {
  const auto three = write_temp_csv("apm_three.csv",
                                    "f1,label\n1,a\n2,b\n3,c\n4,a\n");
  CHECK_THROWS_WITH(load_csv(three, "label"), Catch::Matchers::ContainsSubstring("a") &&
                                                  Catch::Matchers::ContainsSubstring("b") &&
                                                  Catch::Matchers::ContainsSubstring("c"));

  const auto missing = write_temp_csv("apm_missing.csv",
                                      "f1,f2,label\n1,2,a\n1,,b\n2,1,a\n0,1,b\n");
  CHECK_THROWS_WITH(load_csv(missing, "label"), Catch::Matchers::ContainsSubstring("missing"));

  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "label"), std::runtime_error);

  const auto nocol = write_temp_csv("apm_nocol.csv", "f1,label\n1,a\n2,b\n1,a\n2,b\n");
  CHECK_THROWS_WITH(load_csv(nocol, "target"), Catch::Matchers::ContainsSubstring("target"));
}

TEST_CASE("load_csv handles a wdbc-shaped file") {
  std::string content = "diagnosis";
  for (int j = 0; j < 30; ++j) content += ",feat" + std::to_string(j);
  content += "\n";
  RngStream rng(3);
  int malignant = 0;
  for (int i = 0; i < 569; ++i) {
    const bool m = i % 3 == 0;
    malignant += m;
    content += m ? "M" : "B";
    for (int j = 0; j < 30; ++j) content += "," + std::to_string(rng.uniform(0.0, 10.0));
    content += "\n";
  }
  const auto path = write_temp_csv("apm_wdbc.csv", content);
  const Dataset ds = load_csv(path, "diagnosis");
  CHECK(ds.n() == 569);
  CHECK(ds.d() == 30);
  CHECK(std::count(ds.y.begin(), ds.y.end(), 1) == malignant);  // 'B' < 'M', so M -> +1
}

TEST_CASE("synthetic generators produce balanced 2-D data") {
  RngStream rng(17);
  for (const char* name : {"clouds", "cross", "horseshoe"}) {
    const Dataset ds = generate_synthetic(name, 600, rng);
    CHECK(ds.n() == 600);
    CHECK(ds.d() == 2);
    int pos = 0;
    for (int v : ds.y) pos += v == 1;
    CHECK(std::abs(2 * pos - ds.n()) <= 1);
  }
  CHECK_THROWS_AS(generate_synthetic("clouds", 4, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic("clouds", 9, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic("spiral", 100, rng), std::invalid_argument);
}

TEST_CASE("cross is classified by the diagonal separator at 95%+") {
  RngStream rng(123);
  const Dataset ds = generate_synthetic("cross", 600, rng);
  const Vec diag = (Vec(2) << 1.0, 1.0).finished() / std::sqrt(2.0);
  int correct = 0;
  for (int i = 0; i < ds.n(); ++i) {
    const int pred = ds.X.row(i).dot(diag) >= 0 ? 1 : -1;
    correct += pred == ds.y[i];
  }
  CHECK(static_cast<double>(correct) / ds.n() >= 0.95);
}

TEST_CASE("split_and_normalize centers and scales the pool") {
  RngStream gen_rng(5), split_rng(6);
  const Dataset ds = generate_synthetic("clouds", 600, gen_rng);
  const SplitDataset split = split_and_normalize(ds, split_rng);
  CHECK(split.pool.n() == 300);
  CHECK(split.test.n() == 300);
  for (int j = 0; j < split.pool.d(); ++j) {
    CHECK(std::abs(split.pool.X.col(j).mean()) <= 1e-9);
    const double var = split.pool.X.col(j).array().square().mean();
    CHECK(std::sqrt(var) == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("constant features are centered, not scaled") {
  Dataset ds;
  ds.name = "const-col";
  ds.X.resize(8, 2);
  ds.y.assign(8, -1);
  RngStream rng(9);
  for (int i = 0; i < 8; ++i) {
    ds.X(i, 0) = rng.normal();
    ds.X(i, 1) = 7.5;  // zero variance
    if (i % 2 == 0) ds.y[i] = 1;
  }
  RngStream split_rng(10);
  const SplitDataset split = split_and_normalize(ds, split_rng);
  CHECK(split.pool.X.allFinite());
  CHECK(split.feature_scale[1] == 1.0);
  CHECK(std::abs(split.pool.X.col(1).mean()) <= 1e-9);
}

TEST_CASE("normalization is idempotent on already-normalized pools") {
  RngStream gen_rng(5), split_rng(21);
  const Dataset ds = generate_synthetic("cross", 200, gen_rng);
  const SplitDataset split = split_and_normalize(ds, split_rng);
  // re-deriving stats from the normalized pool gives mean 0, scale 1
  for (int j = 0; j < split.pool.d(); ++j) {
    const double mean = split.pool.X.col(j).mean();
    const double sd = std::sqrt((split.pool.X.col(j).array() - mean).square().mean());
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(sd == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("B strictly bounds pool norms and is tight") {
  RngStream gen_rng(13), split_rng(14);
  const Dataset ds = generate_synthetic("horseshoe", 300, gen_rng);
  const SplitDataset split = split_and_normalize(ds, split_rng);
  double max_norm = 0.0;
  for (int i = 0; i < split.pool.n(); ++i) {
    const double nrm = split.pool.X.row(i).norm();
    CHECK(nrm <= split.B);
    max_norm = std::max(max_norm, nrm);
  }
  CHECK(max_norm >= split.B * (1.0 - 1e-8));
}

TEST_CASE("split_and_normalize retries until both classes appear on both sides") {
  // heavily skewed labels: 2 positives among 12
  Dataset ds;
  ds.name = "skew";
  ds.X.resize(12, 1);
  ds.y.assign(12, -1);
  RngStream rng(31);
  for (int i = 0; i < 12; ++i) ds.X(i, 0) = rng.normal();
  ds.y[0] = ds.y[1] = 1;
  RngStream split_rng(32);
  const SplitDataset split = split_and_normalize(ds, split_rng);
  const bool pool_pos = std::count(split.pool.y.begin(), split.pool.y.end(), 1) > 0;
  const bool test_pos = std::count(split.test.y.begin(), split.test.y.end(), 1) > 0;
  CHECK(pool_pos);
  CHECK(test_pos);
}

TEST_CASE("pick_seeds is deterministic and picks one index per class") {
  RngStream gen_rng(40), split_rng(41);
  const Dataset ds = generate_synthetic("clouds", 600, gen_rng);
  const SplitDataset split = split_and_normalize(ds, split_rng);

  RngStream a(77), b(77);
  const SeedSet s1 = pick_seeds(split, a);
  const SeedSet s2 = pick_seeds(split, b);
  CHECK(s1.positive_index == s2.positive_index);
  CHECK(s1.negative_index == s2.negative_index);
  CHECK(s1.positive_index != s1.negative_index);
  CHECK(split.pool.y[s1.positive_index] == 1);
  CHECK(split.pool.y[s1.negative_index] == -1);
}

TEST_CASE("pick_seeds with one example per class is forced") {
  Dataset ds;
  ds.name = "tiny";
  ds.X = Mat::Identity(4, 4);
  ds.y = {1, -1, -1, -1};
  SplitDataset split;
  split.pool = ds;
  RngStream rng(1);
  const SeedSet seeds = pick_seeds(split, rng);
  CHECK(seeds.positive_index == 0);
  CHECK(split.pool.y[seeds.negative_index] == -1);
}

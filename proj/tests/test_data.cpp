#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "clams/data.hpp"
#include "clams/rng.hpp"

using namespace clams;

TEST_CASE("csv parsing basics") {
  const std::string csv = "a,b\n1,2\n3,4\n5,6\n7,8\n";
  Dataset d = parse_csv(csv, "t");
  CHECK(d.n() == 4);
  CHECK(d.dims() == 2);
  CHECK_FALSE(d.labels.has_value());
  CHECK(d.rows(2, 1) == 6.0);
}

TEST_CASE("label column factor-encoded in first-appearance order") {
  Dataset d = parse_csv("x,y\n1,a\n2,b\n3,a\n", "t", "y");
  REQUIRE(d.labels.has_value());
  CHECK(*d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.dims() == 1);
}

TEST_CASE("csv error cases") {
  CHECK_THROWS(parse_csv("a,b\n1,2\n", "t"));            // fewer than 2 data rows
  CHECK_THROWS(parse_csv("a,b\n1,2\n3\n", "t"));         // ragged row
  CHECK_THROWS(parse_csv("a,b\n1,2\n3,4\n", "t", "z"));  // missing label column
}

TEST_CASE("quoted fields and missing values") {
  Dataset d = parse_csv("a,b\n\"x,y\",1\nz,NA\nz,3\n", "t");
  CHECK(d.raw_columns[0].kind == ColumnKind::categorical);
  CHECK(std::isnan(d.rows(1, 1)));
}

TEST_CASE("one-hot expansion of low-cardinality column") {
  Dataset d = parse_csv("c,v\nred,1\nblue,2\nred,3\n", "t");
  Dataset v = vectorize(d);
  CHECK(v.vectorized);
  CHECK(v.n() == 3);
  // c expands to two 0/1 columns in category order (red, blue)
  CHECK(v.rows(0, 0) == 1.0);
  CHECK(v.rows(0, 1) == 0.0);
  CHECK(v.rows(1, 0) == 0.0);
  CHECK(v.rows(1, 1) == 1.0);
  CHECK(v.rows(2, 0) == 1.0);
  // each one-hot block sums to exactly 1 per row
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(v.rows(i, 0) + v.rows(i, 1) == 1.0);
}

TEST_CASE("median imputation of missing numerics") {
  Dataset d = parse_csv("a,b\n1,0\nNA,0\n3,0\n", "t");
  Dataset v = vectorize(d);
  CHECK(v.rows(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("high-cardinality frequency encoding matches count oracle") {
  std::ostringstream csv;
  csv << "c,v\n";
  std::map<std::string, int> counts;
  Rng rng(5);
  std::vector<std::string> vals;
  for (int i = 0; i < 100; ++i) {
    // 50 distinct values, some repeated
    const std::string s = "v" + std::to_string(rng.uniform_int(0, 49));
    vals.push_back(s);
    ++counts[s];
    csv << s << "," << i << "\n";
  }
  Dataset d = parse_csv(csv.str(), "t");
  REQUIRE(d.raw_columns[0].cardinality() > 30);
  Dataset v = vectorize(d);
  // single frequency column replaces the categorical one
  CHECK(v.dims() == 2);
  for (int i = 0; i < 100; ++i)
    CHECK(v.rows(i, 0) == doctest::Approx(counts[vals[i]] / 100.0).epsilon(1e-12));
}

TEST_CASE("fully-missing column dropped with warning") {
  Dataset d = parse_csv("a,b\n1,NA\n2,NA\n3,NA\n", "t");
  Dataset v = vectorize(d);
  CHECK(v.dims() == 1);
  CHECK_FALSE(v.warnings.empty());
}

TEST_CASE("ica output is whitened") {
  Rng rng(11);
  Dataset d;
  d.name = "g";
  d.rows.resize(400, 3);
  for (Eigen::Index i = 0; i < 400; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) d.rows(i, j) = rng.normal();
  d.vectorized = true;
  IcaConfig cfg;
  cfg.n_components = 3;
  cfg.seed = 1;
  PointCloud pc = ica_transform(d, cfg);
  REQUIRE(pc.points.cols() == 3);
  const Eigen::Index m = pc.points.rows();
  Matrix centered = pc.points.rowwise() - pc.points.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(m - 1);
  CHECK((cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(pc.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pc.weights.minCoeff() > 0.0);
}

TEST_CASE("constant columns dropped before whitening") {
  Rng rng(2);
  Dataset d;
  d.name = "c";
  d.rows.resize(100, 3);
  for (Eigen::Index i = 0; i < 100; ++i) {
    d.rows(i, 0) = rng.normal();
    d.rows(i, 1) = 7.0;
    d.rows(i, 2) = rng.normal();
  }
  d.vectorized = true;
  IcaConfig cfg;
  cfg.seed = 3;
  PointCloud pc = ica_transform(d, cfg);
  CHECK(pc.points.cols() == 2);
}

TEST_CASE("ica recovers a two-source laplace mixture") {
  Rng rng(17);
  const int n = 2000;
  Matrix S(n, 2);
  for (int i = 0; i < n; ++i) {
    S(i, 0) = rng.laplace();
    S(i, 1) = rng.laplace();
  }
  Matrix A(2, 2);
  A << 1.0, 0.6, 0.4, 1.0;
  Dataset d;
  d.name = "mix";
  d.rows = S * A.transpose();
  d.vectorized = true;
  IcaConfig cfg;
  cfg.n_components = 2;
  cfg.row_cap = n;
  cfg.seed = 4;
  PointCloud pc = ica_transform(d, cfg);
  REQUIRE(pc.ica_converged);
  // each true source must correlate >= 0.95 with some recovered component
  for (int s = 0; s < 2; ++s) {
    double best = 0.0;
    Vector src = S.col(s).array() - S.col(s).mean();
    for (int c = 0; c < 2; ++c) {
      Vector rec = pc.points.col(c).array() - pc.points.col(c).mean();
      const double corr = std::abs(src.dot(rec)) / (src.norm() * rec.norm());
      best = std::max(best, corr);
    }
    CHECK(best >= 0.95);
  }
}

TEST_CASE("ica row cap subsamples deterministically") {
  Dataset d = synth_dataset(SynthFamily::blobs, 800, 3, 2, 5);
  d = vectorize(d);
  IcaConfig cfg;
  cfg.seed = 6;
  PointCloud a = ica_transform(d, cfg);
  PointCloud b = ica_transform(d, cfg);
  CHECK(a.points.rows() == 500);
  CHECK(a.points == b.points);
}

TEST_CASE("synth blobs shape and labels") {
  Dataset d = synth_dataset(SynthFamily::blobs, 300, 2, 3, 7);
  CHECK(d.n() == 300);
  REQUIRE(d.labels.has_value());
  std::set<int> seen(d.labels->begin(), d.labels->end());
  CHECK(seen == std::set<int>{0, 1, 2});
}

TEST_CASE("synth rings balanced labels") {
  Dataset d = synth_dataset(SynthFamily::rings, 200, 2, 2, 1);
  REQUIRE(d.labels.has_value());
  int c0 = 0, c1 = 0;
  for (int l : *d.labels) (l == 0 ? c0 : c1)++;
  CHECK(c0 == 100);
  CHECK(c1 == 100);
  CHECK_THROWS(synth_dataset(SynthFamily::rings, 100, 3, 2, 1));
}

TEST_CASE("synth determinism") {
  Dataset a = synth_dataset(SynthFamily::anisotropic, 150, 4, 3, 9);
  Dataset b = synth_dataset(SynthFamily::anisotropic, 150, 4, 3, 9);
  CHECK(a.rows == b.rows);
  CHECK(*a.labels == *b.labels);
  CHECK(dataset_to_csv(a) == dataset_to_csv(b));
}

TEST_CASE("vectorize keeps numeric datasets unchanged modulo flags") {
  Dataset d = synth_dataset(SynthFamily::blobs, 50, 2, 2, 3);
  Dataset v = vectorize(d);
  CHECK(v.rows == d.rows);
  CHECK(v.n() == d.n());
}

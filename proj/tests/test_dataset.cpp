#include "subshape/dataset.hpp"
#include "subshape/error.hpp"

#include <doctest.h>

#include <random>

using namespace subshape;

TEST_SUITE("dataset_io") {

TEST_CASE("iris table loads as 150 x 4 with three classes of 50") {
  const Dataset d = load_table_file(SUBSHAPE_DATA_DIR "/iris.csv", std::string("class"));
  CHECK(d.n_points() == 150);
  CHECK(d.n_dims() == 4);
  CHECK(d.n_clusters() == 3);
  std::array<int, 3> counts{};
  for (const int l : d.labels) ++counts[static_cast<std::size_t>(l)];
  CHECK(counts == std::array<int, 3>{50, 50, 50});
  CHECK(d.label_names == std::vector<std::string>{"setosa", "versicolor", "virginica"});
  CHECK(d.column_names[2] == "petal_length");
}

TEST_CASE("labels follow first-appearance order") {
  const Dataset d = load_table("x,y,z,kind\n1,2,3,b\n4,5,6,a\n7,8,9,b\n", std::string("kind"));
  CHECK(d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.label_names == std::vector<std::string>{"b", "a"});
}

TEST_CASE("tab delimiter and RFC 4180 quoting") {
  const Dataset tab = load_table("a\tb\tc\n1\t2\t3\n", std::nullopt);
  CHECK(tab.values(0, 2) == 3.0);
  const Dataset quoted = load_table("a,b,\"label, with comma\"\n\"1.5\",2,\"x \"\"y\"\"\"\n", std::string("label, with comma"));
  CHECK(quoted.values(0, 0) == 1.5);
  CHECK(quoted.label_names.front() == "x \"y\"");
}

TEST_CASE("rows with missing or non-numeric values are rejected and counted") {
  const Dataset d = load_table("a,b,c\n1,2,3\n1,,3\n1,x,3\n1,2\n4,5,6\n1,nan,2\n", std::nullopt);
  CHECK(d.n_points() == 2);
  CHECK(d.rejected_rows == 4);
  CHECK(d.point_ids == std::vector<int>{0, 4});
  CHECK(d.labels == std::vector<int>{0, 0});
}

TEST_CASE("error paths") {
  CHECK_THROWS_WITH_AS(load_table("a,b,c\n", std::nullopt), "zero usable rows", Error);
  CHECK_THROWS_WITH_AS(load_table("a,b,c\nx,y,z\n", std::nullopt), "zero usable rows", Error);
  CHECK_THROWS_AS(load_table("a,b,c\n1,2,3\n", std::string("class")), Error);
  CHECK_THROWS_AS(load_table("a,,c\n1,2,3\n", std::nullopt), Error);
  CHECK_THROWS_AS(load_table("", std::nullopt), Error);
}

TEST_CASE("normalize_columns maps to [0,1] with constant columns at 0.5") {
  Dataset d;
  d.values.resize(3, 3);
  d.values << 2, 7, 0,
              4, 7, 0.5,
              6, 7, 1;
  d.labels = {0, 0, 0};
  const Dataset n = normalize_columns(d);
  CHECK(n.values.col(0).isApprox(Eigen::Vector3d(0, 0.5, 1)));
  CHECK(n.values.col(1) == Eigen::Vector3d::Constant(0.5));
  CHECK(n.values.col(2) == d.values.col(2));
}

TEST_CASE("normalize is idempotent and preserves points and labels") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d;
    d.values = Eigen::MatrixXd::NullaryExpr(40, 6, [&] { return u(rng); });
    for (int i = 0; i < 40; ++i) d.labels.push_back(i % 4);
    const Dataset once = normalize_columns(d);
    const Dataset twice = normalize_columns(once);
    CHECK((once.values - twice.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(once.n_points() == d.n_points());
    CHECK(once.labels == d.labels);
    CHECK(once.values.minCoeff() >= 0.0);
    CHECK(once.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("compact_labels renumbers in first-appearance order") {
  CHECK(compact_labels({4, 4, 1, 7, 1}) == std::vector<int>{0, 0, 1, 2, 1});
}

}

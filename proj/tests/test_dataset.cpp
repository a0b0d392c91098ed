#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/rng.hpp"

using namespace orthoinfer;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("load_csv parses a small file and extracts the response", "[dataset]") {
  std::string path = temp_path("oi_basic.csv");
  write_text(path, "y,a,b\n1,2,3\n4,5,6\n7,8,9\n");
  Dataset d = load_csv(path, "y");
  REQUIRE(d.n() == 3);
  REQUIRE(d.p() == 2);
  CHECK(d.Y(0) == 1.0);
  CHECK(d.Y(2) == 7.0);
  CHECK(d.X(0, 0) == 2.0);
  CHECK(d.X(2, 1) == 9.0);
  CHECK(d.column_ids == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(d.centered);

  // Response in the middle of the header: predictor order preserved.
  write_text(path, "a,y,b\n2,1,3\n");
  Dataset d2 = load_csv(path, "y");
  CHECK(d2.column_ids == std::vector<std::string>{"a", "b"});
  CHECK(d2.Y(0) == 1.0);
  CHECK(d2.X(0, 1) == 3.0);
}

TEST_CASE("load_csv skips comment lines", "[dataset]") {
  std::string path = temp_path("oi_comment.csv");
  write_text(path, "# manifest: somewhere.json\ny,a\n1,2\n# trailing note\n3,4\n");
  Dataset d = load_csv(path, "y");
  REQUIRE(d.n() == 2);
  CHECK(d.X(1, 0) == 4.0);
}

TEST_CASE("load_csv errors name the offending location", "[dataset]") {
  std::string path = temp_path("oi_bad.csv");

  write_text(path, "y,a\n1,2\n3,oops\n");
  CHECK_THROWS_WITH(load_csv(path, "y"),
                    Catch::Matchers::ContainsSubstring("row 2") &&
                        Catch::Matchers::ContainsSubstring("'a'"));

  write_text(path, "y,a\n1,NaN\n");
  CHECK_THROWS_WITH(load_csv(path, "y"),
                    Catch::Matchers::ContainsSubstring("row 1") &&
                        Catch::Matchers::ContainsSubstring("'a'"));

  write_text(path, "y,a\n1,2\n3\n");
  CHECK_THROWS_AS(load_csv(path, "y"), DataError);

  write_text(path, "y,a,a\n1,2,3\n");
  CHECK_THROWS_WITH(load_csv(path, "y"), Catch::Matchers::ContainsSubstring("duplicate"));

  write_text(path, "y,a\n1,2\n");
  CHECK_THROWS_WITH(load_csv(path, "z"), Catch::Matchers::ContainsSubstring("z"));

  CHECK_THROWS_AS(load_csv(temp_path("oi_noexist_x.csv"), "y"), DataError);
}

TEST_CASE("write then load reproduces the matrix bit for bit", "[dataset]") {
  SubStream g(77, Role::kGeneric, 0);
  Eigen::MatrixXd X(7, 5);
  Eigen::VectorXd Y(7);
  for (int i = 0; i < 7; ++i) {
    Y(i) = g.next_normal() * std::pow(10.0, (i % 5) * 3 - 6);
    for (int j = 0; j < 5; ++j) X(i, j) = g.next_normal() * std::pow(10.0, (j % 7) * 2 - 5);
  }
  X(0, 0) = 0.1;            // classic non-terminating binary fraction
  X(1, 1) = 1e-300;         // subnormal-adjacent magnitude
  X(2, 2) = -12345678.875;  // exact binary value
  Dataset d = make_dataset(X, Y);

  std::string path = temp_path("oi_roundtrip.csv");
  write_csv(d, path, "resp");
  Dataset r = load_csv(path, "resp");
  REQUIRE(r.n() == d.n());
  REQUIRE(r.p() == d.p());
  for (int i = 0; i < 7; ++i) {
    CHECK(r.Y(i) == d.Y(i));
    for (int j = 0; j < 5; ++j) CHECK(r.X(i, j) == d.X(i, j));
  }
  CHECK(r.column_ids == d.column_ids);
}

TEST_CASE("center_columns subtracts means and is exactly idempotent", "[dataset]") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 10, 2, 20, 3, 30;
  Dataset d = make_dataset(X, Eigen::VectorXd::Ones(3));
  Dataset c = center_columns(d);
  CHECK(c.centered);
  CHECK(c.X(0, 0) == -1.0);
  CHECK(c.X(1, 0) == 0.0);
  CHECK(c.X(2, 0) == 1.0);
  CHECK(c.X(0, 1) == -10.0);
  CHECK(c.Y == d.Y);

  Dataset cc = center_columns(c);
  CHECK(cc.X == c.X);  // bitwise: already-centered input is returned unchanged

  SubStream g(5, Role::kGeneric, 0);
  Eigen::MatrixXd R(10, 5);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 5; ++j) R(i, j) = g.next_normal() * 100.0;
  Dataset rc = center_columns(make_dataset(R, Eigen::VectorXd::Zero(10)));
  for (int j = 0; j < 5; ++j) CHECK(std::abs(rc.X.col(j).sum()) < 1e-12);
}

TEST_CASE("collapse keeps one column per correlated run", "[dataset]") {
  // Two identical columns collapse into one group.
  Eigen::MatrixXd X(4, 2);
  X.col(0) << 1, 2, 3, 4;
  X.col(1) << 1, 2, 3, 4;
  auto [kept, map] = collapse_correlated(center_columns(make_dataset(X, Eigen::VectorXd::Zero(4))), 0.95);
  REQUIRE(kept.p() == 1);
  REQUIRE(map.retained == std::vector<int>{0});
  REQUIRE(map.groups.size() == 1);
  CHECK(map.groups[0].head == 0);
  CHECK(map.groups[0].members == std::vector<int>{1});
  REQUIRE(map.groups[0].correlations.size() == 1);
  CHECK(map.groups[0].correlations[0] == Catch::Approx(1.0));
  CHECK(kept.column_ids == std::vector<std::string>{"x1"});

  // Orthogonal centered columns: nothing collapses.
  Eigen::MatrixXd O(4, 3);
  O.col(0) << 1, 1, -1, -1;
  O.col(1) << 1, -1, 1, -1;
  O.col(2) << 1, -1, -1, 1;
  Dataset od = make_dataset(O, Eigen::VectorXd::Zero(4));
  od.centered = true;  // columns already sum to zero
  auto [okept, omap] = collapse_correlated(od, 0.95);
  CHECK(okept.p() == 3);
  CHECK(omap.retained == std::vector<int>{0, 1, 2});
  for (const auto& grp : omap.groups) CHECK(grp.members.empty());
}

TEST_CASE("collapse reproduces a planted duplicate count", "[dataset]") {
  // 120 base columns; after every third one, insert a noisy near-copy. The
  // scan must retain exactly the 120 heads and collapse the 40 copies.
  SubStream g(404, Role::kGeneric, 0);
  const int n = 50;
  std::vector<Eigen::VectorXd> cols;
  int planted = 0;
  for (int b = 0; b < 120; ++b) {
    Eigen::VectorXd base(n);
    for (int i = 0; i < n; ++i) base(i) = g.next_normal();
    cols.push_back(base);
    if (b % 3 == 2) {
      Eigen::VectorXd copy = base;
      for (int i = 0; i < n; ++i) copy(i) += 0.01 * g.next_normal();
      cols.push_back(copy);
      ++planted;
    }
  }
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = cols[c];
  Dataset d = center_columns(make_dataset(X, Eigen::VectorXd::Zero(n)));
  auto [kept, map] = collapse_correlated(d, 0.95);
  CHECK(planted == 40);
  CHECK(kept.p() == 120);
  CHECK(map.retained.size() + 40 == static_cast<std::size_t>(d.p()));
  std::size_t collapsed = 0;
  for (const auto& grp : map.groups) {
    collapsed += grp.members.size();
    for (double r : grp.correlations) CHECK(std::abs(r) > 0.95);
  }
  CHECK(collapsed == 40);
}

TEST_CASE("collapse rejects zero-variance columns and uncentered input", "[dataset]") {
  Eigen::MatrixXd X(4, 2);
  X.col(0) << 1, 2, 3, 4;
  X.col(1) << 5, 5, 5, 5;  // constant: zero variance after centering
  Dataset d = center_columns(make_dataset(X, Eigen::VectorXd::Zero(4)));
  CHECK_THROWS_WITH(collapse_correlated(d, 0.95), Catch::Matchers::ContainsSubstring("x2"));

  Dataset raw = make_dataset(Eigen::MatrixXd::Random(4, 2), Eigen::VectorXd::Zero(4));
  CHECK_THROWS_AS(collapse_correlated(raw, 0.95), DataError);
  CHECK_THROWS_AS(collapse_correlated(center_columns(raw), 0.0), DataError);
  CHECK_THROWS_AS(collapse_correlated(center_columns(raw), 1.5), DataError);
}

TEST_CASE("collapse map serializes to the documented JSON shape", "[dataset]") {
  Eigen::MatrixXd X(4, 3);
  X.col(0) << 1, 2, 3, 4;
  X.col(1) << 1.01, 2.0, 3.01, 4.0;
  X.col(2) << 4, -1, 2, -5;
  auto [kept, map] =
      collapse_correlated(center_columns(make_dataset(X, Eigen::VectorXd::Zero(4))), 0.95);
  (void)kept;
  nlohmann::json j = to_json(map);
  REQUIRE(j.contains("retained"));
  REQUIRE(j.contains("groups"));
  CHECK(j["retained"].get<std::vector<int>>() == map.retained);
  REQUIRE(j["groups"].is_array());
  REQUIRE(!j["groups"].empty());
  CHECK(j["groups"][0].contains("head"));
  CHECK(j["groups"][0].contains("members"));
  CHECK(j["groups"][0].contains("correlations"));
}

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "oracles.hpp"
#include "tanlars/data_model.hpp"
#include "tanlars/errors.hpp"

using namespace tanlars;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tanlars_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("normalize_design centers and scales every column") {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd raw = oracle::normal_matrix(rng, 40, 6);
  raw.col(2).array() = 1e6 + 1e3 * raw.col(2).array();
  const DesignMatrix X = normalize_design(raw);
  REQUIRE(X.n() == 40);
  REQUIRE(X.d() == 6);
  for (Eigen::Index j = 0; j < 6; ++j) {
    CHECK(std::abs(X.values().col(j).sum()) <= 1e-12);
    CHECK(X.values().col(j).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK((X.values() - oracle::normalized(raw)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((X.gram() - X.values().transpose() * X.values()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((gram(X) - X.gram()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(X.column_names().size() == 6);
}

TEST_CASE("normalize_design rejects degenerate designs") {
  std::mt19937_64 rng(11);
  Eigen::MatrixXd raw = oracle::normal_matrix(rng, 20, 4);

  SUBCASE("constant column") {
    raw.col(1).setConstant(3.0);
    try {
      normalize_design(raw);
      FAIL("expected ZeroVarianceColumn");
    } catch (const ZeroVarianceColumn& e) {
      CHECK(e.column() == 1);
    }
  }
  SUBCASE("collinear columns") {
    raw.col(3) = 2.0 * raw.col(0) - raw.col(2);
    CHECK_THROWS_AS(normalize_design(raw), RankDeficient);
  }
  SUBCASE("more columns than the centered rank allows") {
    const Eigen::MatrixXd wide = oracle::normal_matrix(rng, 5, 5);
    CHECK_THROWS_AS(normalize_design(wide), RankDeficient);
  }
  SUBCASE("label count") {
    CHECK_THROWS_AS(normalize_design(raw, {"a", "b"}), std::invalid_argument);
  }
}

TEST_CASE("from_normalized validates its input") {
  std::mt19937_64 rng(12);
  const DesignMatrix X = normalize_design(oracle::normal_matrix(rng, 30, 3));
  CHECK_NOTHROW(DesignMatrix::from_normalized(X.values()));
  Eigen::MatrixXd bad = X.values();
  bad.col(0) *= 2.0;
  CHECK_THROWS_AS(DesignMatrix::from_normalized(bad), std::invalid_argument);
}

TEST_CASE("select_columns keeps normalization and order") {
  std::mt19937_64 rng(13);
  const DesignMatrix X = normalize_design(oracle::normal_matrix(rng, 30, 5), {"a", "b", "c", "d", "e"});
  const DesignMatrix S = X.select_columns({4, 1});
  REQUIRE(S.d() == 2);
  CHECK(S.column_names() == std::vector<std::string>{"e", "b"});
  CHECK((S.values().col(0) - X.values().col(4)).norm() == 0.0);
  CHECK(S.gram()(0, 1) == doctest::Approx(X.gram()(4, 1)).epsilon(1e-15));
}

TEST_CASE("to_original_scale reproduces the linear predictor on raw data") {
  std::mt19937_64 rng(14);
  Eigen::MatrixXd raw = oracle::normal_matrix(rng, 25, 4);
  raw.col(0).array() += 5.0;
  raw.col(3) *= 7.0;
  const DesignMatrix X = normalize_design(raw);
  Eigen::VectorXd theta(4);
  theta << 1.5, -2.0, 0.0, 0.25;
  double offset = 0.0;
  const Eigen::VectorXd beta = X.to_original_scale(theta, &offset);
  const Eigen::VectorXd eta_raw = (raw * beta).array() + offset;
  CHECK((eta_raw - X.values() * theta).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("ResponseVector enforces the family domain") {
  Eigen::VectorXd y(3);
  y << 0.0, 1.0, 1.0;
  CHECK_NOTHROW(ResponseVector(y, FamilyDomain::binary01));
  CHECK_NOTHROW(ResponseVector(y, FamilyDomain::nonneg_integer));
  y(1) = 0.5;
  CHECK_THROWS_AS(ResponseVector(y, FamilyDomain::binary01), DomainError);
  CHECK_THROWS_AS(ResponseVector(y, FamilyDomain::nonneg_integer), DomainError);
  CHECK_NOTHROW(ResponseVector(y, FamilyDomain::real));
  y(2) = -1.0;
  CHECK_THROWS_AS(ResponseVector(y, FamilyDomain::nonneg_integer), DomainError);
  y(0) = std::nan("");
  CHECK_THROWS_AS(ResponseVector(y, FamilyDomain::real), DomainError);
}

TEST_CASE("format_double is shortest round trip") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = U(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("numeric csv parsing") {
  const auto path = scratch("table.csv");
  SUBCASE("well formed") {
    std::ofstream(path) << "a,b\n1,2.5\n-3e-2,4\n";
    const NumericTable t = read_numeric_csv(path);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.cells.rows() == 2);
    CHECK(t.cells(1, 0) == -0.03);
  }
  SUBCASE("non-numeric cell") {
    std::ofstream(path) << "a,b\n1,x\n";
    CHECK_THROWS_AS(read_numeric_csv(path), ParseError);
  }
  SUBCASE("ragged row") {
    std::ofstream(path) << "a,b\n1,2,3\n";
    CHECK_THROWS_AS(read_numeric_csv(path), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_numeric_csv(path.parent_path() / "absent.csv"), IoError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load_dataset selects the response by name or index") {
  const auto path = scratch("data.csv");
  std::ofstream(path) << "y,u,v\n1,0.5,3\n0,1.5,-1\n1,-2,0.25\n0,0,2\n";
  const Dataset by_name = load_dataset(path, std::string("y"), FamilyDomain::binary01);
  const Dataset by_index = load_dataset(path, std::size_t{0}, FamilyDomain::binary01);
  CHECK(by_name.X.column_names() == std::vector<std::string>{"u", "v"});
  CHECK((by_name.X.values() - by_index.X.values()).norm() == 0.0);
  CHECK(by_name.y.values()(2) == 1.0);
  CHECK_THROWS_AS(load_dataset(path, std::string("w"), FamilyDomain::binary01), ParseError);
  CHECK_THROWS_AS(load_dataset(path, std::string("v"), FamilyDomain::binary01), DomainError);
  std::filesystem::remove_all(path.parent_path());
}

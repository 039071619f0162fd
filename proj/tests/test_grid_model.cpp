#include "detopt/grid_model.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace detopt;

namespace {

std::string minimal_doc() {
  return R"({
    "rows": 3, "cols": 3, "cell_size_m": 1,
    "blocked": [], "entrances": [1],
    "targets": [{"cell": 9, "zeta": 10}],
    "gamma": [{"entrance": 1, "target": 9, "p": 1}],
    "speed_k_mps": 1, "response_time_chi_s": 0,
    "theta1": 0.9, "theta2": 0.6,
    "primary": {"alpha_m": 1, "beta_per_m": 1, "psi": 1, "budget": 1},
    "secondary": {"alpha_m": 1, "beta_per_m": 1, "psi": 1, "budget": 1}
  })";
}

}  // namespace

TEST_CASE("parse_scenario maps fields directly") {
  const GridScenario s = parse_scenario(minimal_doc());
  CHECK(s.rows == 3);
  CHECK(s.cols == 3);
  CHECK(s.cell_size == 1.0);
  CHECK(s.entrances == std::set<CellIndex>{1});
  REQUIRE(s.targets.size() == 1);
  CHECK(s.targets[0].cell == 9);
  CHECK(s.targets[0].zeta == 10.0);
  CHECK(s.gamma.at({1, 9}) == 1.0);
  CHECK(s.theta1 == 0.9);
  CHECK(s.primary.radius_alpha == 1.0);
}

TEST_CASE("parse_scenario rejects schema violations") {
  SUBCASE("missing theta1") {
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"theta1\""), 8, "\"thetaX\"");
    CHECK_THROWS_WITH_AS(parse_scenario(doc),
                         doctest::Contains("theta1"), ParseError);
  }
  SUBCASE("unknown field") {
    std::string doc = minimal_doc();
    doc.insert(doc.rfind('}'), ", \"bogus\": 1");
    CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("bogus"), ParseError);
  }
  SUBCASE("zero blocked index") {
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"blocked\": []"), 13, "\"blocked\": [0]");
    CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("out of range"),
                         ParseError);
  }
  SUBCASE("type mismatch") {
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"rows\": 3"), 9, "\"rows\": \"x\"");
    CHECK_THROWS_AS(parse_scenario(doc), ParseError);
  }
}

TEST_CASE("scenario round-trips through serialize") {
  const GridScenario s = parse_scenario(minimal_doc());
  const GridScenario s2 = parse_scenario(serialize_scenario(s));
  CHECK(serialize_scenario(s) == serialize_scenario(s2));
  CHECK(s2.gamma == s.gamma);
  CHECK(s2.blocked == s.blocked);
  CHECK(s2.theta2 == s.theta2);
}

TEST_CASE("cell_center positions") {
  GridScenario s;
  s.rows = 3;
  s.cols = 3;
  s.cell_size = 1.0;
  CHECK(cell_center(s, 1) == Eigen::Vector2d(0.5, 0.5));
  CHECK(cell_center(s, 5) == Eigen::Vector2d(1.5, 1.5));
  s.rows = 2;
  s.cols = 4;
  s.cell_size = 2.0;
  CHECK(cell_center(s, 6) == Eigen::Vector2d(3.0, 3.0));
  CHECK_THROWS_AS(cell_center(s, 0), std::out_of_range);
  CHECK_THROWS_AS(cell_center(s, 9), std::out_of_range);
}

TEST_CASE("cell_center is a bijection onto the lattice") {
  GridScenario s;
  s.rows = 4;
  s.cols = 5;
  s.cell_size = 0.5;
  std::set<std::pair<double, double>> seen;
  for (CellIndex j = 1; j <= s.cell_count(); ++j) {
    const Eigen::Vector2d p = cell_center(s, j);
    CHECK(seen.insert({p.x(), p.y()}).second);
  }
  CHECK(seen.size() == 20);
}

TEST_CASE("validate_scenario accepts a clean instance") {
  GridScenario s = parse_scenario(minimal_doc());
  s.gamma.clear();
  s.entrances = {1, 3};
  s.gamma[{1, 9}] = 0.5;
  s.gamma[{3, 9}] = 0.5;
  CHECK(validate_scenario(s).empty());
  // pure: same input, same report
  CHECK(validate_scenario(s) == validate_scenario(s));
}

TEST_CASE("validate_scenario flags gamma sum") {
  GridScenario s = parse_scenario(minimal_doc());
  s.gamma[{1, 9}] = 0.98;
  const auto report = validate_scenario(s);
  REQUIRE(report.size() == 1);
  CHECK(report[0] == "gamma sum 0.98 != 1");
}

TEST_CASE("validate_scenario flags unreachable gamma-positive pair") {
  GridScenario s = parse_scenario(minimal_doc());
  // wall off target cell 9 (neighbors 5, 6, 8)
  s.blocked = {5, 6, 8};
  s.gamma[{1, 9}] = 1.0;
  const auto report = validate_scenario(s);
  REQUIRE(report.size() == 1);
  CHECK(report[0] == "unreachable pair (1,9) with gamma > 0");
  CHECK_FALSE(detopt::testing::bfs_reachable(s, 1, 9));
}

TEST_CASE("validate_scenario flags parameter violations") {
  GridScenario s = parse_scenario(minimal_doc());
  s.theta1 = 0.4;
  s.theta2 = 0.6;  // theta2 > theta1
  s.blocked = {1};  // entrance blocked
  const auto report = validate_scenario(s);
  CHECK(report.size() >= 2);
}

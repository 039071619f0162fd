#include "detopt/pathing.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace detopt;
using namespace detopt::testing;

namespace {

GridScenario make_grid(int rows, int cols, std::set<CellIndex> blocked = {}) {
  GridScenario s;
  s.rows = rows;
  s.cols = cols;
  s.cell_size = 1.0;
  s.blocked = std::move(blocked);
  return s;
}

}  // namespace

TEST_CASE("straight corridor path") {
  const GridScenario s = make_grid(1, 5);
  const ThreatPath p = shortest_path(s, 1, 5);
  CHECK(p.cells == std::vector<CellIndex>{1, 2, 3, 4, 5});
  CHECK(p.total_length == doctest::Approx(4.0));
}

TEST_CASE("blocked center forces a detour") {
  const GridScenario s = make_grid(3, 3, {5});
  const ThreatPath p = shortest_path(s, 4, 6);
  CHECK(p.total_length == doctest::Approx(4.0));
  for (CellIndex c : p.cells) CHECK(c != 5);
  // matches the independent relaxation oracle
  CHECK(*bellman_ford_distance(s, 4, 6) == doctest::Approx(4.0));
}

TEST_CASE("diagonal walk uses sqrt2 steps") {
  const GridScenario s = make_grid(3, 3);
  const ThreatPath p = shortest_path(s, 1, 9);
  CHECK(p.total_length == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(p.cells.size() == 3);
}

TEST_CASE("corner cutting is forbidden") {
  // 2x2 grid with an anti-diagonal blocker: 1 -> 4 must go around, but
  // both side cells blocked leaves no path.
  const GridScenario s = make_grid(2, 2, {2, 3});
  CHECK_THROWS_AS(shortest_path(s, 1, 4), NoPathError);
}

TEST_CASE("path segments are 8-neighbor moves avoiding blocked cells") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const GridScenario s = random_scenario(1000 + trial, 7);
    for (const auto& [key, g] : s.gamma) {
      if (g <= 0) continue;
      const ThreatPath p = shortest_path(s, key.first, key.second);
      std::set<CellIndex> seen;
      for (std::size_t i = 0; i < p.cells.size(); ++i) {
        CHECK_FALSE(s.is_blocked(p.cells[i]));
        CHECK(seen.insert(p.cells[i]).second);  // simple path
        if (i == 0) continue;
        const int dr = (p.cells[i] - 1) / s.cols - (p.cells[i - 1] - 1) / s.cols;
        const int dc = (p.cells[i] - 1) % s.cols - (p.cells[i - 1] - 1) % s.cols;
        CHECK(std::max(std::abs(dr), std::abs(dc)) == 1);
      }
    }
  }
}

TEST_CASE("path length equals the independent shortest distance") {
  for (int trial = 0; trial < 60; ++trial) {
    const GridScenario s = random_scenario(2000 + trial, 8);
    for (const auto& [key, g] : s.gamma) {
      if (g <= 0) continue;
      const ThreatPath p = shortest_path(s, key.first, key.second);
      const auto oracle = bellman_ford_distance(s, key.first, key.second);
      REQUIRE(oracle.has_value());
      CHECK(p.total_length == doctest::Approx(*oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("removing a blocked cell never lengthens the path") {
  for (int trial = 0; trial < 20; ++trial) {
    GridScenario s = random_scenario(3000 + trial, 7);
    if (s.blocked.empty()) continue;
    const PairKey key = s.gamma.begin()->first;
    const double before = shortest_path(s, key.first, key.second).total_length;
    s.blocked.erase(s.blocked.begin());
    const double after = shortest_path(s, key.first, key.second).total_length;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("truncate_path arc lengths") {
  GridScenario s = make_grid(1, 21);  // 20 m path
  const ThreatPath p = shortest_path(s, 1, 21);
  REQUIRE(p.total_length == doctest::Approx(20.0));

  SUBCASE("10 m buffer leaves a 10 m prefix") {
    const auto prefix = truncate_path(p, 10.0);
    CHECK(polyline_length(prefix) == doctest::Approx(10.0));
  }
  SUBCASE("zero buffer is the identity") {
    const auto prefix = truncate_path(p, 0.0);
    CHECK(prefix == p.polyline);
  }
  SUBCASE("buffer beyond the length empties the prefix") {
    const GridScenario s5 = make_grid(1, 5);
    const ThreatPath p4 = shortest_path(s5, 1, 5);
    CHECK(truncate_path(p4, 10.0).empty());
  }
  SUBCASE("cut point may fall inside a segment") {
    const auto prefix = truncate_path(p, 10.5);
    CHECK(polyline_length(prefix) == doctest::Approx(9.5));
    CHECK(prefix.back().x() == doctest::Approx(10.0));
  }
}

TEST_CASE("truncate_path length identity on random paths") {
  for (int trial = 0; trial < 30; ++trial) {
    const GridScenario s = random_scenario(4000 + trial, 7);
    const PairKey key = s.gamma.begin()->first;
    const ThreatPath p = shortest_path(s, key.first, key.second);
    std::mt19937_64 rng(trial);
    std::uniform_real_distribution<double> unif(0.0, p.total_length * 1.5);
    for (int k = 0; k < 10; ++k) {
      const double buffer = unif(rng);
      CHECK(polyline_length(truncate_path(p, buffer)) ==
            doctest::Approx(std::max(0.0, p.total_length - buffer)).epsilon(1e-10));
    }
  }
}

TEST_CASE("all_paths covers exactly the gamma-positive pairs") {
  GridScenario s = make_grid(3, 3);
  s.entrances = {1, 3};
  s.targets = {{9, 5.0}};
  s.gamma[{1, 9}] = 0.7;
  s.gamma[{3, 9}] = 0.3;
  auto paths = all_paths(s);
  CHECK(paths.size() == 2);
  s.gamma[{3, 9}] = 0.0;
  s.gamma[{1, 9}] = 1.0;
  paths = all_paths(s);
  CHECK(paths.size() == 1);
  CHECK(paths.count({1, 9}) == 1);
}

TEST_CASE("all_paths includes the blocked-center detour") {
  GridScenario s = make_grid(3, 3, {5});
  s.entrances = {4};
  s.targets = {{6, 1.0}};
  s.gamma[{4, 6}] = 1.0;
  const auto paths = all_paths(s);
  CHECK(paths.at({4, 6}).total_length == doctest::Approx(4.0));
}

TEST_CASE("shortest_path is deterministic across calls") {
  const GridScenario s = make_grid(3, 3, {5});
  const ThreatPath a = shortest_path(s, 4, 6);
  const ThreatPath b = shortest_path(s, 4, 6);
  CHECK(a.cells == b.cells);
}

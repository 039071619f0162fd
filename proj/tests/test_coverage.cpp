#include "detopt/coverage.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace detopt;
using namespace detopt::testing;

namespace {

GridScenario corridor5(double chi = 0.0) {
  GridScenario s;
  s.rows = 1;
  s.cols = 5;
  s.cell_size = 1.0;
  s.entrances = {1};
  s.targets = {{5, 10.0}};
  s.gamma[{1, 5}] = 1.0;
  s.speed_k = 1.0;
  s.response_time_chi = chi;
  s.theta1 = 0.9;
  s.theta2 = 0.6;
  s.primary = {1.5, 1.0, 1.0, 1.0};
  s.secondary = {1.5, 1.0, 1.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("segment_circle_chord basics") {
  using V = Eigen::Vector2d;
  CHECK(segment_circle_chord(V(-2, 0), V(2, 0), V(0, 0), 1.0) == doctest::Approx(2.0));
  CHECK(segment_circle_chord(V(0, 0), V(4, 0), V(2, 1), std::sqrt(2.0)) ==
        doctest::Approx(2.0));
  CHECK(segment_circle_chord(V(0, 0), V(1, 0), V(5, 5), 1.0) == 0.0);
  // tangent line contributes nothing
  CHECK(segment_circle_chord(V(-1, 1), V(1, 1), V(0, 0), 1.0) == doctest::Approx(0.0));
  // degenerate segment
  CHECK(segment_circle_chord(V(0, 0), V(0, 0), V(0, 0), 1.0) == 0.0);
  // fully inside
  CHECK(segment_circle_chord(V(-0.2, 0), V(0.2, 0), V(0, 0), 1.0) ==
        doctest::Approx(0.4));
}

TEST_CASE("path_exposure examples") {
  using V = Eigen::Vector2d;
  CHECK(path_exposure({}, V(0, 0), 1.0) == 0.0);
  CHECK(path_exposure({V(0, 0), V(10, 0)}, V(5, 0), 2.0) == doctest::Approx(4.0));
  const std::vector<V> ell{V(0, 0), V(2, 0), V(2, 2)};
  CHECK(path_exposure(ell, V(2, 0), 1.0) == doctest::Approx(2.0));
  CHECK(path_exposure(ell, V(2, 0), 1.0) ==
        doctest::Approx(sampled_exposure(ell, V(2, 0), 1.0)).epsilon(1e-3));
}

TEST_CASE("path_exposure matches step sampling on random configurations") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_real_distribution<double> rad(0.2, 2.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector2d> poly;
    const int npts = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < npts; ++i) poly.push_back({coord(rng), coord(rng)});
    const Eigen::Vector2d center(coord(rng), coord(rng));
    const double r = rad(rng);
    CHECK(std::abs(path_exposure(poly, center, r) -
                   sampled_exposure(poly, center, r)) < 1e-3);
  }
}

TEST_CASE("detection_prob") {
  CHECK(detection_prob(0.0, 7.0) == 0.0);
  CHECK(detection_prob(0.5, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(detection_prob(1.0, 0.0) == 0.0);
  CHECK(detection_prob(2.0, 1e6) < 1.0);
}

TEST_CASE("corridor coverage with and without timeliness truncation") {
  SUBCASE("full path exposure") {
    const GridScenario s = corridor5(0.0);
    const CoverageTable cov = build_coverage(s, all_paths(s));
    // detector on cell 3: disk [1, 4] on a path spanning [0.5, 4.5]
    CHECK(cov.rho_p(3, {1, 5}) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-9));
    CHECK(cov.rho_s(3, {1, 5}) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-9));
  }
  SUBCASE("2 m buffer drops late primary coverage") {
    const GridScenario s = corridor5(2.0);  // k*chi = 2 m, prefix [0.5, 2.5]
    const CoverageTable cov = build_coverage(s, all_paths(s));
    CHECK(cov.eligible_primary.at({1, 5}).count(5) == 0);
    CHECK(cov.eligible_secondary.at({1, 5}).count(5) == 1);
    // primary exposure for cell 3 now limited to the prefix: [1, 2.5]
    CHECK(cov.rho_p(3, {1, 5}) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-9));
  }
}

TEST_CASE("tiny radius yields empty candidate sets") {
  GridScenario s = corridor5(0.0);
  s.primary.radius_alpha = 1e-3;
  s.secondary.radius_alpha = 1e-3;
  // shift detectors off the path row so nothing is exposed
  s.rows = 2;
  s.cols = 5;
  const CoverageTable cov = build_coverage(s, all_paths(s));
  // only path-row cells can see the path with r = 1e-3... and exposure
  // within each own cell still counts; check the off-row cells instead
  for (CellIndex i : cov.candidates_primary) CHECK(i <= 5);
  for (CellIndex i : cov.candidates_secondary) CHECK(i <= 5);
}

TEST_CASE("coverage invariants on random scenarios") {
  for (int trial = 0; trial < 25; ++trial) {
    const GridScenario s = random_scenario(5000 + trial);
    const auto paths = all_paths(s);
    const CoverageTable cov = build_coverage(s, paths);

    for (const auto& [k, rho] : cov.rho_primary) {
      CHECK(rho > 0.0);
      CHECK(rho < 1.0);
      CHECK_FALSE(s.is_blocked(std::get<0>(k)));
    }
    for (CellIndex i : cov.candidates_primary) CHECK_FALSE(s.is_blocked(i));
    for (CellIndex i : cov.candidates_secondary) CHECK_FALSE(s.is_blocked(i));

    // growing alpha or beta never loses coverage
    GridScenario bigger = s;
    bigger.primary.radius_alpha *= 1.3;
    bigger.primary.rate_beta *= 1.5;
    const CoverageTable cov2 = build_coverage(bigger, all_paths(bigger));
    for (const auto& [k, rho] : cov.rho_primary)
      CHECK(cov2.rho_p(std::get<0>(k), {std::get<1>(k), std::get<2>(k)}) >=
            rho - 1e-12);
  }
}

TEST_CASE("primary eligibility nests in secondary when specs allow") {
  for (int trial = 0; trial < 15; ++trial) {
    GridScenario s = random_scenario(6000 + trial);
    s.response_time_chi = 0.0;                       // prefix == full path
    s.secondary.radius_alpha = s.primary.radius_alpha + 0.2;
    if (s.primary.rate_beta <= 0 || s.secondary.rate_beta <= 0) continue;
    const CoverageTable cov = build_coverage(s, all_paths(s));
    for (const auto& [key, np] : cov.eligible_primary) {
      const auto it = cov.eligible_secondary.find(key);
      REQUIRE(it != cov.eligible_secondary.end());
      for (CellIndex i : np) CHECK(it->second.count(i) == 1);
    }
  }
}

TEST_CASE("build_coverage is schedule independent") {
  const GridScenario s = random_scenario(7001);
  const auto paths = all_paths(s);
  const CoverageTable seq = build_coverage(s, paths, 1);
  const CoverageTable par = build_coverage(s, paths, 8);
  CHECK(seq.rho_primary == par.rho_primary);
  CHECK(seq.rho_secondary == par.rho_secondary);
  CHECK(seq.eligible_primary == par.eligible_primary);
  CHECK(seq.candidates_secondary == par.candidates_secondary);
}

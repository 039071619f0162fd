#pragma once

#include <Eigen/Core>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace detopt {

// 1-based, row-major cell index.
using CellIndex = int;
using PairKey = std::pair<CellIndex, CellIndex>;  // (entrance, target)

struct DetectorSpec {
  double radius_alpha = 1.0;   // effective detection radius [m]
  double rate_beta = 1.0;      // instantaneous detection rate [1/m]
  double unit_cost_psi = 1.0;  // purchasing cost per unit
  double budget = 0.0;         // total budget for this detector class
};

struct TargetCell {
  CellIndex cell = 0;
  double zeta = 0.0;  // expected casualties if the attack succeeds here
};

/// Full problem instance: grid geometry, cell classes, attack
/// distribution, detector specifications and behavioral parameters.
/// Immutable value type after construction.
struct GridScenario {
  int rows = 0;
  int cols = 0;
  double cell_size = 1.0;  // [m]
  std::set<CellIndex> blocked;
  std::set<CellIndex> entrances;
  std::vector<TargetCell> targets;
  std::map<PairKey, double> gamma;  // attack probability per (entrance, target)
  double speed_k = 1.0;             // attacker walking speed [m/s]
  double response_time_chi = 0.0;   // required response time [s]
  double theta1 = 0.0;              // neutralization success, both layers detect
  double theta2 = 0.0;              // neutralization success, secondary only
  DetectorSpec primary;
  DetectorSpec secondary;

  int cell_count() const { return rows * cols; }
  bool in_grid(CellIndex j) const { return j >= 1 && j <= cell_count(); }
  bool is_blocked(CellIndex j) const { return blocked.count(j) != 0; }
  bool is_target(CellIndex j) const {
    for (const auto& t : targets)
      if (t.cell == j) return true;
    return false;
  }
  double target_zeta(CellIndex j) const;
  double timeliness_buffer() const { return speed_k * response_time_chi; }

  // Sum of zeta_j * gamma_ej over all pairs; the no-detector objective.
  double total_weighted_casualties() const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Center of cell j in meters; cells numbered row-major starting at 1,
/// x grows with the column, y with the row.
Eigen::Vector2d cell_center(const GridScenario& s, CellIndex j);

/// Parse a scenario JSON document. Schema errors (unknown field, type
/// mismatch, missing field, non-positive index) throw ParseError;
/// semantic checks live in validate_scenario.
GridScenario parse_scenario(const std::string& text);

/// Inverse of parse_scenario; parse(serialize(s)) == s.
std::string serialize_scenario(const GridScenario& s);

/// One human-readable line per violated invariant; empty means valid.
using ValidationReport = std::vector<std::string>;

ValidationReport validate_scenario(const GridScenario& s);

}  // namespace detopt

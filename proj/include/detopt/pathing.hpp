#pragma once

#include "detopt/grid_model.hpp"

#include <Eigen/Core>

#include <map>
#include <vector>

namespace detopt {

/// Shortest entrance-to-target walk over unblocked cells, 8-connected
/// with corner cutting forbidden. The truncated prefix is what the
/// primary layer may use: detection there leaves the interdiction team
/// at least k*chi seconds of attacker travel.
struct ThreatPath {
  CellIndex entrance = 0;
  CellIndex target = 0;
  std::vector<CellIndex> cells;             // entrance first, target last
  std::vector<Eigen::Vector2d> polyline;    // cell centers
  double total_length = 0.0;                // [m]
  double truncated_length = 0.0;            // max(0, total_length - k*chi)
};

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double polyline_length(const std::vector<Eigen::Vector2d>& pts);

/// Dijkstra over the 8-connected grid; a diagonal step is allowed only
/// if both shared orthogonal neighbors are unblocked. Deterministic tie
/// handling: fixed neighbor order N, NE, E, SE, S, SW, W, NW and
/// comparisons on (distance, cell index). Throws NoPathError.
ThreatPath shortest_path(const GridScenario& s, CellIndex e, CellIndex j);

/// Prefix polyline of arc length max(0, total - buffer); the cut point
/// may fall inside a segment. buffer >= total yields an empty polyline.
std::vector<Eigen::Vector2d> truncate_path(const ThreatPath& p, double buffer);

/// One ThreatPath per (e, j) with gamma_ej > 0.
std::map<PairKey, ThreatPath> all_paths(const GridScenario& s);

}  // namespace detopt

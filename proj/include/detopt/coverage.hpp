#pragma once

#include "detopt/grid_model.hpp"
#include "detopt/pathing.hpp"

#include <map>
#include <set>
#include <tuple>

namespace detopt {

using RhoKey = std::tuple<CellIndex, CellIndex, CellIndex>;  // (cell, entrance, target)

/// Detection probabilities and eligibility per (candidate cell, path).
/// Primary probabilities are computed on the timeliness-truncated path
/// prefix, secondary on the full path. Only strictly positive entries
/// are stored; an absent key means rho = 0.
struct CoverageTable {
  std::map<RhoKey, double> rho_primary;
  std::map<RhoKey, double> rho_secondary;
  std::map<PairKey, std::set<CellIndex>> eligible_primary;    // N_e^p(j)
  std::map<PairKey, std::set<CellIndex>> eligible_secondary;  // N_e^s(j)
  std::set<CellIndex> candidates_primary;                     // P
  std::set<CellIndex> candidates_secondary;                   // S

  double rho_p(CellIndex i, const PairKey& ej) const;
  double rho_s(CellIndex i, const PairKey& ej) const;
};

/// Arc length of the part of segment [p0, p1] inside the closed disk.
/// Tangent contact and on-circle segments contribute 0.
double segment_circle_chord(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                            const Eigen::Vector2d& center, double radius);

/// Exposure length: total polyline arc length inside the disk.
double path_exposure(const std::vector<Eigen::Vector2d>& polyline,
                     const Eigen::Vector2d& center, double radius);

/// 1 - exp(-beta * exposure), in [0, 1).
double detection_prob(double beta, double exposure);

/// Builds the full table for every unblocked candidate cell and every
/// path. Exposures below 1e-9 m are dropped. Deterministic for any
/// thread count.
CoverageTable build_coverage(const GridScenario& s,
                             const std::map<PairKey, ThreatPath>& paths,
                             int threads = 1);

}  // namespace detopt

#pragma once

#include "detopt/coverage.hpp"
#include "detopt/grid_model.hpp"

#include <map>
#include <set>
#include <vector>

namespace detopt {

/// Binary placement decision: which cells host a primary (X) and which
/// a secondary (Y) detector.
struct Placement {
  std::set<CellIndex> primary;    // X, subset of P
  std::set<CellIndex> secondary;  // Y, subset of S

  bool operator==(const Placement&) const = default;
};

struct PairTerm {
  CellIndex entrance = 0;
  CellIndex target = 0;
  double miss_primary = 1.0;    // Q_p: whole primary layer misses
  double miss_secondary = 1.0;  // Q_s
  double success_factor = 1.0;  // attack success probability, in [1-theta1, 1]
  double casualty_term = 0.0;   // zeta * gamma * success_factor
};

struct ObjectiveBreakdown {
  std::vector<PairTerm> terms;
  double expected_casualties = 0.0;
  double paper_objective_value = 0.0;  // expected - (1-theta1) * sum zeta*gamma
};

/// Probability that every chosen detector misses: product of (1 - rho)
/// over chosen cells with a stored rho. Empty product is exactly 1;
/// otherwise computed in log space.
double miss_product(const std::map<CellIndex, double>& rho_row,
                    const std::set<CellIndex>& chosen);

/// Attack success probability given layer miss probabilities: both
/// layers detect -> neutralized with probability theta1, secondary only
/// -> theta2, secondary misses -> the attack succeeds (neutralization
/// starts only on a confirmation alarm).
double success_factor(double miss_p, double miss_s, double theta1, double theta2);

/// Exact event-tree objective for a placement. Throws
/// std::invalid_argument for cells outside P / S or a cell hosting both
/// detector types.
ObjectiveBreakdown expected_casualties(const GridScenario& s, const CoverageTable& cov,
                                       const Placement& pl);

/// The compact minimization form: differs from expected_casualties by
/// the placement-independent constant -(1-theta1) * sum zeta*gamma, so
/// both share the same minimizers.
double paper_objective(const GridScenario& s, const CoverageTable& cov, const Placement& pl);

}  // namespace detopt

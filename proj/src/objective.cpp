#include "detopt/objective.hpp"

#include <cmath>

namespace detopt {

double miss_product(const std::map<CellIndex, double>& rho_row,
                    const std::set<CellIndex>& chosen) {
  double log_sum = 0.0;
  bool any = false;
  for (CellIndex i : chosen) {
    auto it = rho_row.find(i);
    if (it == rho_row.end()) continue;
    log_sum += std::log1p(-it->second);
    any = true;
  }
  return any ? std::exp(log_sum) : 1.0;
}

double success_factor(double miss_p, double miss_s, double theta1, double theta2) {
  const double detect_p = 1.0 - miss_p;
  const double detect_s = 1.0 - miss_s;
  return 1.0 - theta1 * detect_p * detect_s - theta2 * miss_p * detect_s;
}

namespace {

void check_placement(const CoverageTable& cov, const Placement& pl) {
  for (CellIndex i : pl.primary)
    if (!cov.candidates_primary.count(i))
      throw std::invalid_argument("ineligible cell " + std::to_string(i) +
                                  " for a primary detector");
  for (CellIndex i : pl.secondary) {
    if (!cov.candidates_secondary.count(i))
      throw std::invalid_argument("ineligible cell " + std::to_string(i) +
                                  " for a secondary detector");
    if (pl.primary.count(i))
      throw std::invalid_argument("cell " + std::to_string(i) +
                                  " hosts both detector types");
  }
}

}  // namespace

ObjectiveBreakdown expected_casualties(const GridScenario& s, const CoverageTable& cov,
                                       const Placement& pl) {
  check_placement(cov, pl);

  ObjectiveBreakdown out;
  for (const auto& [key, g] : s.gamma) {
    if (g <= 0) continue;
    const auto [e, j] = key;
    PairTerm term;
    term.entrance = e;
    term.target = j;

    std::map<CellIndex, double> row_p, row_s;
    for (CellIndex i : pl.primary) {
      const double rho = cov.rho_p(i, key);
      if (rho > 0) row_p[i] = rho;
    }
    for (CellIndex i : pl.secondary) {
      const double rho = cov.rho_s(i, key);
      if (rho > 0) row_s[i] = rho;
    }
    term.miss_primary = miss_product(row_p, pl.primary);
    term.miss_secondary = miss_product(row_s, pl.secondary);
    term.success_factor =
        success_factor(term.miss_primary, term.miss_secondary, s.theta1, s.theta2);
    term.casualty_term = s.target_zeta(j) * g * term.success_factor;
    out.expected_casualties += term.casualty_term;
    out.terms.push_back(term);
  }
  out.paper_objective_value =
      out.expected_casualties - (1.0 - s.theta1) * s.total_weighted_casualties();
  return out;
}

double paper_objective(const GridScenario& s, const CoverageTable& cov,
                       const Placement& pl) {
  check_placement(cov, pl);

  const double dtheta = s.theta1 - s.theta2;
  double value = 0.0;
  for (const auto& [key, g] : s.gamma) {
    if (g <= 0) continue;
    std::map<CellIndex, double> row_p, row_s;
    for (CellIndex i : pl.primary) {
      const double rho = cov.rho_p(i, key);
      if (rho > 0) row_p[i] = rho;
    }
    for (CellIndex i : pl.secondary) {
      const double rho = cov.rho_s(i, key);
      if (rho > 0) row_s[i] = rho;
    }
    const double qp = miss_product(row_p, pl.primary);
    const double qs = miss_product(row_s, pl.secondary);
    value += s.target_zeta(key.second) * g *
             (dtheta * qp + s.theta1 * qs - dtheta * qp * qs);
  }
  return value;
}

}  // namespace detopt

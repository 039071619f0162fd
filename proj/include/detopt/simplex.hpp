#pragma once

#include <Eigen/Core>

#include <vector>

namespace detopt {

enum class RowSense { LE, GE, EQ };

/// Small dense LP: min c'x subject to linear rows and per-variable
/// finite box bounds.
struct LpModel {
  struct Row {
    RowSense sense;
    std::vector<std::pair<int, double>> coefs;
    double rhs;
  };

  std::vector<double> lower, upper, cost;
  std::vector<Row> rows;

  int add_var(double lb, double ub, double c) {
    lower.push_back(lb);
    upper.push_back(ub);
    cost.push_back(c);
    return static_cast<int>(lower.size()) - 1;
  }
  void add_row(RowSense sense, std::vector<std::pair<int, double>> coefs, double rhs) {
    rows.push_back({sense, std::move(coefs), rhs});
  }
  int num_vars() const { return static_cast<int>(lower.size()); }
};

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;  // in the model's original variable space
};

/// Two-phase dense tableau simplex. Deterministic: largest-coefficient
/// pricing with lowest-index ties, switching to Bland's rule on long
/// runs to rule out cycling. Tolerances 1e-9 on pivots, 1e-7 on
/// optimality.
LpSolution lp_solve(const LpModel& lp);

}  // namespace detopt

#include "detopt/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace detopt {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-7;
constexpr double kFeasTol = 1e-7;

struct Tableau {
  Eigen::MatrixXd a;        // m x ncols, kept as B^{-1} A
  Eigen::VectorXd b;        // m
  std::vector<int> basis;   // basic column per row

  void pivot(int row, int col) {
    const double p = a(row, col);
    a.row(row) /= p;
    b(row) /= p;
    for (int r = 0; r < a.rows(); ++r) {
      if (r == row) continue;
      const double f = a(r, col);
      if (f != 0.0) {
        a.row(r) -= f * a.row(row);
        b(r) -= f * b(row);
      }
    }
    basis[row] = col;
  }
};

// Minimizes cost over the tableau's feasible region. `allowed(col)`
// gates entering columns. Returns false on iteration blowup.
bool run_simplex(Tableau& t, const Eigen::VectorXd& cost,
                 const std::vector<char>& allowed) {
  const int m = static_cast<int>(t.a.rows());
  const int n = static_cast<int>(t.a.cols());

  // Reduced costs for the current basis.
  Eigen::VectorXd red = cost;
  for (int r = 0; r < m; ++r) {
    const double cb = cost(t.basis[r]);
    if (cb != 0.0) red -= cb * t.a.row(r).transpose();
  }

  const long max_iters = 50L * (m + n) + 1000;
  for (long iter = 0;; ++iter) {
    if (iter > max_iters) return false;
    const bool bland = iter > 10L * (m + n);

    int enter = -1;
    double best = -kOptTol;
    for (int c = 0; c < n; ++c) {
      if (!allowed[c]) continue;
      if (red(c) < best) {
        enter = c;
        best = red(c);
        if (bland) break;  // first improving index
      }
    }
    if (enter < 0) return true;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      const double arc = t.a(r, enter);
      if (arc > kPivotTol) {
        const double ratio = t.b(r) / arc;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leave >= 0 &&
             t.basis[r] < t.basis[leave])) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0)
      throw std::runtime_error("simplex: unbounded column (missing box bound)");

    const double f = red(enter);
    t.pivot(leave, enter);
    red -= f * t.a.row(leave).transpose();
    red(enter) = 0.0;
  }
}

}  // namespace

LpSolution lp_solve(const LpModel& lp) {
  const int nv = lp.num_vars();

  // Substitute fixed variables; shift the rest to lower bound zero.
  std::vector<int> compact(nv, -1);
  std::vector<double> shift(nv, 0.0);
  int nc = 0;
  double const_term = 0.0;
  for (int v = 0; v < nv; ++v) {
    if (!(std::isfinite(lp.lower[v]) && std::isfinite(lp.upper[v])))
      throw std::invalid_argument("lp_solve: all variables need finite bounds");
    if (lp.upper[v] < lp.lower[v] - 1e-12)
      return {LpStatus::Infeasible, 0.0, {}};
    shift[v] = lp.lower[v];
    const_term += lp.cost[v] * lp.lower[v];
    if (lp.upper[v] - lp.lower[v] > 1e-12) compact[v] = nc++;
  }

  struct CanonRow {
    std::vector<std::pair<int, double>> coefs;  // compact indices
    double rhs;
    RowSense sense;  // LE or EQ after canonicalization
  };
  std::vector<CanonRow> rows;
  for (const auto& row : lp.rows) {
    CanonRow cr;
    cr.rhs = row.rhs;
    cr.sense = row.sense;
    for (auto [v, coef] : row.coefs) {
      cr.rhs -= coef * shift[v];
      if (compact[v] >= 0) cr.coefs.push_back({compact[v], coef});
    }
    if (cr.sense == RowSense::GE) {
      cr.rhs = -cr.rhs;
      for (auto& [v, coef] : cr.coefs) coef = -coef;
      cr.sense = RowSense::LE;
    }
    if (cr.coefs.empty()) {
      const bool ok = cr.sense == RowSense::LE ? cr.rhs >= -kFeasTol
                                               : std::abs(cr.rhs) <= kFeasTol;
      if (!ok) return {LpStatus::Infeasible, 0.0, {}};
      continue;
    }
    rows.push_back(std::move(cr));
  }
  // Box upper bounds as rows.
  for (int v = 0; v < nv; ++v)
    if (compact[v] >= 0)
      rows.push_back({{{compact[v], 1.0}}, lp.upper[v] - lp.lower[v], RowSense::LE});

  const int m = static_cast<int>(rows.size());
  if (nc == 0) {
    LpSolution sol{LpStatus::Optimal, const_term, Eigen::VectorXd(nv)};
    for (int v = 0; v < nv; ++v) sol.x(v) = shift[v];
    return sol;
  }

  // Columns: structural | slacks | artificials.
  int nslack = 0, nart = 0;
  for (const auto& r : rows) {
    if (r.sense == RowSense::LE) ++nslack;
  }
  // Artificial needed for EQ rows and LE rows with negative rhs.
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  int ncols = nc;
  for (int r = 0; r < m; ++r)
    if (rows[r].sense == RowSense::LE) slack_col[r] = ncols++;
  const int art_base = ncols;
  for (int r = 0; r < m; ++r) {
    const bool neg = rows[r].rhs < 0;
    if (rows[r].sense == RowSense::EQ || neg) art_col[r] = ncols++;
  }
  nart = ncols - art_base;

  Tableau t;
  t.a = Eigen::MatrixXd::Zero(m, ncols);
  t.b = Eigen::VectorXd::Zero(m);
  t.basis.assign(m, -1);
  for (int r = 0; r < m; ++r) {
    const double sign = rows[r].rhs < 0 ? -1.0 : 1.0;
    for (auto [v, coef] : rows[r].coefs) t.a(r, v) = sign * coef;
    if (slack_col[r] >= 0) t.a(r, slack_col[r]) = sign;
    t.b(r) = sign * rows[r].rhs;
    if (art_col[r] >= 0) {
      t.a(r, art_col[r]) = 1.0;
      t.basis[r] = art_col[r];
    } else {
      t.basis[r] = slack_col[r];
    }
  }

  std::vector<char> allowed(ncols, 1);
  if (nart > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
    for (int c = art_base; c < ncols; ++c) phase1(c) = 1.0;
    if (!run_simplex(t, phase1, allowed)) return {LpStatus::IterationLimit, 0.0, {}};
    double infeas = 0.0;
    for (int r = 0; r < m; ++r)
      if (t.basis[r] >= art_base) infeas += t.b(r);
    if (infeas > kFeasTol) return {LpStatus::Infeasible, 0.0, {}};

    // Pivot leftover artificials out; drop redundant rows.
    std::vector<int> keep;
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] < art_base) {
        keep.push_back(r);
        continue;
      }
      int col = -1;
      for (int c = 0; c < art_base; ++c)
        if (std::abs(t.a(r, c)) > kPivotTol) {
          col = c;
          break;
        }
      if (col >= 0) {
        t.pivot(r, col);
        keep.push_back(r);
      }
      // else: redundant row, dropped below
    }
    if (static_cast<int>(keep.size()) < m) {
      Eigen::MatrixXd a2(keep.size(), ncols);
      Eigen::VectorXd b2(keep.size());
      std::vector<int> basis2;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        a2.row(i) = t.a.row(keep[i]);
        b2(i) = t.b(keep[i]);
        basis2.push_back(t.basis[keep[i]]);
      }
      t.a = std::move(a2);
      t.b = std::move(b2);
      t.basis = std::move(basis2);
    }
    for (int c = art_base; c < ncols; ++c) allowed[c] = 0;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ncols);
  for (int v = 0; v < nv; ++v)
    if (compact[v] >= 0) phase2(compact[v]) = lp.cost[v];
  if (!run_simplex(t, phase2, allowed)) return {LpStatus::IterationLimit, 0.0, {}};

  Eigen::VectorXd xc = Eigen::VectorXd::Zero(ncols);
  for (std::size_t r = 0; r < t.basis.size(); ++r) xc(t.basis[r]) = t.b(r);

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.x = Eigen::VectorXd(nv);
  for (int v = 0; v < nv; ++v)
    sol.x(v) = shift[v] + (compact[v] >= 0 ? xc(compact[v]) : 0.0);
  sol.value = const_term;
  for (int v = 0; v < nv; ++v)
    if (compact[v] >= 0) sol.value += lp.cost[v] * xc(compact[v]);
  return sol;
}

}  // namespace detopt

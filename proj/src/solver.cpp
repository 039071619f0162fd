#include "detopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace detopt {

const char* to_string(SolveStatus st) {
  switch (st) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::GapReached: return "GapReached";
    case SolveStatus::NodeLimit: return "NodeLimit";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

namespace {

int budget_count(const DetectorSpec& d) {
  if (d.unit_cost_psi <= 0) return 0;
  return static_cast<int>(std::floor(d.budget / d.unit_cost_psi + 1e-9));
}

double success(double qp, double qs, double t1, double t2) {
  return 1.0 - t1 * (1.0 - qp) * (1.0 - qs) - t2 * qp * (1.0 - qs);
}

}  // namespace

ModelContext compile_model(const GridScenario& s, const CoverageTable& cov) {
  ModelContext ctx;
  ctx.p_cells.assign(cov.candidates_primary.begin(), cov.candidates_primary.end());
  ctx.s_cells.assign(cov.candidates_secondary.begin(), cov.candidates_secondary.end());
  ctx.theta1 = s.theta1;
  ctx.theta2 = s.theta2;
  ctx.primary = s.primary;
  ctx.secondary = s.secondary;
  ctx.max_primary = budget_count(s.primary);
  ctx.max_secondary = budget_count(s.secondary);

  std::map<CellIndex, int> p_index, s_index;
  for (std::size_t i = 0; i < ctx.p_cells.size(); ++i) p_index[ctx.p_cells[i]] = i;
  for (std::size_t i = 0; i < ctx.s_cells.size(); ++i) s_index[ctx.s_cells[i]] = i;
  for (const auto& [cell, pi] : p_index) {
    auto it = s_index.find(cell);
    if (it != s_index.end()) ctx.overlap.push_back({pi, it->second});
  }

  for (const auto& [key, g] : s.gamma) {
    if (g <= 0) continue;
    ModelContext::Pair pair;
    pair.key = key;
    pair.zeta_gamma = g * s.target_zeta(key.second);
    auto ep = cov.eligible_primary.find(key);
    if (ep != cov.eligible_primary.end())
      for (CellIndex i : ep->second)
        pair.log_miss_p.push_back({p_index.at(i), std::log1p(-cov.rho_p(i, key))});
    auto es = cov.eligible_secondary.find(key);
    if (es != cov.eligible_secondary.end())
      for (CellIndex i : es->second)
        pair.log_miss_s.push_back({s_index.at(i), std::log1p(-cov.rho_s(i, key))});
    ctx.pairs.push_back(std::move(pair));
  }
  return ctx;
}

double ModelContext::exact_objective(const std::vector<char>& x,
                                     const std::vector<char>& y) const {
  double total = 0.0;
  for (const auto& pair : pairs) {
    double wsum = 0.0, vsum = 0.0;
    for (auto [i, l] : pair.log_miss_p)
      if (x[i]) wsum += l;
    for (auto [i, l] : pair.log_miss_s)
      if (y[i]) vsum += l;
    total += pair.zeta_gamma * success(std::exp(wsum), std::exp(vsum), theta1, theta2);
  }
  return total;
}

RelaxationLp build_relaxation(const ModelContext& ctx, const RelaxationNode& node,
                              const SolveOptions& opts) {
  const int np = static_cast<int>(ctx.p_cells.size());
  const int ns = static_cast<int>(ctx.s_cells.size());
  const double dtheta = ctx.theta1 - ctx.theta2;

  RelaxationLp out;
  LpModel& lp = out.lp;
  // Constant part of the expected-casualty objective, carried as a
  // fixed variable so LP values are directly comparable to exact ones.
  double total_zg = 0.0;
  for (const auto& pair : ctx.pairs) total_zg += pair.zeta_gamma;
  lp.add_var(1.0, 1.0, (1.0 - ctx.theta1) * total_zg);
  for (int i = 0; i < np; ++i) {
    const signed char f = node.fix[i];
    out.x_var.push_back(lp.add_var(f == 1 ? 1.0 : 0.0, f == 0 ? 0.0 : 1.0, 0.0));
  }
  for (int i = 0; i < ns; ++i) {
    const signed char f = node.fix[np + i];
    out.y_var.push_back(lp.add_var(f == 1 ? 1.0 : 0.0, f == 0 ? 0.0 : 1.0, 0.0));
  }

  const int tangents = std::max(2, opts.tangent_points);
  const int parts = std::max(1, opts.mccormick_partitions);

  // Remaining units per class under this node's fixings; the log-miss lower
  // bounds only need to admit placements the budget can actually afford,
  // which keeps the exponential tangent slopes well away from underflow.
  int fixed_p = 0, fixed_s = 0;
  for (int i = 0; i < np; ++i) fixed_p += node.fix[i] == 1;
  for (int i = 0; i < ns; ++i) fixed_s += node.fix[np + i] == 1;
  const int free_p = std::max(0, ctx.max_primary - fixed_p);
  const int free_s = std::max(0, ctx.max_secondary - fixed_s);

  for (const auto& pair : ctx.pairs) {
    // Reachable range of the layer log-miss sums under this node's fixings:
    // fixed-on terms always count, then the k most negative free terms.
    double wmin = 0.0, wmax = 0.0, vmin = 0.0, vmax = 0.0;
    std::vector<double> free_logs;
    for (auto [i, l] : pair.log_miss_p) {
      if (node.fix[i] == 1) {
        wmax += l;
        wmin += l;
      } else if (node.fix[i] != 0) {
        free_logs.push_back(l);
      }
    }
    std::sort(free_logs.begin(), free_logs.end());
    for (int t = 0; t < free_p && t < static_cast<int>(free_logs.size()); ++t)
      wmin += free_logs[t];
    free_logs.clear();
    for (auto [i, l] : pair.log_miss_s) {
      if (node.fix[np + i] == 1) {
        vmax += l;
        vmin += l;
      } else if (node.fix[np + i] != 0) {
        free_logs.push_back(l);
      }
    }
    std::sort(free_logs.begin(), free_logs.end());
    for (int t = 0; t < free_s && t < static_cast<int>(free_logs.size()); ++t)
      vmin += free_logs[t];
    const double ulo = std::exp(wmin), uhi = std::exp(wmax);
    const double zlo = std::exp(vmin), zhi = std::exp(vmax);

    const int w_var = lp.add_var(wmin, wmax, 0.0);
    const int v_var = lp.add_var(vmin, vmax, 0.0);
    const int u_var = lp.add_var(ulo, uhi, dtheta * pair.zeta_gamma);
    const int z_var = lp.add_var(zlo, zhi, ctx.theta1 * pair.zeta_gamma);
    const int p_var = lp.add_var(ulo * zlo, uhi * zhi, -dtheta * pair.zeta_gamma);

    std::vector<std::pair<int, double>> wrow{{w_var, 1.0}};
    for (auto [i, l] : pair.log_miss_p) wrow.push_back({out.x_var[i], -l});
    lp.add_row(RowSense::EQ, std::move(wrow), 0.0);
    std::vector<std::pair<int, double>> vrow{{v_var, 1.0}};
    for (auto [i, l] : pair.log_miss_s) vrow.push_back({out.y_var[i], -l});
    lp.add_row(RowSense::EQ, std::move(vrow), 0.0);

    // Tangent underestimators of the convex exponential: valid because
    // u and z carry nonnegative objective coefficients.
    auto add_tangents = [&lp, tangents](int exp_var, int log_var, double lo, double hi) {
      // Any tangent of the convex exponential underestimates it everywhere,
      // so restricting the touch points to where the slope stays above the
      // pivot tolerance loses nothing but degenerate cuts.
      lo = std::max(lo, hi - 18.0);
      const int k = hi - lo > 1e-12 ? tangents : 1;
      for (int t = 0; t < k; ++t) {
        const double at = k == 1 ? lo : lo + t * (hi - lo) / (k - 1);
        const double slope = std::exp(at);
        lp.add_row(RowSense::GE, {{exp_var, 1.0}, {log_var, -slope}},
                   slope * (1.0 - at));
      }
    };
    add_tangents(u_var, w_var, wmin, wmax);
    add_tangents(z_var, v_var, vmin, vmax);

    // Piecewise McCormick upper envelope on p = u*z over a partition of
    // the u range, segment selectors relaxed to [0, 1].
    const int nparts = uhi - ulo > 1e-12 ? parts : 1;
    std::vector<std::pair<int, double>> usum{{u_var, 1.0}};
    std::vector<std::pair<int, double>> zsum{{z_var, 1.0}};
    std::vector<std::pair<int, double>> lamsum;
    std::vector<std::pair<int, double>> env1{{p_var, 1.0}};
    std::vector<std::pair<int, double>> env2{{p_var, 1.0}};
    for (int t = 0; t < nparts; ++t) {
      const double a = ulo + t * (uhi - ulo) / nparts;
      const double b = ulo + (t + 1) * (uhi - ulo) / nparts;
      const int ut = lp.add_var(0.0, uhi, 0.0);
      const int zt = lp.add_var(0.0, zhi, 0.0);
      const int lam = lp.add_var(0.0, 1.0, 0.0);
      usum.push_back({ut, -1.0});
      zsum.push_back({zt, -1.0});
      lamsum.push_back({lam, 1.0});
      lp.add_row(RowSense::GE, {{ut, 1.0}, {lam, -a}}, 0.0);
      lp.add_row(RowSense::LE, {{ut, 1.0}, {lam, -b}}, 0.0);
      lp.add_row(RowSense::GE, {{zt, 1.0}, {lam, -zlo}}, 0.0);
      lp.add_row(RowSense::LE, {{zt, 1.0}, {lam, -zhi}}, 0.0);
      // p <= sum_t [b_t z_t + zlo u_t - b_t zlo lam_t]  (and the a_t/zhi mate)
      env1.push_back({zt, -b});
      env1.push_back({ut, -zlo});
      env1.push_back({lam, b * zlo});
      env2.push_back({zt, -a});
      env2.push_back({ut, -zhi});
      env2.push_back({lam, a * zhi});
    }
    lp.add_row(RowSense::EQ, std::move(usum), 0.0);
    lp.add_row(RowSense::EQ, std::move(zsum), 0.0);
    lp.add_row(RowSense::EQ, std::move(lamsum), 1.0);
    lp.add_row(RowSense::LE, std::move(env1), 0.0);
    lp.add_row(RowSense::LE, std::move(env2), 0.0);
  }

  // Budgets as unit counts (uniform unit cost per class), exclusion and
  // secondary-linking rows.
  std::vector<std::pair<int, double>> prow, srow;
  for (int v : out.x_var) prow.push_back({v, 1.0});
  for (int v : out.y_var) srow.push_back({v, 1.0});
  if (!prow.empty())
    lp.add_row(RowSense::LE, prow, static_cast<double>(ctx.max_primary));
  if (!srow.empty())
    lp.add_row(RowSense::LE, srow, static_cast<double>(ctx.max_secondary));
  for (auto [pi, si] : ctx.overlap)
    lp.add_row(RowSense::LE, {{out.x_var[pi], 1.0}, {out.y_var[si], 1.0}}, 1.0);
  for (int si = 0; si < ns; ++si) {
    std::vector<std::pair<int, double>> link{{out.y_var[si], 1.0}};
    for (int v : out.x_var) link.push_back({v, -1.0});
    lp.add_row(RowSense::LE, std::move(link), 0.0);
  }
  return out;
}

std::optional<int> select_branch_var(const ModelContext& ctx, const RelaxationLp& rlp,
                                     const Eigen::VectorXd& x) {
  const int nv = ctx.num_vars();
  int best = -1;
  double best_score = 1.0;
  for (int v = 0; v < nv; ++v) {
    const int col =
        v < static_cast<int>(rlp.x_var.size()) ? rlp.x_var[v]
                                               : rlp.y_var[v - rlp.x_var.size()];
    const double val = x(col);
    if (std::abs(val - std::round(val)) <= 1e-6) continue;
    const double score = std::abs(val - 0.5);
    if (score < best_score - 1e-12) {
      best = v;
      best_score = score;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

std::pair<RelaxationNode, RelaxationNode> branch(const RelaxationNode& node, int var) {
  RelaxationNode lo = node, hi = node;
  lo.fix[var] = 0;
  hi.fix[var] = 1;
  return {std::move(lo), std::move(hi)};
}

namespace {

Placement to_placement(const ModelContext& ctx, const std::vector<char>& x,
                       const std::vector<char>& y) {
  Placement pl;
  for (std::size_t i = 0; i < ctx.p_cells.size(); ++i)
    if (x[i]) pl.primary.insert(ctx.p_cells[i]);
  for (std::size_t i = 0; i < ctx.s_cells.size(); ++i)
    if (y[i]) pl.secondary.insert(ctx.s_cells[i]);
  return pl;
}

bool lex_less(const Placement& a, const Placement& b) {
  if (a.primary != b.primary)
    return std::lexicographical_compare(a.primary.begin(), a.primary.end(),
                                        b.primary.begin(), b.primary.end());
  return std::lexicographical_compare(a.secondary.begin(), a.secondary.end(),
                                      b.secondary.begin(), b.secondary.end());
}

struct Incumbent {
  double objective = std::numeric_limits<double>::infinity();
  Placement placement;

  void offer(double obj, Placement pl) {
    if (obj < objective || (obj == objective && lex_less(pl, placement))) {
      objective = obj;
      placement = std::move(pl);
    }
  }
};

// Constraint-feasibility of a candidate 0/1 assignment.
bool feasible(const ModelContext& ctx, const std::vector<char>& x,
              const std::vector<char>& y) {
  int cx = 0, cy = 0;
  for (char b : x) cx += b;
  for (char b : y) cy += b;
  if (cx > ctx.max_primary || cy > ctx.max_secondary) return false;
  if (cy > 0 && cx == 0) return false;
  for (auto [pi, si] : ctx.overlap)
    if (x[pi] && y[si]) return false;
  return true;
}

// Lower bound from interval reasoning alone: every free detector on,
// budgets ignored. Used when the LP solver gives up.
double interval_bound(const ModelContext& ctx, const RelaxationNode& node) {
  const int np = static_cast<int>(ctx.p_cells.size());
  double total = 0.0;
  for (const auto& pair : ctx.pairs) {
    double wmin = 0.0, vmin = 0.0;
    for (auto [i, l] : pair.log_miss_p)
      if (node.fix[i] != 0) wmin += l;
    for (auto [i, l] : pair.log_miss_s)
      if (node.fix[np + i] != 0) vmin += l;
    total += pair.zeta_gamma *
             success(std::exp(wmin), std::exp(vmin), ctx.theta1, ctx.theta2);
  }
  return total;
}

// Deterministic greedy warm start: repeatedly add the single detector
// with the best exact improvement.
void greedy_incumbent(const ModelContext& ctx, Incumbent& inc) {
  const int np = static_cast<int>(ctx.p_cells.size());
  const int ns = static_cast<int>(ctx.s_cells.size());
  std::vector<char> x(np, 0), y(ns, 0);
  double current = ctx.exact_objective(x, y);
  inc.offer(current, to_placement(ctx, x, y));

  while (true) {
    double best = current;
    int best_var = -1;
    for (int v = 0; v < np + ns; ++v) {
      std::vector<char>& vec = v < np ? x : y;
      const int i = v < np ? v : v - np;
      if (vec[i]) continue;
      vec[i] = 1;
      if (feasible(ctx, x, y)) {
        const double obj = ctx.exact_objective(x, y);
        if (obj < best - 1e-12) {
          best = obj;
          best_var = v;
        }
      }
      vec[i] = 0;
    }
    if (best_var < 0) break;
    (best_var < np ? x[best_var] : y[best_var - np]) = 1;
    current = best;
    inc.offer(current, to_placement(ctx, x, y));
  }
}

}  // namespace

SolveResult enumerate_optimal(const GridScenario& s, const CoverageTable& cov) {
  const ModelContext ctx = compile_model(s, cov);
  const int np = static_cast<int>(ctx.p_cells.size());
  const int ns = static_cast<int>(ctx.s_cells.size());
  if (np + ns > 24)
    throw InstanceTooLarge("enumerate_optimal: |P| + |S| = " +
                           std::to_string(np + ns) + " exceeds 24");

  // All subsets within the budget count, in lexicographic cell order.
  auto subsets = [](int n, int max_count) {
    std::vector<std::vector<char>> out;
    std::vector<char> cur(n, 0);
    std::vector<int> stack;
    out.push_back(cur);
    auto rec = [&](auto&& self, int start, int depth) -> void {
      if (depth >= max_count) return;
      for (int i = start; i < n; ++i) {
        cur[i] = 1;
        out.push_back(cur);
        self(self, i + 1, depth + 1);
        cur[i] = 0;
      }
    };
    rec(rec, 0, 0);
    return out;
  };

  const auto xs = subsets(np, ctx.max_primary);
  const auto ys = subsets(ns, ctx.max_secondary);

  Incumbent inc;
  std::int64_t evaluated = 0;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      if (!feasible(ctx, x, y)) continue;
      ++evaluated;
      inc.offer(ctx.exact_objective(x, y), to_placement(ctx, x, y));
    }
  }

  SolveResult res;
  res.placement = inc.placement;
  res.objective = inc.objective;
  res.lower_bound = inc.objective;
  res.relative_gap = 0.0;
  res.nodes_explored = evaluated;
  res.status = SolveStatus::Optimal;
  return res;
}

SolveResult solve_bnb(const GridScenario& s, const CoverageTable& cov,
                      const SolveOptions& opts) {
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&start_time] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
        .count();
  };

  const ModelContext ctx = compile_model(s, cov);
  const int nv = ctx.num_vars();
  const int np = static_cast<int>(ctx.p_cells.size());

  Incumbent inc;
  greedy_incumbent(ctx, inc);

  SolveResult res;
  res.nodes_explored = 0;

  auto scale = [](double v) { return std::max(std::abs(v), 1e-12); };
  auto finish = [&](SolveStatus st, double global_lb) {
    res.placement = inc.placement;
    res.objective = inc.objective;
    res.lower_bound = std::min(global_lb, inc.objective);
    res.relative_gap = (res.objective - res.lower_bound) / scale(res.objective);
    res.status = st;
    return res;
  };

  if (nv == 0) return finish(SolveStatus::Optimal, inc.objective);

  struct QueueNode {
    double bound;
    std::int64_t seq;
    int depth;
    RelaxationNode node;
    bool operator>(const QueueNode& o) const {
      return bound > o.bound || (bound == o.bound && seq > o.seq);
    }
  };
  std::priority_queue<QueueNode, std::vector<QueueNode>, std::greater<>> queue;

  RelaxationNode root;
  root.fix.assign(nv, -1);
  root.bound = -std::numeric_limits<double>::infinity();
  std::int64_t seq = 0;
  queue.push({root.bound, seq++, 0, std::move(root)});

  const double gap_tol = opts.gap_tolerance;
  auto closed = [&](double bound) {
    return (inc.objective - bound) <= gap_tol * scale(inc.objective);
  };

  auto record_node = [&](const RelaxationNode& node, double bound) {
    if (res.sampled_nodes.size() >= opts.node_sample_limit) return;
    NodeRecord rec;
    rec.bound = bound;
    for (int v = 0; v < nv; ++v) {
      if (node.fix[v] < 0) continue;
      if (v < np)
        rec.fixed_primary.push_back({ctx.p_cells[v], node.fix[v] == 1});
      else
        rec.fixed_secondary.push_back({ctx.s_cells[v - np], node.fix[v] == 1});
    }
    res.sampled_nodes.push_back(std::move(rec));
  };

  auto trace = [&](std::int64_t id, int depth, double bound, const char* what) {
    if (opts.trace)
      *opts.trace << "node " << id << " depth " << depth << " bound " << bound << " "
                  << what << "\n";
  };

  while (!queue.empty()) {
    const double global_lb = queue.top().bound;
    if (closed(global_lb)) {
      // Everything left is within tolerance of the incumbent.
      const bool exact = queue.top().bound >= inc.objective;
      return finish(exact ? SolveStatus::Optimal : SolveStatus::GapReached, global_lb);
    }
    if (res.nodes_explored >= opts.node_limit)
      return finish(SolveStatus::NodeLimit, global_lb);
    if (opts.time_limit_s && elapsed() > *opts.time_limit_s)
      return finish(SolveStatus::TimeLimit, global_lb);

    QueueNode qn = queue.top();
    queue.pop();
    ++res.nodes_explored;
    const std::int64_t id = res.nodes_explored;

    RelaxationLp rlp = build_relaxation(ctx, qn.node, opts);
    const LpSolution sol = lp_solve(rlp.lp);
    if (sol.status == LpStatus::Infeasible) {
      trace(id, qn.depth, qn.bound, "infeasible");
      continue;
    }

    double bound;
    if (sol.status == LpStatus::Optimal) {
      // Small safety margin absorbs the simplex optimality tolerance.
      bound = sol.value - 1e-7 * (1.0 + std::abs(sol.value));
    } else {
      bound = interval_bound(ctx, qn.node);
    }
    bound = std::max(bound, qn.bound);  // child bounds never regress
    record_node(qn.node, bound);

    if (closed(bound)) {
      trace(id, qn.depth, bound, "pruned");
      continue;
    }

    std::optional<int> frac;
    if (sol.status == LpStatus::Optimal) {
      frac = select_branch_var(ctx, rlp, sol.x);
      if (!frac) {
        // Integral relaxation: evaluate the candidate exactly.
        std::vector<char> x(np, 0), y(nv - np, 0);
        for (int v = 0; v < np; ++v) x[v] = sol.x(rlp.x_var[v]) > 0.5;
        for (int v = np; v < nv; ++v) y[v - np] = sol.x(rlp.y_var[v - np]) > 0.5;
        if (feasible(ctx, x, y))
          inc.offer(ctx.exact_objective(x, y), to_placement(ctx, x, y));
        if (closed(bound)) {
          trace(id, qn.depth, bound, "integral");
          continue;
        }
        // The LP underestimates even at integer points, so the subtree
        // may still hide a better completion: branch on any free var.
        for (int v = 0; v < nv && !frac; ++v)
          if (qn.node.fix[v] < 0) frac = v;
        if (!frac) {
          trace(id, qn.depth, bound, "leaf");
          continue;  // fully fixed, bound is tight
        }
      }
    } else {
      for (int v = 0; v < nv && !frac; ++v)
        if (qn.node.fix[v] < 0) frac = v;
      if (!frac) {
        trace(id, qn.depth, bound, "leaf");
        continue;
      }
    }

    trace(id, qn.depth, bound, "branched");
    auto [lo, hi] = branch(qn.node, *frac);
    lo.bound = hi.bound = bound;
    queue.push({bound, seq++, qn.depth + 1, std::move(hi)});
    queue.push({bound, seq++, qn.depth + 1, std::move(lo)});
  }

  return finish(SolveStatus::Optimal, inc.objective);
}

}  // namespace detopt

#pragma once

#include "detopt/coverage.hpp"
#include "detopt/grid_model.hpp"
#include "detopt/objective.hpp"
#include "detopt/simplex.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace detopt {

struct SolveOptions {
  double gap_tolerance = 1e-6;  // relative
  std::int64_t node_limit = 10'000'000;
  int mccormick_partitions = 4;
  int tangent_points = 4;
  std::optional<double> time_limit_s;
  int threads = 1;
  std::ostream* trace = nullptr;       // one line per node when set
  std::size_t node_sample_limit = 0;   // keep the first N node records for audits
};

enum class SolveStatus { Optimal, GapReached, NodeLimit, TimeLimit, Infeasible };

const char* to_string(SolveStatus st);

struct NodeRecord {
  std::vector<std::pair<CellIndex, bool>> fixed_primary;    // (cell, value)
  std::vector<std::pair<CellIndex, bool>> fixed_secondary;
  double bound = 0.0;
};

struct SolveResult {
  Placement placement;
  double objective = 0.0;     // expected casualties of the placement
  double lower_bound = 0.0;
  double relative_gap = 0.0;
  std::int64_t nodes_explored = 0;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<NodeRecord> sampled_nodes;
};

struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compiled instance shared by both solvers: candidate orderings and
/// per-pair log-miss coefficient rows.
struct ModelContext {
  struct Pair {
    PairKey key;
    double zeta_gamma;
    std::vector<std::pair<int, double>> log_miss_p;  // (index into p_cells, ln(1-rho))
    std::vector<std::pair<int, double>> log_miss_s;  // (index into s_cells, ln(1-rho))
  };
  std::vector<CellIndex> p_cells, s_cells;  // sorted candidate cells
  std::vector<Pair> pairs;
  double theta1 = 0, theta2 = 0;
  DetectorSpec primary, secondary;
  int max_primary = 0, max_secondary = 0;   // floor(budget / cost)
  std::vector<std::pair<int, int>> overlap;  // (p index, s index) of shared cells

  int num_vars() const { return static_cast<int>(p_cells.size() + s_cells.size()); }
  double exact_objective(const std::vector<char>& x, const std::vector<char>& y) const;
};

ModelContext compile_model(const GridScenario& s, const CoverageTable& cov);

/// Branching state: -1 free, 0 or 1 fixed, indexed parallel to
/// p_cells then s_cells.
struct RelaxationNode {
  std::vector<signed char> fix;  // size ctx.num_vars()
  double bound = -1e300;
};

struct RelaxationLp {
  LpModel lp;
  std::vector<int> x_var;  // LP column of X_i per p_cells index
  std::vector<int> y_var;
};

/// Linear relaxation of the casualty objective at a node: tangent
/// underestimators on the two exponential layer-miss terms and a
/// piecewise McCormick upper envelope (selectors relaxed) on their
/// bilinear product, plus budget, exclusion and linking rows.
RelaxationLp build_relaxation(const ModelContext& ctx, const RelaxationNode& node,
                              const SolveOptions& opts);

/// Most-fractional binary, ties by lowest combined index (X before Y);
/// nullopt when all binaries are integral.
std::optional<int> select_branch_var(const ModelContext& ctx, const RelaxationLp& rlp,
                                     const Eigen::VectorXd& x);

/// Children fixing the chosen variable to 0 and to 1.
std::pair<RelaxationNode, RelaxationNode> branch(const RelaxationNode& node, int var);

/// Exhaustive oracle; guards |P| + |S| <= 24 with InstanceTooLarge.
/// Ties broken by lexicographically smallest (X, Y) cell sequence.
SolveResult enumerate_optimal(const GridScenario& s, const CoverageTable& cov);

/// Best-first linearized branch-and-bound; provably optimal to the gap
/// tolerance. Integer leaves are re-evaluated with the exact objective.
SolveResult solve_bnb(const GridScenario& s, const CoverageTable& cov,
                      const SolveOptions& opts = {});

}  // namespace detopt

#include "detopt/coverage.hpp"
#include "detopt/grid_model.hpp"
#include "detopt/num_format.hpp"
#include "detopt/objective.hpp"
#include "detopt/pathing.hpp"
#include "detopt/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace detopt;
using nlohmann::json;

// Exit codes: 0 success, 1 internal error, 2 validation failure,
// 3 resource limit.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitLimit = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

GridScenario load(const std::string& path) { return parse_scenario(read_file(path)); }

// Returns true when valid; prints violations and sets the exit code
// otherwise.
bool gate_validation(const GridScenario& s) {
  const ValidationReport report = validate_scenario(s);
  if (report.empty()) return true;
  for (const auto& v : report) std::cerr << "validation: " << v << "\n";
  return false;
}

json placement_json(const Placement& pl) {
  json out;
  out["primary"] = json::array();
  for (CellIndex j : pl.primary) out["primary"].push_back(j);
  out["secondary"] = json::array();
  for (CellIndex j : pl.secondary) out["secondary"].push_back(j);
  return out;
}

json breakdown_json(const ObjectiveBreakdown& b) {
  json out;
  out["expected_casualties"] = round9(b.expected_casualties);
  out["paper_objective_value"] = round9(b.paper_objective_value);
  out["terms"] = json::array();
  for (const auto& t : b.terms) {
    out["terms"].push_back({{"entrance", t.entrance},
                            {"target", t.target},
                            {"miss_primary", round9(t.miss_primary)},
                            {"miss_secondary", round9(t.miss_secondary)},
                            {"success_factor", round9(t.success_factor)},
                            {"casualty_term", round9(t.casualty_term)}});
  }
  return out;
}

json result_json(const SolveResult& r) {
  json out;
  out["placement"] = placement_json(r.placement);
  out["objective"] = round9(r.objective);
  out["lower_bound"] = round9(r.lower_bound);
  out["relative_gap"] = round9(r.relative_gap);
  out["nodes_explored"] = r.nodes_explored;
  out["status"] = to_string(r.status);
  return out;
}

struct CommonOpts {
  double gap = 1e-6;
  std::int64_t node_limit = 10'000'000;
  double time_limit = 0.0;  // 0 = none
  int partitions = 4;
  int tangents = 4;
  int threads = 1;
  bool trace = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--gap", o.gap, "relative optimality gap tolerance");
  cmd->add_option("--node-limit", o.node_limit, "branch-and-bound node limit");
  cmd->add_option("--time-limit", o.time_limit, "time limit in seconds (0 = none)");
  cmd->add_option("--partitions", o.partitions, "piecewise McCormick partitions");
  cmd->add_option("--tangents", o.tangents, "tangent cuts per exponential term");
  cmd->add_option("--threads", o.threads, "worker threads for coverage/sweeps");
  cmd->add_flag("--trace", o.trace, "stream one line per search node to stderr");
}

SolveOptions to_solve_options(const CommonOpts& o) {
  SolveOptions opts;
  opts.gap_tolerance = o.gap;
  opts.node_limit = o.node_limit;
  if (o.time_limit > 0) opts.time_limit_s = o.time_limit;
  opts.mccormick_partitions = o.partitions;
  opts.tangent_points = o.tangents;
  opts.threads = o.threads;
  if (o.trace) opts.trace = &std::cerr;
  return opts;
}

int cmd_validate(const std::string& path) {
  const GridScenario s = load(path);
  const ValidationReport report = validate_scenario(s);
  json out;
  out["violations"] = json::array();
  for (const auto& v : report) out["violations"].push_back(v);
  std::cout << out.dump(2) << "\n";
  return report.empty() ? kExitOk : kExitValidation;
}

int cmd_paths(const std::string& path) {
  const GridScenario s = load(path);
  if (!gate_validation(s)) return kExitValidation;
  for (const auto& [key, p] : all_paths(s)) {
    json line;
    line["entrance"] = key.first;
    line["target"] = key.second;
    line["cells"] = p.cells;
    line["total_length"] = round9(p.total_length);
    line["truncated_length"] = round9(p.truncated_length);
    std::cout << line.dump() << "\n";
  }
  return kExitOk;
}

int cmd_coverage(const std::string& path, int threads) {
  const GridScenario s = load(path);
  if (!gate_validation(s)) return kExitValidation;
  const CoverageTable cov = build_coverage(s, all_paths(s), threads);

  auto key_str = [](const RhoKey& k) {
    return std::to_string(std::get<0>(k)) + ":" + std::to_string(std::get<1>(k)) + ":" +
           std::to_string(std::get<2>(k));
  };
  auto pair_str = [](const PairKey& k) {
    return std::to_string(k.first) + ":" + std::to_string(k.second);
  };
  json out;
  out["rho_primary"] = json::object();
  for (const auto& [k, v] : cov.rho_primary) out["rho_primary"][key_str(k)] = round9(v);
  out["rho_secondary"] = json::object();
  for (const auto& [k, v] : cov.rho_secondary)
    out["rho_secondary"][key_str(k)] = round9(v);
  out["eligible_primary"] = json::object();
  for (const auto& [k, cells] : cov.eligible_primary)
    out["eligible_primary"][pair_str(k)] = std::vector<CellIndex>(cells.begin(), cells.end());
  out["eligible_secondary"] = json::object();
  for (const auto& [k, cells] : cov.eligible_secondary)
    out["eligible_secondary"][pair_str(k)] =
        std::vector<CellIndex>(cells.begin(), cells.end());
  out["candidates_primary"] =
      std::vector<CellIndex>(cov.candidates_primary.begin(), cov.candidates_primary.end());
  out["candidates_secondary"] = std::vector<CellIndex>(cov.candidates_secondary.begin(),
                                                       cov.candidates_secondary.end());
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int report_solution(const GridScenario& s, const CoverageTable& cov,
                    const SolveResult& result) {
  const ObjectiveBreakdown breakdown = expected_casualties(s, cov, result.placement);
  json out;
  out["breakdown"] = breakdown_json(breakdown);
  out["result"] = result_json(result);
  std::cout << out.dump(2) << "\n";
  switch (result.status) {
    case SolveStatus::Optimal:
    case SolveStatus::GapReached: return kExitOk;
    case SolveStatus::NodeLimit:
    case SolveStatus::TimeLimit: return kExitLimit;
    case SolveStatus::Infeasible: return kExitInternal;
  }
  return kExitInternal;
}

int cmd_solve(const std::string& path, const CommonOpts& o) {
  const GridScenario s = load(path);
  if (!gate_validation(s)) return kExitValidation;
  const CoverageTable cov = build_coverage(s, all_paths(s), o.threads);
  return report_solution(s, cov, solve_bnb(s, cov, to_solve_options(o)));
}

int cmd_enumerate(const std::string& path, const CommonOpts& o) {
  const GridScenario s = load(path);
  if (!gate_validation(s)) return kExitValidation;
  const CoverageTable cov = build_coverage(s, all_paths(s), o.threads);
  return report_solution(s, cov, enumerate_optimal(s, cov));
}

struct SweepSpec {
  std::string param;
  std::vector<double> values;
  std::string mode = "both";  // two_layer | one_layer | both
};

void apply_param(GridScenario& s, const std::string& param, double value) {
  if (param == "alpha_p") s.primary.radius_alpha = value;
  else if (param == "alpha_s") s.secondary.radius_alpha = value;
  else if (param == "beta_p") s.primary.rate_beta = value;
  else if (param == "beta_s") s.secondary.rate_beta = value;
  else if (param == "budget_p") s.primary.budget = value;
  else if (param == "budget_s") s.secondary.budget = value;
  else throw std::runtime_error("unknown sweep parameter: " + param);
}

int cmd_sweep(const std::string& path, const SweepSpec& spec, const CommonOpts& o) {
  const GridScenario base = load(path);
  if (!gate_validation(base)) return kExitValidation;
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (spec.values[i] <= spec.values[i - 1])
      throw std::runtime_error("sweep values must be strictly increasing");
  if (spec.values.empty()) throw std::runtime_error("sweep values must be non-empty");

  std::vector<std::string> modes;
  if (spec.mode == "both") modes = {"two_layer", "one_layer"};
  else if (spec.mode == "two_layer" || spec.mode == "one_layer") modes = {spec.mode};
  else throw std::runtime_error("unknown sweep mode: " + spec.mode);

  struct Row {
    double value;
    std::string mode, status;
    double objective = 0, gap = 0, seconds = 0;
    std::int64_t nodes = 0;
    bool ok = false;
  };
  std::vector<Row> rows;
  for (double value : spec.values) {
    for (const auto& mode : modes) {
      Row row{value, mode, "", 0, 0, 0, 0, false};
      GridScenario s = base;
      apply_param(s, spec.param, value);
      if (mode == "one_layer") s.secondary.budget = 0.0;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const CoverageTable cov = build_coverage(s, all_paths(s), o.threads);
        const SolveResult r = solve_bnb(s, cov, to_solve_options(o));
        row.objective = r.objective;
        row.gap = r.relative_gap;
        row.nodes = r.nodes_explored;
        row.status = to_string(r.status);
        row.ok = r.status == SolveStatus::Optimal || r.status == SolveStatus::GapReached;
      } catch (const std::exception& e) {
        row.status = std::string("Error: ") + e.what();
      }
      row.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows.push_back(std::move(row));
    }
  }

  std::cout << "param,value,mode,objective,gap,nodes,seconds,status\n";
  for (const auto& row : rows) {
    std::cout << spec.param << "," << format9(row.value) << "," << row.mode << ","
              << format9(row.objective) << "," << format9(row.gap) << "," << row.nodes
              << "," << format9(row.seconds) << "," << row.status << "\n";
  }

  // Solved sweeps must be monotone: more radius/rate/budget never hurts,
  // and the one-layer optimum never beats the two-layer one.
  auto tol = [&o](double v) { return 2.0 * o.gap * std::max(1.0, std::abs(v)); };
  for (const auto& mode : modes) {
    const Row* prev = nullptr;
    for (const auto& row : rows) {
      if (row.mode != mode || !row.ok) continue;
      if (prev && row.objective > prev->objective + tol(prev->objective)) {
        std::cerr << "sweep monotonicity violated for " << mode << " at value "
                  << format9(row.value) << "\n";
        return kExitInternal;
      }
      prev = &row;
    }
  }
  if (modes.size() == 2) {
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
      const Row& two = rows[i];
      const Row& one = rows[i + 1];
      if (two.ok && one.ok && two.objective > one.objective + tol(one.objective)) {
        std::cerr << "two_layer objective exceeds one_layer at value "
                  << format9(two.value) << "\n";
        return kExitInternal;
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal two-layer detector placement on gridded threat areas"};
  app.require_subcommand(1);

  std::string scenario;
  CommonOpts common;
  SweepSpec sweep;

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", scenario)->required();

  auto* paths = app.add_subcommand("paths", "attacker shortest paths as JSON lines");
  paths->add_option("scenario", scenario)->required();

  auto* coverage = app.add_subcommand("coverage", "detection probability table as JSON");
  coverage->add_option("scenario", scenario)->required();
  add_common(coverage, common);

  auto* solve = app.add_subcommand("solve", "branch-and-bound optimal placement");
  solve->add_option("scenario", scenario)->required();
  add_common(solve, common);

  auto* enumerate = app.add_subcommand("enumerate", "exhaustive optimal placement");
  enumerate->add_option("scenario", scenario)->required();
  add_common(enumerate, common);

  auto* sweep_cmd = app.add_subcommand("sweep", "sensitivity sweep, CSV on stdout");
  sweep_cmd->add_option("scenario", scenario)->required();
  sweep_cmd->add_option("--param", sweep.param, "alpha_p|alpha_s|beta_p|beta_s|budget_p|budget_s")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "strictly increasing parameter values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--mode", sweep.mode, "two_layer|one_layer|both");
  add_common(sweep_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(scenario);
    if (paths->parsed()) return cmd_paths(scenario);
    if (coverage->parsed()) return cmd_coverage(scenario, common.threads);
    if (solve->parsed()) return cmd_solve(scenario, common);
    if (enumerate->parsed()) return cmd_enumerate(scenario, common);
    if (sweep_cmd->parsed()) return cmd_sweep(scenario, sweep, common);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

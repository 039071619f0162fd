#include "detopt/grid_model.hpp"

#include "detopt/num_format.hpp"
#include "detopt/pathing.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace detopt {

using nlohmann::json;

double GridScenario::target_zeta(CellIndex j) const {
  for (const auto& t : targets)
    if (t.cell == j) return t.zeta;
  return 0.0;
}

double GridScenario::total_weighted_casualties() const {
  double sum = 0.0;
  for (const auto& [key, g] : gamma) sum += g * target_zeta(key.second);
  return sum;
}

Eigen::Vector2d cell_center(const GridScenario& s, CellIndex j) {
  if (!s.in_grid(j))
    throw std::out_of_range("cell index " + std::to_string(j) + " out of range");
  const int idx = j - 1;
  const int r = idx / s.cols;
  const int c = idx % s.cols;
  return {(c + 0.5) * s.cell_size, (r + 0.5) * s.cell_size};
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

void check_fields(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const char* name : allowed)
    if (!obj.contains(name)) fail(std::string("missing field '") + name + "' in " + where);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed)
      if (it.key() == name) known = true;
    if (!known) fail(std::string("unknown field '") + it.key() + "' in " + where);
  }
}

double get_number(const json& obj, const char* field) {
  const json& v = obj.at(field);
  if (!v.is_number()) fail(std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* field) {
  const json& v = obj.at(field);
  if (!v.is_number_integer()) fail(std::string("field '") + field + "' must be an integer");
  return v.get<int>();
}

CellIndex get_cell(const json& v, const char* field) {
  if (!v.is_number_integer()) fail(std::string("field '") + field + "' must be an integer");
  const int j = v.get<int>();
  if (j < 1) fail(std::string("field '") + field + "': index " + std::to_string(j) +
                  " out of range (cell indices are 1-based)");
  return j;
}

DetectorSpec parse_spec(const json& obj, const char* where) {
  check_fields(obj, where, {"alpha_m", "beta_per_m", "psi", "budget"});
  DetectorSpec d;
  d.radius_alpha = get_number(obj, "alpha_m");
  d.rate_beta = get_number(obj, "beta_per_m");
  d.unit_cost_psi = get_number(obj, "psi");
  d.budget = get_number(obj, "budget");
  return d;
}

}  // namespace

GridScenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("scenario document must be a JSON object");
  check_fields(doc, "scenario",
               {"rows", "cols", "cell_size_m", "blocked", "entrances", "targets", "gamma",
                "speed_k_mps", "response_time_chi_s", "theta1", "theta2", "primary",
                "secondary"});

  GridScenario s;
  s.rows = get_int(doc, "rows");
  s.cols = get_int(doc, "cols");
  s.cell_size = get_number(doc, "cell_size_m");
  for (const json& v : doc.at("blocked")) s.blocked.insert(get_cell(v, "blocked"));
  for (const json& v : doc.at("entrances")) s.entrances.insert(get_cell(v, "entrances"));
  for (const json& t : doc.at("targets")) {
    check_fields(t, "targets[]", {"cell", "zeta"});
    s.targets.push_back({get_cell(t.at("cell"), "targets[].cell"), get_number(t, "zeta")});
  }
  for (const json& g : doc.at("gamma")) {
    check_fields(g, "gamma[]", {"entrance", "target", "p"});
    const PairKey key{get_cell(g.at("entrance"), "gamma[].entrance"),
                      get_cell(g.at("target"), "gamma[].target")};
    if (s.gamma.count(key)) fail("duplicate gamma entry for entrance " +
                                 std::to_string(key.first) + ", target " +
                                 std::to_string(key.second));
    s.gamma[key] = get_number(g, "p");
  }
  s.speed_k = get_number(doc, "speed_k_mps");
  s.response_time_chi = get_number(doc, "response_time_chi_s");
  s.theta1 = get_number(doc, "theta1");
  s.theta2 = get_number(doc, "theta2");
  s.primary = parse_spec(doc.at("primary"), "primary");
  s.secondary = parse_spec(doc.at("secondary"), "secondary");
  return s;
}

std::string serialize_scenario(const GridScenario& s) {
  json doc;
  doc["rows"] = s.rows;
  doc["cols"] = s.cols;
  doc["cell_size_m"] = round9(s.cell_size);
  doc["blocked"] = json::array();
  for (CellIndex j : s.blocked) doc["blocked"].push_back(j);
  doc["entrances"] = json::array();
  for (CellIndex j : s.entrances) doc["entrances"].push_back(j);
  doc["targets"] = json::array();
  for (const auto& t : s.targets)
    doc["targets"].push_back({{"cell", t.cell}, {"zeta", round9(t.zeta)}});
  doc["gamma"] = json::array();
  for (const auto& [key, p] : s.gamma)
    doc["gamma"].push_back(
        {{"entrance", key.first}, {"target", key.second}, {"p", round9(p)}});
  doc["speed_k_mps"] = round9(s.speed_k);
  doc["response_time_chi_s"] = round9(s.response_time_chi);
  doc["theta1"] = round9(s.theta1);
  doc["theta2"] = round9(s.theta2);
  auto spec = [](const DetectorSpec& d) {
    return json{{"alpha_m", round9(d.radius_alpha)},
                {"beta_per_m", round9(d.rate_beta)},
                {"psi", round9(d.unit_cost_psi)},
                {"budget", round9(d.budget)}};
  };
  doc["primary"] = spec(s.primary);
  doc["secondary"] = spec(s.secondary);
  return doc.dump(2);
}

ValidationReport validate_scenario(const GridScenario& s) {
  ValidationReport report;
  auto bad = [&report](const std::string& msg) { report.push_back(msg); };

  if (s.rows <= 0 || s.cols <= 0) bad("grid dimensions must be positive");
  if (!(s.cell_size > 0)) bad("cell_size_m must be > 0");
  if (!(s.speed_k > 0)) bad("speed_k_mps must be > 0");
  if (s.response_time_chi < 0) bad("response_time_chi_s must be >= 0");
  if (s.theta1 < 0 || s.theta1 > 1 || s.theta2 < 0 || s.theta2 > 1)
    bad("theta1 and theta2 must lie in [0, 1]");
  else if (s.theta2 > s.theta1)
    bad("theta2 " + format9(s.theta2) + " exceeds theta1 " + format9(s.theta1));

  auto check_spec = [&bad](const DetectorSpec& d, const char* name) {
    if (!(d.radius_alpha > 0) || !std::isfinite(d.radius_alpha))
      bad(std::string(name) + " alpha_m must be > 0");
    if (d.rate_beta < 0 || !std::isfinite(d.rate_beta))
      bad(std::string(name) + " beta_per_m must be >= 0");
    if (!(d.unit_cost_psi > 0) || !std::isfinite(d.unit_cost_psi))
      bad(std::string(name) + " psi must be > 0");
    if (d.budget < 0 || !std::isfinite(d.budget))
      bad(std::string(name) + " budget must be >= 0");
  };
  check_spec(s.primary, "primary");
  check_spec(s.secondary, "secondary");

  if (s.rows <= 0 || s.cols <= 0) return report;  // index checks need a grid

  std::set<CellIndex> target_cells;
  for (const auto& t : s.targets) {
    if (!s.in_grid(t.cell))
      bad("target cell " + std::to_string(t.cell) + " out of range");
    if (t.zeta < 0) bad("target cell " + std::to_string(t.cell) + " has zeta < 0");
    if (!target_cells.insert(t.cell).second)
      bad("duplicate target cell " + std::to_string(t.cell));
  }
  for (CellIndex j : s.blocked)
    if (!s.in_grid(j)) bad("blocked cell " + std::to_string(j) + " out of range");
  for (CellIndex j : s.entrances) {
    if (!s.in_grid(j)) bad("entrance cell " + std::to_string(j) + " out of range");
    if (s.blocked.count(j)) bad("entrance cell " + std::to_string(j) + " is blocked");
    if (target_cells.count(j)) bad("entrance cell " + std::to_string(j) + " is a target");
  }
  for (CellIndex j : target_cells)
    if (s.blocked.count(j)) bad("target cell " + std::to_string(j) + " is blocked");
  if (s.entrances.empty()) bad("no entrances");
  if (s.targets.empty()) bad("no targets");

  double gamma_sum = 0.0;
  for (const auto& [key, p] : s.gamma) {
    const auto [e, j] = key;
    if (!s.entrances.count(e))
      bad("gamma entry references non-entrance cell " + std::to_string(e));
    if (!target_cells.count(j))
      bad("gamma entry references non-target cell " + std::to_string(j));
    if (p < 0)
      bad("gamma(" + std::to_string(e) + "," + std::to_string(j) + ") is negative");
    gamma_sum += p;
  }
  if (std::abs(gamma_sum - 1.0) > 1e-9)
    bad("gamma sum " + format9(gamma_sum) + " != 1");

  // Every gamma-positive pair must admit an unblocked path.
  for (const auto& [key, p] : s.gamma) {
    const auto [e, j] = key;
    if (p <= 0 || !s.entrances.count(e) || !target_cells.count(j)) continue;
    try {
      shortest_path(s, e, j);
    } catch (const NoPathError&) {
      bad("unreachable pair (" + std::to_string(e) + "," + std::to_string(j) +
          ") with gamma > 0");
    }
  }
  return report;
}

}  // namespace detopt

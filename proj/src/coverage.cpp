#include "detopt/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace detopt {

namespace {
constexpr double kExposureFloor = 1e-9;  // meters; below this a cell is not eligible
}

double CoverageTable::rho_p(CellIndex i, const PairKey& ej) const {
  auto it = rho_primary.find({i, ej.first, ej.second});
  return it == rho_primary.end() ? 0.0 : it->second;
}

double CoverageTable::rho_s(CellIndex i, const PairKey& ej) const {
  auto it = rho_secondary.find({i, ej.first, ej.second});
  return it == rho_secondary.end() ? 0.0 : it->second;
}

double segment_circle_chord(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                            const Eigen::Vector2d& center, double radius) {
  const Eigen::Vector2d d = p1 - p0;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return 0.0;

  // |p0 + t d - center|^2 = r^2, t in [0, 1]
  const Eigen::Vector2d f = p0 - center;
  const double a = len2;
  const double b = 2.0 * f.dot(d);
  const double c = f.squaredNorm() - radius * radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return 0.0;  // no crossing, or tangent (measure zero)

  const double sq = std::sqrt(disc);
  const double t0 = std::clamp((-b - sq) / (2.0 * a), 0.0, 1.0);
  const double t1 = std::clamp((-b + sq) / (2.0 * a), 0.0, 1.0);
  return (t1 - t0) * std::sqrt(len2);
}

double path_exposure(const std::vector<Eigen::Vector2d>& polyline,
                     const Eigen::Vector2d& center, double radius) {
  double exposure = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i)
    exposure += segment_circle_chord(polyline[i - 1], polyline[i], center, radius);
  return exposure;
}

double detection_prob(double beta, double exposure) {
  // capped just under 1 so log-space miss products stay finite
  return std::min(-std::expm1(-beta * exposure), 1.0 - 1e-12);
}

CoverageTable build_coverage(const GridScenario& s,
                             const std::map<PairKey, ThreatPath>& paths, int threads) {
  // Candidate cells in fixed order so parallel chunks land in
  // preassigned slots and the merge is schedule-independent.
  std::vector<CellIndex> open;
  for (CellIndex i = 1; i <= s.cell_count(); ++i)
    if (!s.is_blocked(i)) open.push_back(i);

  struct PairData {
    PairKey key;
    std::vector<Eigen::Vector2d> prefix;  // truncated, for the primary layer
    const std::vector<Eigen::Vector2d>* full;
  };
  std::vector<PairData> pair_data;
  for (const auto& [key, path] : paths)
    pair_data.push_back({key, truncate_path(path, s.timeliness_buffer()), &path.polyline});

  struct Entry {
    double rho_p, rho_s;  // zero = ineligible
  };
  std::vector<std::vector<Entry>> results(open.size(),
                                          std::vector<Entry>(pair_data.size()));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t ci = begin; ci < end; ++ci) {
      const Eigen::Vector2d center = cell_center(s, open[ci]);
      for (std::size_t pi = 0; pi < pair_data.size(); ++pi) {
        const PairData& pd = pair_data[pi];
        Entry& ent = results[ci][pi];
        const double lp = path_exposure(pd.prefix, center, s.primary.radius_alpha);
        const double ls = path_exposure(*pd.full, center, s.secondary.radius_alpha);
        ent.rho_p = lp > kExposureFloor ? detection_prob(s.primary.rate_beta, lp) : 0.0;
        ent.rho_s = ls > kExposureFloor ? detection_prob(s.secondary.rate_beta, ls) : 0.0;
      }
    }
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(open.size())));
  if (nthreads == 1) {
    work(0, open.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (open.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(open.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  CoverageTable table;
  for (std::size_t ci = 0; ci < open.size(); ++ci) {
    const CellIndex i = open[ci];
    for (std::size_t pi = 0; pi < pair_data.size(); ++pi) {
      const auto [e, j] = pair_data[pi].key;
      const Entry& ent = results[ci][pi];
      // rho > 0 only when the rate is positive; zero-rate detectors see nothing.
      if (ent.rho_p > 0.0) {
        table.rho_primary[{i, e, j}] = ent.rho_p;
        table.eligible_primary[{e, j}].insert(i);
        table.candidates_primary.insert(i);
      }
      if (ent.rho_s > 0.0) {
        table.rho_secondary[{i, e, j}] = ent.rho_s;
        table.eligible_secondary[{e, j}].insert(i);
        table.candidates_secondary.insert(i);
      }
    }
  }
  return table;
}

}  // namespace detopt

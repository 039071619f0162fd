#include "detopt/pathing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace detopt {

double polyline_length(const std::vector<Eigen::Vector2d>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

namespace {

// Fixed expansion order N, NE, E, SE, S, SW, W, NW (row 0 at the top).
constexpr int kDr[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};

}  // namespace

ThreatPath shortest_path(const GridScenario& s, CellIndex e, CellIndex j) {
  if (!s.in_grid(e) || !s.in_grid(j))
    throw std::out_of_range("shortest_path: cell index out of range");
  if (s.is_blocked(e) || s.is_blocked(j))
    throw NoPathError("shortest_path: endpoint is blocked");

  const int n = s.cell_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n + 1, inf);
  std::vector<CellIndex> prev(n + 1, 0);
  std::vector<char> done(n + 1, 0);

  using Entry = std::pair<double, CellIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[e] = 0.0;
  queue.push({0.0, e});

  const double straight = s.cell_size;
  const double diagonal = s.cell_size * std::numbers::sqrt2;

  while (!queue.empty()) {
    const auto [d, cell] = queue.top();
    queue.pop();
    if (done[cell]) continue;
    done[cell] = 1;
    if (cell == j) break;

    const int r = (cell - 1) / s.cols;
    const int c = (cell - 1) % s.cols;
    for (int k = 0; k < 8; ++k) {
      const int nr = r + kDr[k];
      const int nc = c + kDc[k];
      if (nr < 0 || nr >= s.rows || nc < 0 || nc >= s.cols) continue;
      const CellIndex next = nr * s.cols + nc + 1;
      if (s.is_blocked(next)) continue;
      const bool diag = kDr[k] != 0 && kDc[k] != 0;
      if (diag) {
        // No corner cutting: both shared orthogonal neighbors must be open.
        const CellIndex side1 = r * s.cols + nc + 1;        // same row, new col
        const CellIndex side2 = nr * s.cols + c + 1;        // new row, same col
        if (s.is_blocked(side1) || s.is_blocked(side2)) continue;
      }
      const double nd = d + (diag ? diagonal : straight);
      if (nd < dist[next]) {  // strict improvement keeps ties deterministic
        dist[next] = nd;
        prev[next] = cell;
        queue.push({nd, next});
      }
    }
  }

  if (dist[j] == inf)
    throw NoPathError("no path from entrance " + std::to_string(e) + " to target " +
                      std::to_string(j));

  ThreatPath path;
  path.entrance = e;
  path.target = j;
  for (CellIndex cur = j; cur != 0; cur = prev[cur]) {
    path.cells.push_back(cur);
    if (cur == e) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (CellIndex cell : path.cells) path.polyline.push_back(cell_center(s, cell));
  path.total_length = polyline_length(path.polyline);
  path.truncated_length = std::max(0.0, path.total_length - s.timeliness_buffer());
  return path;
}

std::vector<Eigen::Vector2d> truncate_path(const ThreatPath& p, double buffer) {
  if (buffer < 0) throw std::invalid_argument("truncate_path: negative buffer");
  const double keep = p.total_length - buffer;
  if (keep <= 0) return {};
  if (buffer == 0) return p.polyline;

  std::vector<Eigen::Vector2d> prefix;
  prefix.push_back(p.polyline.front());
  double walked = 0.0;
  for (std::size_t i = 1; i < p.polyline.size(); ++i) {
    const Eigen::Vector2d seg = p.polyline[i] - p.polyline[i - 1];
    const double len = seg.norm();
    if (walked + len >= keep) {
      const double t = len > 0 ? (keep - walked) / len : 0.0;
      prefix.push_back(p.polyline[i - 1] + t * seg);
      return prefix;
    }
    walked += len;
    prefix.push_back(p.polyline[i]);
  }
  return prefix;  // keep >= total, rounding
}

std::map<PairKey, ThreatPath> all_paths(const GridScenario& s) {
  std::map<PairKey, ThreatPath> paths;
  for (const auto& [key, g] : s.gamma) {
    if (g <= 0) continue;
    paths.emplace(key, shortest_path(s, key.first, key.second));
  }
  return paths;
}

}  // namespace detopt

#include "hetgoal/exhaustive.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace hetgoal {

namespace {

constexpr int kDx[5] = {0, 0, 1, -1, 0};  // N S E W noop
constexpr int kDy[5] = {-1, 1, 0, 0, 0};

struct CrModel {
  int side;
  // goal tiles: 0 NW, 1 NE, 2 SW, 3 SE, 4 center
  std::pair<int, int> tile(int g) const {
    const int hi = side - 1, c = side / 2;
    switch (g) {
      case 0: return {0, 0};
      case 1: return {hi, 0};
      case 2: return {0, hi};
      case 3: return {hi, hi};
      default: return {c, c};
    }
  }
  int goal_at(int x, int y) const {
    for (int g = 0; g < 5; ++g)
      if (tile(g) == std::pair<int, int>{x, y}) return g;
    return -1;
  }
  int idx(std::pair<int, int> p) const { return p.second * side + p.first; }

  // first move toward a target tile avoiding the other absorbing tiles,
  // lowest move id among shortest; -1 when unreachable or already there
  std::vector<int> move_field(int target) const {
    std::vector<int> dist(std::size_t(side * side), -1);
    std::queue<int> q;
    dist[std::size_t(idx(tile(target)))] = 0;
    q.push(idx(tile(target)));
    while (!q.empty()) {
      const int cur = q.front();
      q.pop();
      const int cx = cur % side, cy = cur / side;
      for (int m = 0; m < 4; ++m) {
        const int nx = cx + kDx[m], ny = cy + kDy[m];
        if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
        const int g = goal_at(nx, ny);
        if (g >= 0 && g != target) continue;
        if (dist[std::size_t(ny * side + nx)] >= 0) continue;
        dist[std::size_t(ny * side + nx)] = dist[std::size_t(cur)] + 1;
        q.push(ny * side + nx);
      }
    }
    std::vector<int> move(std::size_t(side * side), -1);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const int d = dist[std::size_t(y * side + x)];
        if (d <= 0) continue;
        for (int m = 0; m < 4; ++m) {
          const int nx = x + kDx[m], ny = y + kDy[m];
          if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
          if (dist[std::size_t(ny * side + nx)] == d - 1) {
            move[std::size_t(y * side + x)] = m;
            break;
          }
        }
      }
    return move;
  }
};

}  // namespace

double cr_exhaustive_optimal_return(int side, const GoalMask& ego_mask,
                                    const GoalMask& tm_mask, int tm_target,
                                    std::pair<int, int> ego_start,
                                    std::pair<int, int> tm_start, int horizon) {
  if (side % 2 == 0 || side < 3) throw std::invalid_argument("side must be odd >= 3");
  const long cells = long(side) * side;
  if (cells * cells * (horizon + 1) > 1000000)
    throw std::invalid_argument("state space too large for exhaustive induction");
  if (!tm_mask.test(tm_target)) throw std::invalid_argument("tm target outside tm mask");

  CrModel model{side};
  const auto tm_move = model.move_field(tm_target);

  const int n = int(cells);
  const std::size_t n_states = std::size_t(n) * std::size_t(n) * std::size_t(horizon + 1);
  std::vector<double> value(n_states, -1.0);
  std::vector<bool> seen(n_states, false);

  std::function<double(std::pair<int, int>, std::pair<int, int>, int)> solve =
      [&](std::pair<int, int> ego, std::pair<int, int> tm, int t) -> double {
    const bool ego_frozen = model.goal_at(ego.first, ego.second) >= 0;
    const bool tm_frozen = model.goal_at(tm.first, tm.second) >= 0;
    if (t >= horizon || (ego_frozen && tm_frozen)) return 0.0;
    const std::size_t key =
        (std::size_t(model.idx(ego)) * std::size_t(n) + std::size_t(model.idx(tm))) *
            std::size_t(horizon + 1) +
        std::size_t(t);
    if (seen[key]) return value[key];

    // teammate move is fixed by its target
    std::pair<int, int> tm_next = tm;
    if (!tm_frozen) {
      const int m = tm_move[std::size_t(model.idx(tm))];
      if (m >= 0) tm_next = {tm.first + kDx[m], tm.second + kDy[m]};
    }
    double best = 0.0;
    for (int a = 0; a < 5; ++a) {
      std::pair<int, int> ego_next = ego;
      if (!ego_frozen) {
        const int nx = ego.first + kDx[a], ny = ego.second + kDy[a];
        if (nx >= 0 && ny >= 0 && nx < side && ny < side) ego_next = {nx, ny};
      }
      double r = 0.0;
      const int g_ego = model.goal_at(ego_next.first, ego_next.second);
      if (!ego_frozen && g_ego == 4 && ego_mask.test(4)) r += 0.2;
      if (g_ego >= 0 && g_ego < 4 && ego_next == tm_next && ego_mask.test(g_ego))
        r += 1.0;  // first joint occupancy; both frozen afterwards
      best = std::max(best, r + solve(ego_next, tm_next, t + 1));
      if (ego_frozen) break;  // all actions identical
    }
    seen[key] = true;
    value[key] = best;
    return best;
  };
  return solve(ego_start, tm_start, 0);
}

}  // namespace hetgoal

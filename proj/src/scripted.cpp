#include "hetgoal/scripted.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <queue>

#include "hetgoal/env_foraging.hpp"
#include "hetgoal/env_reaching.hpp"

namespace hetgoal {

namespace {
constexpr int kMoveDx[4] = {0, 0, 1, -1};
constexpr int kMoveDy[4] = {-1, 1, 0, 0};
}  // namespace

PathResult shortest_path(int side, std::pair<int, int> start,
                         const std::vector<std::pair<int, int>>& targets,
                         const std::function<bool(int, int)>& blocked) {
  const int n = side * side;
  auto idx = [side](int x, int y) { return y * side + x; };
  std::vector<int> dist(std::size_t(n), -1);
  // multi-source BFS backwards from the target set
  std::queue<int> q;
  for (auto [tx, ty] : targets) {
    if (tx < 0 || ty < 0 || tx >= side || ty >= side) continue;
    if (dist[std::size_t(idx(tx, ty))] == 0) continue;
    dist[std::size_t(idx(tx, ty))] = 0;
    q.push(idx(tx, ty));
  }
  while (!q.empty()) {
    const int cur = q.front();
    q.pop();
    const int cx = cur % side, cy = cur / side;
    for (int m = 0; m < 4; ++m) {
      const int nx = cx + kMoveDx[m], ny = cy + kMoveDy[m];
      if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
      if (dist[std::size_t(idx(nx, ny))] >= 0) continue;
      if (blocked && blocked(nx, ny)) continue;
      dist[std::size_t(idx(nx, ny))] = dist[std::size_t(cur)] + 1;
      q.push(idx(nx, ny));
    }
  }
  PathResult res;
  const int d0 = dist[std::size_t(idx(start.first, start.second))];
  if (d0 < 0) return res;  // unreachable (start cell may itself be blocked)
  res.dist = d0;
  if (d0 == 0) return res;
  for (int m = 0; m < 4; ++m) {
    const int nx = start.first + kMoveDx[m], ny = start.second + kMoveDy[m];
    if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
    const int dn = dist[std::size_t(idx(nx, ny))];
    if (dn >= 0 && dn == d0 - 1) {
      res.action = m;
      return res;
    }
  }
  return res;
}

namespace {

// Pathing toward a CR goal tile: every other absorbing tile is off limits.
PathResult cr_path(const ReachEnv& env, std::pair<int, int> from, int goal_id) {
  const auto tile = env.goal_tile(goal_id);
  auto blocked = [&env, goal_id](int x, int y) {
    const int g = env.goal_at(x, y);
    return g >= 0 && g != goal_id;
  };
  return shortest_path(env.grid_side(), from, {tile}, blocked);
}

// Pathing toward any free cell adjacent to an LBF fruit.
PathResult lbf_path(const ForageEnv& env, int agent, int fruit_index) {
  const auto& f = env.fruits()[std::size_t(fruit_index)];
  std::vector<std::pair<int, int>> targets;
  for (int m = 0; m < 4; ++m) {
    const int nx = f.x + kMoveDx[m], ny = f.y + kMoveDy[m];
    if (nx < 0 || ny < 0 || nx >= env.grid_side() || ny >= env.grid_side()) continue;
    bool on_fruit = false;
    for (const auto& other : env.fruits())
      if (other.present && other.x == nx && other.y == ny) on_fruit = true;
    if (!on_fruit) targets.emplace_back(nx, ny);
  }
  const auto other_pos = env.position(1 - agent);
  auto blocked = [&env, other_pos](int x, int y) {
    if (other_pos == std::pair<int, int>{x, y}) return true;
    for (const auto& f2 : env.fruits())
      if (f2.present && f2.x == x && f2.y == y) return true;
    return false;
  };
  return shortest_path(env.grid_side(), env.position(agent), targets, blocked);
}

int lbf_fruit_of_goal(const ForageEnv& env, int goal_id) {
  for (std::size_t i = 0; i < env.fruits().size(); ++i) {
    const auto& f = env.fruits()[i];
    if (ForageEnv::goal_of(f.kind, f.level) == goal_id) return int(i);
  }
  return -1;
}

}  // namespace

std::vector<int> heuristic_candidates(const Env& env, int agent) {
  std::vector<int> out;
  if (env.kind() == EnvKind::Reaching) {
    const auto& cr = dynamic_cast<const ReachEnv&>(env);
    for (int g = 0; g < cr.spec().goal_space.size(); ++g) {
      if (!cr.mask(agent).test(g)) continue;
      if (cr_path(cr, cr.position(agent), g).dist >= 0) out.push_back(g);
    }
  } else {
    const auto& lbf = dynamic_cast<const ForageEnv&>(env);
    for (int g = 0; g < lbf.spec().goal_space.size(); ++g) {
      if (!lbf.mask(agent).test(g)) continue;
      const int fi = lbf_fruit_of_goal(lbf, g);
      if (fi < 0 || !lbf.fruits()[std::size_t(fi)].present) continue;
      if (lbf_path(lbf, agent, fi).dist >= 0) out.push_back(g);
    }
  }
  return out;
}

int HeuristicAgent::act(const Env& env, Rng& rng) {
  // drop targets that have disappeared
  if (target_goal_ >= 0 && env.kind() == EnvKind::Foraging) {
    const auto& lbf = dynamic_cast<const ForageEnv&>(env);
    const int fi = lbf_fruit_of_goal(lbf, target_goal_);
    if (fi < 0 || !lbf.fruits()[std::size_t(fi)].present) target_goal_ = -1;
  }
  if (target_goal_ < 0) {
    const auto candidates = heuristic_candidates(env, agent_);
    if (candidates.empty()) return env.noop_action();
    target_goal_ = candidates[rng.uniform_int(candidates.size())];
  }
  if (env.kind() == EnvKind::Reaching) {
    const auto& cr = dynamic_cast<const ReachEnv&>(env);
    const auto path = cr_path(cr, cr.position(agent_), target_goal_);
    return path.action >= 0 ? path.action : env.noop_action();
  }
  const auto& lbf = dynamic_cast<const ForageEnv&>(env);
  const int fi = lbf_fruit_of_goal(lbf, target_goal_);
  const auto path = lbf_path(lbf, agent_, fi);
  if (path.dist == 0) return ForageEnv::kCollect;
  return path.action >= 0 ? path.action : env.noop_action();
}

namespace {

struct OracleChoice {
  int goal = -1;
  int action = -1;
};

OracleChoice oracle_choose(const Env& env, int agent) {
  const auto& space = env.spec().goal_space;
  const GoalMask ws = worthwhile_set(env.mask(agent), {env.mask(1 - agent)}, space);
  OracleChoice best;
  double best_r = -1.0;
  int best_d = std::numeric_limits<int>::max();
  auto consider = [&](int g, double r, int d, int action) {
    if (r > best_r || (r == best_r && d < best_d)) {
      best_r = r;
      best_d = d;
      best = {g, action};
    }
  };
  if (env.kind() == EnvKind::Reaching) {
    const auto& cr = dynamic_cast<const ReachEnv&>(env);
    for (int g = 0; g < space.size(); ++g) {
      if (!ws.test(g)) continue;
      const auto self = cr_path(cr, cr.position(agent), g);
      if (self.dist < 0) continue;
      int d = self.dist;
      if (!space.goal(g).solo) {
        // joint occupancy: completion needs the slower of the two agents
        int other_d;
        if (cr.frozen(1 - agent)) {
          other_d = cr.position(1 - agent) == cr.goal_tile(g) ? 0 : -1;
        } else {
          other_d = cr_path(cr, cr.position(1 - agent), g).dist;
        }
        if (other_d < 0) continue;
        d = std::max(d, other_d);
      }
      consider(g, space.goal(g).base_reward, d,
               self.dist == 0 ? ReachEnv::kNoop : self.action);
    }
    if (best.goal < 0) best.action = ReachEnv::kNoop;
  } else {
    const auto& lbf = dynamic_cast<const ForageEnv&>(env);
    for (int g = 0; g < space.size(); ++g) {
      if (!ws.test(g)) continue;
      const int fi = lbf_fruit_of_goal(lbf, g);
      if (fi < 0 || !lbf.fruits()[std::size_t(fi)].present) continue;
      const auto path = lbf_path(lbf, agent, fi);
      if (path.dist < 0) continue;
      consider(g, space.goal(g).base_reward, path.dist,
               path.dist == 0 ? ForageEnv::kCollect : path.action);
    }
    if (best.goal < 0) best.action = ForageEnv::kNoop;
  }
  return best;
}

}  // namespace

int oracle_action(const Env& env, int agent) { return oracle_choose(env, agent).action; }

int oracle_target(const Env& env, int agent) { return oracle_choose(env, agent).goal; }

}  // namespace hetgoal

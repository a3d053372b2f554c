#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hetgoal/posg.hpp"
#include "hetgoal/rng.hpp"

namespace hetgoal {

// Move ids shared by both envs: 0 N, 1 S, 2 E, 3 W.
struct PathResult {
  int dist = -1;    // -1 when unreachable
  int action = -1;  // first move along a shortest path; -1 at dist 0
};

// BFS over the 4-connected grid. Target cells are admissible regardless of
// blocked(). Among equally short first moves, picks the lowest action id
// (N, S, E, W), which keeps traces deterministic.
PathResult shortest_path(int side, std::pair<int, int> start,
                         const std::vector<std::pair<int, int>>& targets,
                         const std::function<bool(int, int)>& blocked);

// Scripted teammate: pursues one mask-rewarded goal at a time along BFS
// shortest paths, resampling when the target disappears.
class HeuristicAgent {
 public:
  explicit HeuristicAgent(int agent = 1) : agent_(agent) {}

  void reset() { target_goal_ = -1; }
  void force_target(int goal_id) { target_goal_ = goal_id; }
  int target_goal() const { return target_goal_; }

  // Not valid for frozen agents (they are not queried).
  int act(const Env& env, Rng& rng);

 private:
  int agent_;
  int target_goal_ = -1;
};

// Goals the heuristic may target right now: mask-rewarded, still present,
// reachable from the agent's position.
std::vector<int> heuristic_candidates(const Env& env, int agent);

// Full-knowledge shortest-path oracle: picks argmax reward over the
// worthwhile set, tie-broken by completion distance then goal id.
int oracle_action(const Env& env, int agent);

// The goal the oracle currently pursues, or -1 (exposed for trace audits).
int oracle_target(const Env& env, int agent);

}  // namespace hetgoal

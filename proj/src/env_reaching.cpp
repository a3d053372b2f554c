#include "hetgoal/env_reaching.hpp"

#include <stdexcept>

namespace hetgoal {

namespace {
GoalSpace reach_goal_space() {
  std::vector<Goal> goals;
  const char* tags[4] = {"corner_nw", "corner_ne", "corner_sw", "corner_se"};
  for (int i = 0; i < 4; ++i) goals.push_back({i, tags[i], 1.0, false});
  goals.push_back({4, "center", 0.2, true});
  return GoalSpace(std::move(goals));
}

// Center bit mandatory for every agent; at least one corner bit so the
// cooperative scenario classification is defined.
bool reach_mask_ok(const GoalMask& m) {
  if (!m.test(ReachEnv::kCenterGoal)) return false;
  for (int i = 0; i < 4; ++i)
    if (m.test(i)) return true;
  return false;
}
}  // namespace

ReachEnv::ReachEnv(int grid_side)
    : side_(grid_side),
      spec_{},
      sampler_(reach_goal_space(), reach_mask_ok) {
  if (side_ < 3 || side_ % 2 == 0)
    throw std::invalid_argument("ReachEnv: grid side must be odd and >= 3");
  spec_.n_agents = 2;
  spec_.action_count = 5;
  spec_.observation_length = 9;  // own xy + teammate xy + 5 cue slots
  spec_.goal_space = reach_goal_space();
  spec_.horizon = 50;
  masks_[0] = GoalMask(5);
  masks_[1] = GoalMask(5);
}

std::unique_ptr<Env> ReachEnv::clone() const {
  return std::make_unique<ReachEnv>(*this);
}

std::size_t ReachEnv::check_agent(int a) const {
  if (a < 0 || a >= 2) throw std::out_of_range("agent index");
  return std::size_t(a);
}

std::pair<int, int> ReachEnv::goal_tile(int goal_id) const {
  const int hi = side_ - 1, c = side_ / 2;
  switch (goal_id) {
    case 0: return {0, 0};
    case 1: return {hi, 0};
    case 2: return {0, hi};
    case 3: return {hi, hi};
    case 4: return {c, c};
  }
  throw std::out_of_range("goal id");
}

int ReachEnv::goal_at(int x, int y) const {
  for (int g = 0; g < 5; ++g)
    if (goal_tile(g) == std::pair<int, int>{x, y}) return g;
  return -1;
}

bool ReachEnv::is_goal_tile(int x, int y) const { return goal_at(x, y) >= 0; }

std::vector<std::vector<float>> ReachEnv::reset(const EpisodeConfig& config) {
  config_ = config;
  Rng rng(config.seed);
  auto pair = sampler_.sample(config.scenario, rng);
  masks_[0] = pair.first;
  masks_[1] = pair.second;
  for (int a = 0; a < 2; ++a)
    cues_[std::size_t(a)] = sample_cue(masks_[std::size_t(a)], config.sigma2, rng);
  // distinct non-goal cells
  for (int a = 0; a < 2; ++a) {
    while (true) {
      int x = int(rng.uniform_int(std::uint64_t(side_)));
      int y = int(rng.uniform_int(std::uint64_t(side_)));
      if (is_goal_tile(x, y)) continue;
      if (a == 1 && pos_[0] == std::pair<int, int>{x, y}) continue;
      pos_[std::size_t(a)] = {x, y};
      break;
    }
  }
  frozen_ = {false, false};
  corner_granted_ = {};
  t_ = 0;
  done_ = false;
  return {observe(0), observe(1)};
}

void ReachEnv::force_state(std::array<std::pair<int, int>, 2> positions,
                           std::array<GoalMask, 2> masks,
                           const EpisodeConfig& config) {
  config_ = config;
  pos_ = positions;
  masks_ = masks;
  Rng rng(config.seed);
  for (int a = 0; a < 2; ++a)
    cues_[std::size_t(a)] = sample_cue(masks_[std::size_t(a)], config.sigma2, rng);
  for (int a = 0; a < 2; ++a)
    frozen_[std::size_t(a)] = is_goal_tile(pos_[std::size_t(a)].first,
                                           pos_[std::size_t(a)].second);
  corner_granted_ = {};
  t_ = 0;
  done_ = frozen_[0] && frozen_[1];
}

std::vector<float> ReachEnv::observe(int agent) const {
  const std::size_t a = check_agent(agent);
  const std::size_t o = 1 - a;
  const float denom = float(side_ - 1);
  std::vector<float> obs;
  obs.reserve(9);
  obs.push_back(float(pos_[a].first) / denom);
  obs.push_back(float(pos_[a].second) / denom);
  obs.push_back(float(pos_[o].first) / denom);
  obs.push_back(float(pos_[o].second) / denom);
  for (int g = 0; g < 5; ++g)
    obs.push_back(config_.cue_visible ? float(cues_[o].values[std::size_t(g)]) : 0.0f);
  return obs;
}

StepOutcome ReachEnv::step(const std::array<int, 2>& joint_action) {
  if (done_) throw std::runtime_error("ReachEnv: step after termination");
  static constexpr int dx[5] = {0, 0, 1, -1, 0};
  static constexpr int dy[5] = {-1, 1, 0, 0, 0};
  for (int a = 0; a < 2; ++a)
    if (joint_action[std::size_t(a)] < 0 || joint_action[std::size_t(a)] >= 5)
      throw std::out_of_range("ReachEnv: action out of range");

  StepOutcome out;
  // simultaneous moves; frozen agents never move, off-grid moves are no-ops
  std::array<bool, 2> entered{false, false};
  for (int a = 0; a < 2; ++a) {
    if (frozen_[std::size_t(a)]) continue;
    const int act = joint_action[std::size_t(a)];
    const int nx = pos_[std::size_t(a)].first + dx[act];
    const int ny = pos_[std::size_t(a)].second + dy[act];
    if (nx < 0 || ny < 0 || nx >= side_ || ny >= side_) continue;
    pos_[std::size_t(a)] = {nx, ny};
    if (is_goal_tile(nx, ny)) {
      frozen_[std::size_t(a)] = true;
      entered[std::size_t(a)] = true;
    }
  }
  // center: solo reward on entry
  for (int a = 0; a < 2; ++a) {
    if (!entered[std::size_t(a)]) continue;
    const int g = goal_at(pos_[std::size_t(a)].first, pos_[std::size_t(a)].second);
    if (g == kCenterGoal) {
      if (masks_[std::size_t(a)].test(g))
        out.rewards[std::size_t(a)] += spec_.goal_space.goal(g).base_reward;
      out.achieved.push_back({g, {a}});
    }
  }
  // corners: granted once, at first joint occupancy, regardless of arrival order
  for (int g = 0; g < 4; ++g) {
    if (corner_granted_[std::size_t(g)]) continue;
    const auto tile = goal_tile(g);
    if (pos_[0] == tile && pos_[1] == tile) {
      corner_granted_[std::size_t(g)] = true;
      for (int a = 0; a < 2; ++a)
        if (masks_[std::size_t(a)].test(g))
          out.rewards[std::size_t(a)] += spec_.goal_space.goal(g).base_reward;
      out.achieved.push_back({g, {0, 1}});
    }
  }
  ++t_;
  done_ = (frozen_[0] && frozen_[1]) || t_ >= spec_.horizon;
  out.terminated = done_;
  out.observations = {observe(0), observe(1)};
  return out;
}

}  // namespace hetgoal

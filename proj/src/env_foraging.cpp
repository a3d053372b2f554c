#include "hetgoal/env_foraging.hpp"

#include <cstdlib>
#include <stdexcept>

#include "hetgoal/env_reaching.hpp"

namespace hetgoal {

namespace {
GoalSpace forage_goal_space() {
  const char* kinds[3] = {"apple", "orange", "plum"};
  std::vector<Goal> goals;
  for (int k = 0; k < 3; ++k)
    for (int l = 1; l <= 2; ++l)
      goals.push_back({k * 2 + (l - 1), std::string(kinds[k]) + "_l" + std::to_string(l),
                       l == 1 ? 0.2 : 1.0, l == 1});
  return GoalSpace(std::move(goals));
}

// Masks are defined over fruit kinds and expanded to both levels, so the two
// bits of a kind must agree; at least one kind selected.
bool forage_mask_ok(const GoalMask& m) {
  bool any = false;
  for (int k = 0; k < 3; ++k) {
    if (m.test(k * 2) != m.test(k * 2 + 1)) return false;
    any = any || m.test(k * 2);
  }
  return any;
}

int manhattan(std::pair<int, int> a, std::pair<int, int> b) {
  return std::abs(a.first - b.first) + std::abs(a.second - b.second);
}
}  // namespace

ForageEnv::ForageEnv(int grid_side)
    : side_(grid_side), spec_{}, sampler_(forage_goal_space(), forage_mask_ok) {
  if (side_ < 4) throw std::invalid_argument("ForageEnv: grid side must be >= 4");
  spec_.n_agents = 2;
  spec_.action_count = 6;
  spec_.observation_length = kNumFruits * 7 + 3 + 3 + 6;  // 54
  spec_.goal_space = forage_goal_space();
  spec_.horizon = 50;
  masks_[0] = GoalMask(6);
  masks_[1] = GoalMask(6);
}

std::unique_ptr<Env> ForageEnv::clone() const {
  return std::make_unique<ForageEnv>(*this);
}

std::size_t ForageEnv::check_agent(int a) const {
  if (a < 0 || a >= 2) throw std::out_of_range("agent index");
  return std::size_t(a);
}

bool ForageEnv::occupied(int x, int y) const {
  for (const auto& f : fruits_)
    if (f.present && f.x == x && f.y == y) return true;
  return false;
}

std::vector<std::vector<float>> ForageEnv::reset(const EpisodeConfig& config) {
  config_ = config;
  Rng rng(config.seed);
  auto pair = sampler_.sample(config.scenario, rng);
  masks_[0] = pair.first;
  masks_[1] = pair.second;
  for (int a = 0; a < 2; ++a)
    cues_[std::size_t(a)] = sample_cue(masks_[std::size_t(a)], config.sigma2, rng);
  // one fruit per (kind, level), pairwise non-adjacent cells
  fruits_.clear();
  for (int k = 0; k < 3; ++k)
    for (int l = 1; l <= 2; ++l) {
      Fruit f;
      f.kind = k;
      f.level = l;
      f.present = true;
      while (true) {
        f.x = int(rng.uniform_int(std::uint64_t(side_)));
        f.y = int(rng.uniform_int(std::uint64_t(side_)));
        bool ok = true;
        for (const auto& other : fruits_)
          if (manhattan({f.x, f.y}, {other.x, other.y}) < 2) ok = false;
        if (ok) break;
      }
      fruits_.push_back(f);
    }
  for (int a = 0; a < 2; ++a) {
    while (true) {
      int x = int(rng.uniform_int(std::uint64_t(side_)));
      int y = int(rng.uniform_int(std::uint64_t(side_)));
      if (occupied(x, y)) continue;
      if (a == 1 && pos_[0] == std::pair<int, int>{x, y}) continue;
      pos_[std::size_t(a)] = {x, y};
      break;
    }
  }
  t_ = 0;
  done_ = false;
  return {observe(0), observe(1)};
}

void ForageEnv::force_state(std::array<std::pair<int, int>, 2> positions,
                            std::array<GoalMask, 2> masks, std::vector<Fruit> fruits,
                            const EpisodeConfig& config) {
  if (int(fruits.size()) != kNumFruits)
    throw std::invalid_argument("force_state: need one fruit per (kind, level)");
  config_ = config;
  pos_ = positions;
  masks_ = masks;
  fruits_ = std::move(fruits);
  Rng rng(config.seed);
  for (int a = 0; a < 2; ++a)
    cues_[std::size_t(a)] = sample_cue(masks_[std::size_t(a)], config.sigma2, rng);
  t_ = 0;
  done_ = !ego_goal_remaining();
}

std::vector<float> ForageEnv::observe(int agent) const {
  const std::size_t a = check_agent(agent);
  const std::size_t o = 1 - a;
  const float denom = float(side_ - 1);
  std::vector<float> obs;
  obs.reserve(std::size_t(spec_.observation_length));
  for (const auto& f : fruits_) {
    obs.push_back(float(f.x) / denom);
    obs.push_back(float(f.y) / denom);
    for (int k = 0; k < 3; ++k) obs.push_back(f.kind == k ? 1.0f : 0.0f);
    obs.push_back(float(f.level));
    obs.push_back(f.present ? 1.0f : 0.0f);
  }
  obs.push_back(float(pos_[a].first) / denom);
  obs.push_back(float(pos_[a].second) / denom);
  obs.push_back(float(kAgentLevel));
  obs.push_back(float(pos_[o].first) / denom);
  obs.push_back(float(pos_[o].second) / denom);
  obs.push_back(float(kAgentLevel));
  for (int g = 0; g < 6; ++g)
    obs.push_back(config_.cue_visible ? float(cues_[o].values[std::size_t(g)]) : 0.0f);
  return obs;
}

bool ForageEnv::ego_goal_remaining() const {
  for (std::size_t i = 0; i < fruits_.size(); ++i) {
    const auto& f = fruits_[i];
    if (f.present && masks_[0].test(goal_of(f.kind, f.level))) return true;
  }
  return false;
}

StepOutcome ForageEnv::step(const std::array<int, 2>& joint_action) {
  if (done_) throw std::runtime_error("ForageEnv: step after termination");
  for (int a = 0; a < 2; ++a)
    if (joint_action[std::size_t(a)] < 0 || joint_action[std::size_t(a)] >= 6)
      throw std::out_of_range("ForageEnv: action out of range");
  static constexpr int dx[4] = {0, 0, 1, -1};
  static constexpr int dy[4] = {-1, 1, 0, 0};

  StepOutcome out;
  // movement: blocked by fruits and by the other agent; simultaneous moves
  // into the same cell cancel
  std::array<std::pair<int, int>, 2> target = pos_;
  for (int a = 0; a < 2; ++a) {
    const int act = joint_action[std::size_t(a)];
    if (act >= 4) continue;
    const int nx = pos_[std::size_t(a)].first + dx[act];
    const int ny = pos_[std::size_t(a)].second + dy[act];
    if (nx < 0 || ny < 0 || nx >= side_ || ny >= side_) continue;
    if (occupied(nx, ny)) continue;
    if (std::pair<int, int>{nx, ny} == pos_[1 - std::size_t(a)]) continue;
    target[std::size_t(a)] = {nx, ny};
  }
  if (target[0] == target[1] && target[0] != pos_[0] && target[1] != pos_[1]) {
    target = pos_;
  }
  pos_ = target;

  // collection: per fruit, sum levels of adjacent collecting agents
  std::array<bool, 2> collecting{joint_action[0] == kCollect, joint_action[1] == kCollect};
  for (std::size_t i = 0; i < fruits_.size(); ++i) {
    Fruit& f = fruits_[i];
    if (!f.present) continue;
    int level_sum = 0;
    std::vector<int> collectors;
    for (int a = 0; a < 2; ++a) {
      if (!collecting[std::size_t(a)]) continue;
      if (manhattan(pos_[std::size_t(a)], {f.x, f.y}) == 1) {
        level_sum += kAgentLevel;
        collectors.push_back(a);
      }
    }
    if (collectors.empty()) continue;
    const int g = goal_of(f.kind, f.level);
    const bool success = level_sum >= f.level;
    for (int a : collectors)
      out.collects.push_back({a, int(i), g, success});
    if (success) {
      f.present = false;
      for (int a : collectors)
        if (masks_[std::size_t(a)].test(g))
          out.rewards[std::size_t(a)] += spec_.goal_space.goal(g).base_reward;
      out.achieved.push_back({g, collectors});
    }
  }

  ++t_;
  done_ = !ego_goal_remaining() || t_ >= spec_.horizon;
  out.terminated = done_;
  out.observations = {observe(0), observe(1)};
  return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "reach") return std::make_unique<ReachEnv>();
  if (name == "lbf") return std::make_unique<ForageEnv>();
  throw std::invalid_argument("unknown env: " + name);
}

}  // namespace hetgoal

#pragma once

#include "hetgoal/posg.hpp"
#include "hetgoal/rng.hpp"

namespace hetgoal {

// Extended Cooperative Reaching: odd W x W grid, four corner goals requiring
// joint occupancy (r = 1) plus a solo center tile (r = 0.2). All five goal
// tiles are absorbing.
class ReachEnv final : public Env {
 public:
  // actions
  static constexpr int kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kNoop = 4;
  // goal ids: 0 NW, 1 NE, 2 SW, 3 SE, 4 center
  static constexpr int kCenterGoal = 4;

  explicit ReachEnv(int grid_side = 7);

  EnvKind kind() const override { return EnvKind::Reaching; }
  const PosgSpec& spec() const override { return spec_; }
  std::unique_ptr<Env> clone() const override;

  std::vector<std::vector<float>> reset(const EpisodeConfig& config) override;
  StepOutcome step(const std::array<int, 2>& joint_action) override;
  std::vector<float> observe(int agent) const override;

  bool done() const override { return done_; }
  int time() const override { return t_; }
  const GoalMask& mask(int agent) const override { return masks_[check_agent(agent)]; }
  const Cue& cue(int agent) const override { return cues_[check_agent(agent)]; }
  bool frozen(int agent) const override { return frozen_[check_agent(agent)]; }
  std::pair<int, int> position(int agent) const override {
    return pos_[check_agent(agent)];
  }
  const EpisodeConfig& config() const override { return config_; }
  int noop_action() const override { return kNoop; }

  int grid_side() const { return side_; }
  // goal tile coordinates by goal id
  std::pair<int, int> goal_tile(int goal_id) const;
  bool is_goal_tile(int x, int y) const;
  // goal id at (x, y), or -1
  int goal_at(int x, int y) const;
  const ScenarioSampler& sampler() const { return sampler_; }

  // Places state directly (tests and the exhaustive oracle).
  void force_state(std::array<std::pair<int, int>, 2> positions,
                   std::array<GoalMask, 2> masks, const EpisodeConfig& config);

 private:
  std::size_t check_agent(int a) const;

  int side_;
  PosgSpec spec_;
  ScenarioSampler sampler_;
  EpisodeConfig config_;
  std::array<std::pair<int, int>, 2> pos_;
  std::array<bool, 2> frozen_{false, false};
  std::array<GoalMask, 2> masks_;
  std::array<Cue, 2> cues_;
  std::array<bool, 5> corner_granted_{};  // index by goal id; [4] unused
  int t_ = 0;
  bool done_ = true;
};

}  // namespace hetgoal

#pragma once

#include "hetgoal/posg.hpp"
#include "hetgoal/rng.hpp"

namespace hetgoal {

struct Fruit {
  int x = 0, y = 0;
  int kind = 0;   // 0 apple, 1 orange, 2 plum
  int level = 1;  // 1 (solo) or 2 (cooperative)
  bool present = true;
};

// Extended Level-Based Foraging: three fruit kinds x two levels, one fruit
// per (kind, level) pair. Goal id = kind * 2 + (level - 1). Both agents are
// level 1, so level-1 fruits are solo goals and level-2 fruits cooperative.
class ForageEnv final : public Env {
 public:
  static constexpr int kNorth = 0, kSouth = 1, kEast = 2, kWest = 3,
                       kCollect = 4, kNoop = 5;
  static constexpr int kNumFruits = 6;
  static constexpr int kAgentLevel = 1;

  explicit ForageEnv(int grid_side = 8);

  EnvKind kind() const override { return EnvKind::Foraging; }
  const PosgSpec& spec() const override { return spec_; }
  std::unique_ptr<Env> clone() const override;

  std::vector<std::vector<float>> reset(const EpisodeConfig& config) override;
  StepOutcome step(const std::array<int, 2>& joint_action) override;
  std::vector<float> observe(int agent) const override;

  bool done() const override { return done_; }
  int time() const override { return t_; }
  const GoalMask& mask(int agent) const override { return masks_[check_agent(agent)]; }
  const Cue& cue(int agent) const override { return cues_[check_agent(agent)]; }
  bool frozen(int) const override { return false; }
  std::pair<int, int> position(int agent) const override {
    return pos_[check_agent(agent)];
  }
  const EpisodeConfig& config() const override { return config_; }
  int noop_action() const override { return kNoop; }

  int grid_side() const { return side_; }
  const std::vector<Fruit>& fruits() const { return fruits_; }
  static int goal_of(int kind, int level) { return kind * 2 + (level - 1); }
  const ScenarioSampler& sampler() const { return sampler_; }

  // Places state directly (tests). Fruit list must have kNumFruits entries,
  // one per (kind, level).
  void force_state(std::array<std::pair<int, int>, 2> positions,
                   std::array<GoalMask, 2> masks, std::vector<Fruit> fruits,
                   const EpisodeConfig& config);

 private:
  std::size_t check_agent(int a) const;
  bool occupied(int x, int y) const;
  bool ego_goal_remaining() const;

  int side_;
  PosgSpec spec_;
  ScenarioSampler sampler_;
  EpisodeConfig config_;
  std::vector<Fruit> fruits_;
  std::array<std::pair<int, int>, 2> pos_;
  std::array<GoalMask, 2> masks_;
  std::array<Cue, 2> cues_;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace hetgoal

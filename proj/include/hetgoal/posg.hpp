#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hetgoal/goal.hpp"

namespace hetgoal {

// POSG tuple data shared by both environments. State, transition and
// observation functions are realized by the concrete env classes.
struct PosgSpec {
  int n_agents = 2;
  int action_count = 0;
  int observation_length = 0;
  double discount = 0.99;
  GoalSpace goal_space;
  int horizon = 50;
};

struct EpisodeConfig {
  ScenarioKind scenario = ScenarioKind::FullOverlap;
  double sigma2 = 0.05;
  bool cue_visible = true;
  std::uint64_t seed = 0;
};

struct AchievedGoal {
  int goal_id = -1;
  std::vector<int> agents;  // agents achieving the goal this step
};

// LBF collect attempt annotation consumed by evalkit.
struct CollectAttempt {
  int agent = -1;
  int fruit_index = -1;
  int goal_id = -1;
  bool success = false;
};

struct StepOutcome {
  std::vector<std::vector<float>> observations;
  std::array<double, 2> rewards{0.0, 0.0};
  bool terminated = false;
  std::vector<AchievedGoal> achieved;
  std::vector<CollectAttempt> collects;
};

enum class EnvKind { Reaching, Foraging };

// Agent 0 is the ego agent throughout.
class Env {
 public:
  virtual ~Env() = default;
  virtual EnvKind kind() const = 0;
  virtual const PosgSpec& spec() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

  virtual std::vector<std::vector<float>> reset(const EpisodeConfig& config) = 0;
  virtual StepOutcome step(const std::array<int, 2>& joint_action) = 0;
  virtual std::vector<float> observe(int agent) const = 0;

  virtual bool done() const = 0;
  virtual int time() const = 0;
  virtual const GoalMask& mask(int agent) const = 0;
  virtual const Cue& cue(int agent) const = 0;
  virtual bool frozen(int agent) const = 0;
  virtual std::pair<int, int> position(int agent) const = 0;
  virtual const EpisodeConfig& config() const = 0;
  virtual int noop_action() const = 0;
};

// name: "reach" or "lbf"
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace hetgoal

#pragma once

#include <memory>
#include <vector>

#include "hetgoal/posg.hpp"
#include "hetgoal/ppo.hpp"
#include "hetgoal/rng.hpp"
#include "hetgoal/scripted.hpp"
#include "hetgoal/trace.hpp"

namespace hetgoal {

struct EpisodeOpts {
  std::vector<ScenarioKind> mix = {ScenarioKind::FullOverlap, ScenarioKind::PartialOverlap,
                                   ScenarioKind::NoOverlap};
  double sigma2 = 0.05;
  bool cue_visible = true;
};

// Ego-facing wrapper: embeds the scripted heuristic teammate and owns the
// instance's random stream. In CR, once the ego agent is absorbed the episode
// is fast-forwarded (ego emits no-ops, its policy is not queried) and the
// remaining reward is folded into the final transition.
class EgoEnv {
 public:
  EgoEnv(std::unique_ptr<Env> env, std::uint64_t stream_seed);

  const std::vector<float>& reset(const EpisodeOpts& opts);
  // Replays a fixed config (evaluation); teammate stream derives from the
  // episode seed so matched-seed runs share teammate behaviour.
  const std::vector<float>& reset_with(const EpisodeConfig& config);

  struct EgoStep {
    double reward = 0.0;
    bool done = false;
    int tm_action = 0;  // teammate action at the decision step
  };
  EgoStep step(int ego_action);

  const std::vector<float>& obs() const { return obs_; }
  Env& env() { return *env_; }
  const Env& env() const { return *env_; }
  Rng& rng() { return stream_; }
  bool needs_reset() const { return needs_reset_; }
  long env_steps() const { return env_steps_; }

  void begin_trace();
  EpisodeTrace take_trace();

 private:
  void record_step(const std::array<int, 2>& actions, const StepOutcome& out);

  std::unique_ptr<Env> env_;
  Rng stream_;
  Rng tm_rng_;
  HeuristicAgent teammate_{1};
  std::vector<float> obs_;
  bool needs_reset_ = true;
  long env_steps_ = 0;
  bool tracing_ = false;
  EpisodeTrace trace_;
};

// Policy-side interface for rollout collection and evaluation. All per-env
// state is indexed by env_idx, so instances step concurrently.
class RolloutAgent {
 public:
  virtual ~RolloutAgent() = default;
  virtual int ppo_obs_dim() const = 0;
  virtual int ppo_action_count() const = 0;

  struct Decision {
    int env_action = 0;
    int ppo_action = 0;
    float logp = 0.0f;
    float value = 0.0f;
  };

  virtual void episode_begin(int env_idx) = 0;
  // Writes the PPO-level input (ppo_obs_dim floats) and decides an action.
  virtual Decision act(int env_idx, const std::vector<float>& env_obs, Rng& rng,
                       float* ppo_obs_out) = 0;
  virtual void post_step(int env_idx, int tm_action, bool done) { (void)env_idx, (void)tm_action, (void)done; }
  virtual float bootstrap_value(int env_idx, const std::vector<float>& env_obs) = 0;
  // Called once before each collected batch (recurrent models open a new
  // truncation window here).
  virtual void batch_begin() {}
};

// Synchronized vectorized rollout. Writes rows in fixed (env_index, step)
// order; with parallel=true env instances step on OpenMP workers, which is
// bit-identical to the serial path because all mutable state is per-env.
RolloutBatch collect_rollout(std::vector<std::unique_ptr<EgoEnv>>& envs, RolloutAgent& agent,
                             int steps_per_env, const EpisodeOpts& opts,
                             bool parallel = true);

std::vector<std::unique_ptr<EgoEnv>> make_env_instances(const std::string& env_name,
                                                        int n_envs, std::uint64_t run_seed);

}  // namespace hetgoal

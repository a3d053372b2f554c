#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetgoal/approx/net.hpp"
#include "hetgoal/approx/store.hpp"
#include "hetgoal/rng.hpp"

namespace hetgoal {

struct PpoConfig {
  int batch_size = 1024;
  int minibatches = 8;
  int epochs = 2;
  double max_grad_norm = 0.5;
  double lr = 1e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int n_envs = 16;
  bool advantage_norm = true;  // per minibatch
  bool value_clip = false;

  int steps_per_env() const { return batch_size / n_envs; }
  void validate() const;
};

// Flat rollout storage, row = env_index * steps_per_env + step.
struct RolloutBatch {
  int n_envs = 0, steps_per_env = 0, obs_dim = 0;
  std::vector<float> obs;          // [rows, obs_dim]
  std::vector<int> actions;        // [rows]
  std::vector<float> logp;         // [rows] log-probability at collection
  std::vector<float> rewards;      // [rows]
  std::vector<float> values;       // [rows]
  std::vector<std::uint8_t> dones; // [rows] episode terminated at this step
  std::vector<float> bootstrap;    // [n_envs] value after the last step
  std::vector<double> advantages;  // filled by compute_gae
  std::vector<double> returns;     // advantages + values

  int rows() const { return n_envs * steps_per_env; }
  void resize(int envs, int steps, int dim);
  const float* row_obs(int r) const { return obs.data() + std::size_t(r) * std::size_t(obs_dim); }

  // framed binary serialization (little-endian, versioned header)
  void save(const std::string& path) const;
  static RolloutBatch load(const std::string& path);
};

void compute_gae(RolloutBatch& batch, double gamma, double lambda);

// Separate (64, 64) swish policy and value networks over float stores.
struct ActorCritic {
  approx::ParamStore<float> pi_ps, v_ps;
  approx::Mlp<float> pi, v;
  int obs_dim = 0, n_actions = 0;

  ActorCritic() = default;
  ActorCritic(int obs_dim, int n_actions, Rng& rng);

  // sample an action; outputs log-probability and state value
  int act(const float* x, Rng& rng, float& logp, float& value) const;
  int greedy(const float* x) const;
  float value_of(const float* x) const;
  void action_logp(const float* x, std::vector<float>& logp) const;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int skipped_minibatches = 0;
};

// One PPO update (epochs x minibatches) over a completed batch with
// advantages computed. Minibatch order is drawn from rng.
PpoStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& cfg,
                    Rng& rng);

// Gradient accumulation for one index set without an optimizer step
// (exposed for the minibatch-invariance check).
void ppo_accumulate(ActorCritic& ac, const RolloutBatch& batch, const std::vector<int>& idx,
                    const PpoConfig& cfg, const std::vector<double>& advantages,
                    PpoStats& stats);

}  // namespace hetgoal

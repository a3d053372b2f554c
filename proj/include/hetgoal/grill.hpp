#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hetgoal/approx/net.hpp"
#include "hetgoal/approx/store.hpp"
#include "hetgoal/rollout.hpp"

namespace hetgoal {

// Demonstration set collected from two scripted heuristic agents. The goal
// annotation (the demonstrator's current target) is kept for the code-purity
// audit only; training never reads it.
struct OfflineDataset {
  std::string env_name;
  int obs_dim = 0, n_actions = 0, n_goals = 0;
  std::vector<std::int32_t> episode;  // per row
  std::vector<float> obs;             // [rows, obs_dim]
  std::vector<std::int32_t> actions;  // [rows]
  std::vector<std::int32_t> goals;    // [rows] demonstrator target

  long rows() const { return long(actions.size()); }
  void save(const std::string& path) const;
  static OfflineDataset load(const std::string& path);
};

OfflineDataset collect_offline_dataset(const std::string& env_name, long n_steps,
                                       const EpisodeOpts& opts, std::uint64_t seed);

// Fixed-length training segments: trajectories split at episode/annotation
// boundaries and chunked to length T with validity padding.
struct SegmentSet {
  int seg_len = 0, obs_dim = 0, n_actions = 0, n_goals = 0;
  std::vector<float> obs;              // [n, T, obs_dim]
  std::vector<std::int32_t> actions;   // [n, T]
  std::vector<std::uint8_t> valid;     // [n, T]
  std::vector<std::int32_t> goal;      // [n] annotation (constant per segment)

  int count() const { return int(goal.size()); }
  const float* seg_obs(int s) const {
    return obs.data() + std::size_t(s) * std::size_t(seg_len) * std::size_t(obs_dim);
  }
  const std::int32_t* seg_actions(int s) const {
    return actions.data() + std::size_t(s) * std::size_t(seg_len);
  }
  const std::uint8_t* seg_valid(int s) const {
    return valid.data() + std::size_t(s) * std::size_t(seg_len);
  }
};

SegmentSet segment_trajectories(const OfflineDataset& ds, int seg_len);

struct Stage1Config {
  int code_count = 5;  // K
  int seg_len = 10;    // T (10 reaching, 15 foraging)
  double lambda = 0.5;
  double lr = 1e-3;
  int epochs = 20;
  int minibatch = 256;
  double tau_start = 1.0, tau_end = 0.5;
  // Independent random restarts; the model with the lowest final-epoch
  // behaviour-cloning loss wins (selection is unsupervised — goal annotations
  // are never consulted). The straight-through bottleneck has poor local
  // optima where two goals share a code, so restarts matter.
  int restarts = 1;
  std::uint64_t seed = 0;
};

// Offline encoder-decoder model: LSTM encoder over (o_t, a_t) pairs ending in
// a straight-through discrete code, an action decoder (behaviour cloning) and
// a final-observation decoder.
struct Stage1Model {
  approx::ParamStore<float> ps;
  approx::SeqEncoder<float> enc;  // obs+A -> 64 LSTM -> 64 dense -> K logits
  approx::GumbelHead<float> head;
  approx::Mlp<float> dec1;  // obs+K -> relu(64,64) -> action logits
  approx::Mlp<float> dec2;  // obs+K -> relu(64,64) -> predicted last obs
  int obs_dim = 0, n_actions = 0, code_count = 0, seg_len = 0;

  Stage1Model() = default;
  Stage1Model(int obs_dim, int n_actions, const Stage1Config& cfg, Rng& rng);

  // evaluation-mode code for a (possibly partial) segment
  int encode(const float* seg_obs, const std::int32_t* seg_actions,
             const std::uint8_t* seg_valid, int T) const;
  // log pi(a | o, code) of the frozen action decoder
  void action_logp(const float* obs, int code, std::vector<float>& logp) const;
  float* decode_obs(const float* first_obs, int code, std::vector<float>& out) const;

  void save(const std::string& path) const;
  static Stage1Model load(const std::string& path);
};

struct Stage1Stats {
  std::vector<double> loss_curve;      // per epoch, total loss (winning restart)
  double action_loss = 0.0;            // final epoch
  double obs_loss = 0.0;
  std::vector<double> restart_losses;  // final loss of every restart
};

Stage1Stats train_stage1(Stage1Model& model, const SegmentSet& segments,
                         const Stage1Config& cfg);

// Fraction of segments whose code matches the code's majority annotation.
double code_purity(const Stage1Model& model, const SegmentSet& segments);

// LIAM-style auxiliary model: LSTM over (o_t, a_{t-1}) to an embedding z_t,
// trained online to predict the teammate's action. Keeps per-env recurrences
// so rollouts can advance it concurrently; update() runs truncated BPTT over
// the windows cached since begin_window().
struct AuxModel {
  approx::ParamStore<float> ps;
  approx::SeqEncoder<float> enc;  // obs+A -> 64 LSTM -> 64 dense -> z
  approx::Mlp<float> dec;         // z -> relu(64,64) -> teammate action logits
  int obs_dim = 0, n_prim_actions = 0, n_tm_actions = 0, z_dim = 0;
  double lr = 1e-3;
  double max_grad_norm = 0.5;

  struct Window {
    approx::SeqEncoder<float>::Ws ws;
    std::vector<int> labels;
  };
  struct EnvState {
    Window open;
    std::vector<Window> closed;
  };
  std::vector<EnvState> envs;

  AuxModel() = default;
  AuxModel(int obs_dim, int n_prim_actions, int n_tm_actions, int z_dim, int n_envs,
           Rng& rng);

  void begin_window();       // truncation point: keep state, drop caches
  void reset_env(int e);     // episode boundary: archive window, zero state
  // advance env e with (obs, one-hot prev primitive action); returns z_t
  const std::vector<float>& step(int e, const float* obs, int prev_action);
  // z for a hypothetical next step without advancing the recurrence
  std::vector<float> peek(int e, const float* obs, int prev_action) const;
  void label(int e, int tm_action);
  double update();  // mean cross-entropy over cached labeled steps

 private:
  void build_input(const float* obs, int prev_action, std::vector<float>& x) const;
};

// PPO over raw observations.
class FlatAgent : public RolloutAgent {
 public:
  FlatAgent(int obs_dim, int n_actions, Rng& rng) : ac(obs_dim, n_actions, rng) {}
  int ppo_obs_dim() const override { return ac.obs_dim; }
  int ppo_action_count() const override { return ac.n_actions; }
  void episode_begin(int) override {}
  Decision act(int env_idx, const std::vector<float>& env_obs, Rng& rng,
               float* ppo_obs_out) override;
  float bootstrap_value(int env_idx, const std::vector<float>& env_obs) override;

  ActorCritic ac;
};

// PPO over [obs, z] with the auxiliary teammate model (LIAM baseline).
class LiamAgent : public RolloutAgent {
 public:
  LiamAgent(int obs_dim, int n_actions, int n_tm_actions, int z_dim, int n_envs,
            Rng& rng);
  int ppo_obs_dim() const override { return ac.obs_dim; }
  int ppo_action_count() const override { return ac.n_actions; }
  void episode_begin(int env_idx) override;
  Decision act(int env_idx, const std::vector<float>& env_obs, Rng& rng,
               float* ppo_obs_out) override;
  void post_step(int env_idx, int tm_action, bool done) override;
  float bootstrap_value(int env_idx, const std::vector<float>& env_obs) override;
  void batch_begin() override { aux.begin_window(); }

  AuxModel aux;
  ActorCritic ac;
  std::vector<int> prev_action;  // per env, -1 at episode start
};

// Hierarchical agent: PPO selects one of K goal codes each step, the frozen
// stage-1 action decoder emits the primitive. with_aux = GRILL-M (adds the
// auxiliary embedding to the high-level input). commit_interval > 1 holds the
// selected code for that many steps (option-style ablation): held steps are
// recorded with the policy's own log-probability of the held code, so PPO
// updates stay on the per-step objective while exploration becomes temporally
// extended.
class GrillAgent : public RolloutAgent {
 public:
  GrillAgent(std::shared_ptr<const Stage1Model> stage1, int n_tm_actions, int n_envs,
             bool with_aux, int z_dim, Rng& rng);
  int ppo_obs_dim() const override { return ac.obs_dim; }
  int ppo_action_count() const override { return ac.n_actions; }
  void episode_begin(int env_idx) override;
  Decision act(int env_idx, const std::vector<float>& env_obs, Rng& rng,
               float* ppo_obs_out) override;
  void post_step(int env_idx, int tm_action, bool done) override;
  float bootstrap_value(int env_idx, const std::vector<float>& env_obs) override;
  void batch_begin() override {
    if (with_aux) aux.begin_window();
  }

  std::shared_ptr<const Stage1Model> stage1;
  bool with_aux = false;
  int commit_interval = 1;  // steps a selected code is held (1 = paper default)
  AuxModel aux;
  ActorCritic ac;
  std::vector<int> prev_action;  // previous primitive action per env
  std::vector<int> held_code;    // per env, code held under commitment
  std::vector<int> hold_left;    // per env, held steps remaining
};

}  // namespace hetgoal

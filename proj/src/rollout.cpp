#include "hetgoal/rollout.hpp"

#include <stdexcept>

#include "hetgoal/env_foraging.hpp"
#include "hetgoal/env_reaching.hpp"

namespace hetgoal {

EgoEnv::EgoEnv(std::unique_ptr<Env> env, std::uint64_t stream_seed)
    : env_(std::move(env)), stream_(stream_seed) {}

const std::vector<float>& EgoEnv::reset(const EpisodeOpts& opts) {
  if (opts.mix.empty()) throw std::invalid_argument("EgoEnv: empty scenario mix");
  EpisodeConfig cfg;
  cfg.scenario = opts.mix[std::size_t(stream_.uniform_int(opts.mix.size()))];
  cfg.sigma2 = opts.sigma2;
  cfg.cue_visible = opts.cue_visible;
  cfg.seed = stream_.next_u64();
  return reset_with(cfg);
}

const std::vector<float>& EgoEnv::reset_with(const EpisodeConfig& config) {
  env_->reset(config);
  obs_ = env_->observe(0);
  tm_rng_ = Rng(mix_seed(config.seed, 0x7e17));
  teammate_.reset();
  needs_reset_ = false;
  if (tracing_) {
    trace_ = EpisodeTrace{};
    trace_.env_kind = env_->kind();
    if (const auto* r = dynamic_cast<const ReachEnv*>(env_.get()))
      trace_.grid_side = r->grid_side();
    else if (const auto* f = dynamic_cast<const ForageEnv*>(env_.get()))
      trace_.grid_side = f->grid_side();
    trace_.config = config;
    trace_.ego_mask = env_->mask(0);
    trace_.tm_mask = env_->mask(1);
    trace_.start_pos = {env_->position(0), env_->position(1)};
  }
  return obs_;
}

void EgoEnv::record_step(const std::array<int, 2>& actions, const StepOutcome& out) {
  TraceStep s;
  s.pos = {env_->position(0), env_->position(1)};
  s.actions = actions;
  s.rewards = out.rewards;
  s.achieved = out.achieved;
  s.collects = out.collects;
  trace_.steps.push_back(std::move(s));
}

EgoEnv::EgoStep EgoEnv::step(int ego_action) {
  if (needs_reset_) throw std::logic_error("EgoEnv: step before reset");
  EgoStep out;
  int a0 = ego_action;
  bool first = true;
  while (true) {
    const int tm =
        env_->frozen(1) ? env_->noop_action() : teammate_.act(*env_, tm_rng_);
    const std::array<int, 2> joint{a0, tm};
    const StepOutcome so = env_->step(joint);
    ++env_steps_;
    if (first) {
      out.tm_action = tm;
      first = false;
    }
    out.reward += so.rewards[0];
    if (tracing_) record_step(joint, so);
    if (so.terminated) {
      out.done = true;
      needs_reset_ = true;
      break;
    }
    // ego absorbed in CR: burn the tail of the episode without querying the
    // policy, folding any pending joint-corner reward into this transition
    if (env_->frozen(0)) {
      a0 = env_->noop_action();
      continue;
    }
    break;
  }
  if (!out.done) obs_ = env_->observe(0);
  return out;
}

void EgoEnv::begin_trace() {
  tracing_ = true;
  trace_ = EpisodeTrace{};
}

EpisodeTrace EgoEnv::take_trace() {
  tracing_ = false;
  return std::move(trace_);
}

RolloutBatch collect_rollout(std::vector<std::unique_ptr<EgoEnv>>& envs, RolloutAgent& agent,
                             int steps_per_env, const EpisodeOpts& opts, bool parallel) {
  const int n_envs = int(envs.size());
  if (n_envs == 0 || steps_per_env <= 0)
    throw std::invalid_argument("collect_rollout: empty rollout");
  RolloutBatch batch;
  batch.resize(n_envs, steps_per_env, agent.ppo_obs_dim());

  agent.batch_begin();
  for (int e = 0; e < n_envs; ++e) {
    if (envs[std::size_t(e)]->needs_reset()) {
      envs[std::size_t(e)]->reset(opts);
      agent.episode_begin(e);
    }
  }
  for (int t = 0; t < steps_per_env; ++t) {
#pragma omp parallel for schedule(static) if (parallel)
    for (int e = 0; e < n_envs; ++e) {
      EgoEnv& env = *envs[std::size_t(e)];
      const int r = e * steps_per_env + t;
      float* obs_row = batch.obs.data() + std::size_t(r) * std::size_t(batch.obs_dim);
      const auto d = agent.act(e, env.obs(), env.rng(), obs_row);
      const auto st = env.step(d.env_action);
      batch.actions[std::size_t(r)] = d.ppo_action;
      batch.logp[std::size_t(r)] = d.logp;
      batch.values[std::size_t(r)] = d.value;
      batch.rewards[std::size_t(r)] = float(st.reward);
      batch.dones[std::size_t(r)] = st.done ? 1 : 0;
      agent.post_step(e, st.tm_action, st.done);
      if (st.done) {
        env.reset(opts);
        agent.episode_begin(e);
      }
    }
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (int e = 0; e < n_envs; ++e)
    batch.bootstrap[std::size_t(e)] =
        agent.bootstrap_value(e, envs[std::size_t(e)]->obs());
  return batch;
}

std::vector<std::unique_ptr<EgoEnv>> make_env_instances(const std::string& env_name,
                                                        int n_envs, std::uint64_t run_seed) {
  std::vector<std::unique_ptr<EgoEnv>> out;
  out.reserve(std::size_t(n_envs));
  for (int i = 0; i < n_envs; ++i)
    out.push_back(std::make_unique<EgoEnv>(make_env(env_name),
                                           mix_seed(run_seed, std::uint64_t(i))));
  return out;
}

}  // namespace hetgoal

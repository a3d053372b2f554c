#include "hetgoal/train.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hetgoal/approx/checkpoint.hpp"

namespace hetgoal {

namespace {

constexpr const char* kCodeVersion = "hetgoal-1.0.0";

bool is_grill(const std::string& method) {
  return method == "grill" || method == "grill-m";
}

nlohmann::json config_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["method"] = cfg.method;
  j["env"] = cfg.env_name;
  j["total_steps"] = cfg.total_steps;
  j["dataset_steps"] = cfg.dataset_steps;
  j["seed"] = cfg.seed;
  j["sigma2"] = cfg.sigma2;
  j["cue_visible"] = cfg.cue_visible;
  j["z_dim"] = cfg.z_dim;
  j["ppo"] = {{"batch_size", cfg.ppo.batch_size}, {"minibatches", cfg.ppo.minibatches},
              {"epochs", cfg.ppo.epochs},         {"lr", cfg.ppo.lr},
              {"gamma", cfg.ppo.gamma},           {"gae_lambda", cfg.ppo.gae_lambda},
              {"clip_eps", cfg.ppo.clip_eps},     {"entropy_coef", cfg.ppo.entropy_coef},
              {"value_coef", cfg.ppo.value_coef}, {"max_grad_norm", cfg.ppo.max_grad_norm},
              {"n_envs", cfg.ppo.n_envs}};
  j["stage1"] = {{"code_count", cfg.stage1.code_count}, {"seg_len", cfg.stage1.seg_len},
                 {"lambda", cfg.stage1.lambda},         {"lr", cfg.stage1.lr},
                 {"epochs", cfg.stage1.epochs},         {"minibatch", cfg.stage1.minibatch},
                 {"tau_start", cfg.stage1.tau_start},   {"tau_end", cfg.stage1.tau_end},
                 {"restarts", cfg.stage1.restarts}};
  std::vector<std::string> mix;
  for (auto s : cfg.mix) mix.push_back(scenario_name(s));
  j["scenario_mix"] = mix;
  j["version"] = kCodeVersion;
  return j;
}

}  // namespace

void TrainConfig::validate() const {
  if (method != "ppo" && method != "liam" && method != "grill" && method != "grill-m")
    throw std::invalid_argument("train: unknown method " + method);
  if (env_name != "reach" && env_name != "lbf")
    throw std::invalid_argument("train: unknown env " + env_name);
  if (total_steps <= 0) throw std::invalid_argument("train: total_steps must be positive");
  if (is_grill(method)) {
    if (dataset_steps <= 0)
      throw std::invalid_argument("train: grill methods need dataset_steps > 0");
    if (total_steps <= dataset_steps)
      throw std::invalid_argument(
          "train: total_steps must exceed dataset_steps for grill methods");
  }
  ppo.validate();
}

TrainResult train_run(const TrainConfig& cfg_in,
                      const std::function<void(long, long)>& progress) {
  TrainConfig cfg = cfg_in;
  cfg.validate();
  const auto probe = make_env(cfg.env_name);
  const int obs_dim = probe->spec().observation_length;
  const int n_actions = probe->spec().action_count;
  const int n_goals = probe->spec().goal_space.size();
  // over-provisioned code space: a dominant goal may legitimately split into
  // several pure codes, and spare codes de-risk straight-through collapse
  if (cfg.stage1.code_count <= 0) cfg.stage1.code_count = n_goals + 3;
  if (cfg.stage1.seg_len <= 0)
    cfg.stage1.seg_len = probe->kind() == EnvKind::Reaching ? 10 : 15;

  const bool to_disk = !cfg.out_dir.empty();
  if (to_disk) std::filesystem::create_directories(cfg.out_dir);

  EpisodeOpts opts;
  opts.mix = cfg.mix;
  opts.sigma2 = cfg.sigma2;
  opts.cue_visible = cfg.cue_visible;

  TrainResult result;
  double stage1_final_loss = 0.0, stage1_purity = -1.0;
  if (is_grill(cfg.method)) {
    if (!cfg.stage1_path.empty()) {
      result.stage1 = std::make_shared<Stage1Model>(Stage1Model::load(cfg.stage1_path));
    } else {
      OfflineDataset ds = cfg.dataset_path.empty()
                              ? collect_offline_dataset(cfg.env_name, cfg.dataset_steps,
                                                        opts, mix_seed(cfg.seed, 0xDA7A))
                              : OfflineDataset::load(cfg.dataset_path);
      if (ds.obs_dim != obs_dim || ds.n_actions != n_actions)
        throw std::invalid_argument("train: dataset/env mismatch");
      const SegmentSet segs = segment_trajectories(ds, cfg.stage1.seg_len);
      Stage1Config s1 = cfg.stage1;
      s1.seed = mix_seed(cfg.seed, 0x57A6E1);
      Rng s1_rng(mix_seed(cfg.seed, 0x57A6E0));
      result.stage1 = std::make_shared<Stage1Model>(obs_dim, n_actions, s1, s1_rng);
      const auto stats = train_stage1(*result.stage1, segs, s1);
      stage1_final_loss = stats.loss_curve.empty() ? 0.0 : stats.loss_curve.back();
      stage1_purity = code_purity(*result.stage1, segs);
    }
    if (to_disk) result.stage1->save(cfg.out_dir + "/stage1.bin");
  }

  Rng init_rng(mix_seed(cfg.seed, 0x1217));
  std::shared_ptr<RolloutAgent> agent;
  ActorCritic* ac = nullptr;
  AuxModel* aux = nullptr;
  if (cfg.method == "ppo") {
    auto a = std::make_shared<FlatAgent>(obs_dim, n_actions, init_rng);
    ac = &a->ac;
    agent = a;
  } else if (cfg.method == "liam") {
    auto a = std::make_shared<LiamAgent>(obs_dim, n_actions, n_actions, cfg.z_dim,
                                         cfg.ppo.n_envs, init_rng);
    ac = &a->ac;
    aux = &a->aux;
    agent = a;
  } else {
    auto a = std::make_shared<GrillAgent>(result.stage1, n_actions, cfg.ppo.n_envs,
                                          cfg.method == "grill-m", cfg.z_dim, init_rng);
    ac = &a->ac;
    if (cfg.method == "grill-m") aux = &a->aux;
    agent = a;
  }
  result.agent = agent;

  auto envs = make_env_instances(cfg.env_name, cfg.ppo.n_envs, mix_seed(cfg.seed, 0xE4B5));
  Rng update_rng(mix_seed(cfg.seed, 0x0BD4));

  const long online_budget =
      is_grill(cfg.method) ? cfg.total_steps - cfg.dataset_steps : cfg.total_steps;
  const long n_updates = online_budget / cfg.ppo.batch_size;
  const int steps_per_env = cfg.ppo.steps_per_env();

  std::ofstream metrics;
  if (to_disk) {
    metrics.open(cfg.out_dir + "/metrics.jsonl");
    if (!metrics) throw std::runtime_error("cannot write metrics.jsonl in " + cfg.out_dir);
  }

  std::vector<double> run_ret(std::size_t(cfg.ppo.n_envs), 0.0);
  std::vector<double> tail_returns;  // completed episodes in the last 10% of updates
  const long tail_from = n_updates - std::max<long>(1, n_updates / 10);
  long next_ckpt = cfg.checkpoint_every;

  auto save_checkpoint = [&](const std::string& dir) {
    std::filesystem::create_directories(dir);
    approx::save_store(ac->pi_ps, dir + "/pi.bin");
    approx::save_store(ac->v_ps, dir + "/v.bin");
    if (aux) approx::save_store(aux->ps, dir + "/aux.bin");
  };

  for (long u = 0; u < n_updates; ++u) {
    RolloutBatch batch =
        collect_rollout(envs, *agent, steps_per_env, opts, cfg.parallel);
    compute_gae(batch, cfg.ppo.gamma, cfg.ppo.gae_lambda);
    const PpoStats stats = ppo_update(*ac, batch, cfg.ppo, update_rng);
    const double aux_loss = aux ? aux->update() : 0.0;

    // episodic returns, fixed (env, step) order
    double ep_sum = 0.0;
    long ep_n = 0;
    for (int e = 0; e < batch.n_envs; ++e) {
      for (int t = 0; t < batch.steps_per_env; ++t) {
        const int r = e * batch.steps_per_env + t;
        run_ret[std::size_t(e)] += double(batch.rewards[std::size_t(r)]);
        if (batch.dones[std::size_t(r)]) {
          ep_sum += run_ret[std::size_t(e)];
          ++ep_n;
          if (u >= tail_from) tail_returns.push_back(run_ret[std::size_t(e)]);
          run_ret[std::size_t(e)] = 0.0;
        }
      }
    }
    const long steps_done = (u + 1) * cfg.ppo.batch_size;
    if (to_disk) {
      nlohmann::json row;
      row["update"] = u;
      row["online_steps"] = steps_done;
      row["total_steps"] = steps_done + (is_grill(cfg.method) ? cfg.dataset_steps : 0);
      row["episodes"] = ep_n;
      row["mean_episode_return"] = ep_n > 0 ? ep_sum / double(ep_n) : 0.0;
      row["policy_loss"] = stats.policy_loss;
      row["value_loss"] = stats.value_loss;
      row["entropy"] = stats.entropy;
      row["clip_fraction"] = stats.clip_fraction;
      row["skipped_minibatches"] = stats.skipped_minibatches;
      if (aux) row["aux_loss"] = aux_loss;
      metrics << row.dump() << "\n";
    }
    if (to_disk && steps_done >= next_ckpt && u + 1 < n_updates) {
      save_checkpoint(cfg.out_dir + "/ckpt_" + std::to_string(steps_done));
      while (next_ckpt <= steps_done) next_ckpt += cfg.checkpoint_every;
    }
    if (progress) progress(u + 1, steps_done);
  }
  result.online_steps = n_updates * cfg.ppo.batch_size;
  result.updates = n_updates;
  if (!tail_returns.empty()) {
    double s = 0.0;
    for (double x : tail_returns) s += x;
    result.final_mean_return = s / double(tail_returns.size());
  }

  if (to_disk) {
    save_checkpoint(cfg.out_dir);
    nlohmann::json manifest = config_json(cfg);
    manifest["obs_dim"] = obs_dim;
    manifest["n_actions"] = n_actions;
    manifest["n_goals"] = n_goals;
    manifest["updates"] = result.updates;
    manifest["online_steps"] = result.online_steps;
    manifest["final_mean_return"] = result.final_mean_return;
    if (is_grill(cfg.method)) {
      manifest["stage1_file"] = "stage1.bin";
      if (stage1_purity >= 0.0) {
        manifest["stage1_final_loss"] = stage1_final_loss;
        manifest["stage1_purity"] = stage1_purity;
      }
    }
    std::ofstream mf(cfg.out_dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw std::runtime_error("cannot write manifest.json in " + cfg.out_dir);
  }
  return result;
}

LoadedAgent load_agent(const std::string& run_dir) {
  std::ifstream mf(run_dir + "/manifest.json");
  if (!mf) throw std::runtime_error("no manifest.json in " + run_dir);
  nlohmann::json m = nlohmann::json::parse(mf);
  LoadedAgent out;
  out.method = m.at("method").get<std::string>();
  out.env_name = m.at("env").get<std::string>();
  const int obs_dim = m.at("obs_dim").get<int>();
  const int n_actions = m.at("n_actions").get<int>();
  const int z_dim = m.at("z_dim").get<int>();
  const std::uint64_t seed = m.at("seed").get<std::uint64_t>();
  const int n_envs = m.at("ppo").at("n_envs").get<int>();

  Rng init_rng(mix_seed(seed, 0x1217));
  ActorCritic* ac = nullptr;
  AuxModel* aux = nullptr;
  if (out.method == "ppo") {
    auto a = std::make_shared<FlatAgent>(obs_dim, n_actions, init_rng);
    ac = &a->ac;
    out.agent = a;
  } else if (out.method == "liam") {
    auto a = std::make_shared<LiamAgent>(obs_dim, n_actions, n_actions, z_dim, n_envs,
                                         init_rng);
    ac = &a->ac;
    aux = &a->aux;
    out.agent = a;
  } else if (out.method == "grill" || out.method == "grill-m") {
    auto stage1 = std::make_shared<Stage1Model>(
        Stage1Model::load(run_dir + "/" + m.at("stage1_file").get<std::string>()));
    auto a = std::make_shared<GrillAgent>(stage1, n_actions, n_envs,
                                          out.method == "grill-m", z_dim, init_rng);
    ac = &a->ac;
    if (out.method == "grill-m") aux = &a->aux;
    out.agent = a;
  } else {
    throw std::runtime_error("load_agent: unknown method " + out.method);
  }
  approx::load_store(ac->pi_ps, run_dir + "/pi.bin");
  approx::load_store(ac->v_ps, run_dir + "/v.bin");
  if (aux) approx::load_store(aux->ps, run_dir + "/aux.bin");
  return out;
}

}  // namespace hetgoal

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "hetgoal/grill.hpp"
#include "hetgoal/ppo.hpp"
#include "hetgoal/rollout.hpp"

namespace hetgoal {

struct TrainConfig {
  std::string method = "ppo";  // ppo | liam | grill | grill-m
  std::string env_name = "reach";
  long total_steps = 2'000'000;   // full budget (includes the offline dataset)
  long dataset_steps = 200'000;   // stage-1 dataset size for grill methods
  std::uint64_t seed = 0;
  PpoConfig ppo;
  Stage1Config stage1 = {.restarts = 3};  // code_count/seg_len <= 0 means env defaults
  int z_dim = 10;
  double sigma2 = 0.05;
  bool cue_visible = true;
  std::vector<ScenarioKind> mix = {ScenarioKind::FullOverlap, ScenarioKind::PartialOverlap,
                                   ScenarioKind::NoOverlap};
  std::string out_dir;          // empty: no files written
  std::string dataset_path;     // pre-collected dataset (grill methods)
  std::string stage1_path;      // pre-trained stage-1 checkpoint (skips stage 1)
  long checkpoint_every = 100'000;
  bool parallel = true;

  void validate() const;
};

struct TrainResult {
  std::shared_ptr<RolloutAgent> agent;
  std::shared_ptr<Stage1Model> stage1;  // grill methods only
  long online_steps = 0;
  long updates = 0;
  double final_mean_return = 0.0;  // over the last 10% of updates
};

// Full training pipeline for one (method, env, seed). Writes metrics.jsonl
// (one row per PPO update, no timestamps), checkpoints and manifest.json when
// out_dir is set. progress, if given, is called after each update.
TrainResult train_run(const TrainConfig& cfg,
                      const std::function<void(long updates, long steps)>& progress = {});

// Rebuilds the trained agent recorded in a run directory's manifest.
struct LoadedAgent {
  std::shared_ptr<RolloutAgent> agent;
  std::string env_name;
  std::string method;
};
LoadedAgent load_agent(const std::string& run_dir);

}  // namespace hetgoal

// Benchmarks the OpenMP rollout/evaluation kernels against the serial
// reference path and verifies bit-identical results.
#include <chrono>
#include <cstring>
#include <iostream>

#include <omp.h>

#include "hetgoal/evalkit.hpp"
#include "hetgoal/grill.hpp"

using namespace hetgoal;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_it(F&& f) {
  const double t0 = now();
  f();
  return now() - t0;
}

RolloutBatch run_rollouts(bool parallel, int batches) {
  Rng rng(1);
  auto probe = make_env("reach");
  FlatAgent agent(probe->spec().observation_length, probe->spec().action_count, rng);
  auto envs = make_env_instances("reach", 16, 42);
  EpisodeOpts opts;
  RolloutBatch last;
  for (int b = 0; b < batches; ++b) last = collect_rollout(envs, agent, 64, opts, parallel);
  return last;
}

}  // namespace

int main(int argc, char** argv) {
  const int batches = argc > 1 ? std::atoi(argv[1]) : 50;
  const int episodes = argc > 2 ? std::atoi(argv[2]) : 500;
  std::cout << "omp max threads: " << omp_get_max_threads() << "\n";

  RolloutBatch serial_batch, parallel_batch;
  const double t_roll_s = time_it([&] { serial_batch = run_rollouts(false, batches); });
  const double t_roll_p = time_it([&] { parallel_batch = run_rollouts(true, batches); });
  const bool roll_same =
      serial_batch.obs == parallel_batch.obs && serial_batch.actions == parallel_batch.actions &&
      serial_batch.rewards == parallel_batch.rewards && serial_batch.dones == parallel_batch.dones;
  std::cout << "rollout  (" << batches << " x 16x64): serial " << t_roll_s << " s, openmp "
            << t_roll_p << " s, speedup " << t_roll_s / t_roll_p
            << (roll_same ? " [bit-identical]" : " [MISMATCH]") << "\n";

  OraclePolicy oracle;
  EvalOptions opt;
  opt.episodes = episodes;
  EvalReport rs, rp;
  opt.parallel = false;
  const double t_eval_s =
      time_it([&] { rs = evaluate("reach", oracle, ScenarioKind::PartialOverlap, opt); });
  opt.parallel = true;
  const double t_eval_p =
      time_it([&] { rp = evaluate("reach", oracle, ScenarioKind::PartialOverlap, opt); });
  const bool eval_same = rs.episode_returns == rp.episode_returns;
  std::cout << "evaluate (" << episodes << " episodes): serial " << t_eval_s << " s, openmp "
            << t_eval_p << " s, speedup " << t_eval_s / t_eval_p
            << (eval_same ? " [bit-identical]" : " [MISMATCH]") << "\n";
  return roll_same && eval_same ? 0 : 1;
}

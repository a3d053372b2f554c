#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hetgoal/rollout.hpp"
#include "hetgoal/trace.hpp"

namespace hetgoal {

// Four-way partition of goal attempts; the three failure modes are
// Unrewarding, FutileCooperative (over-collaborative) and, by its absence,
// under-collaboration (low CooperativeWorthwhile share).
enum class SubsetTag : int {
  Unrewarding = 0,
  FutileCooperative = 1,
  SoloWorthwhile = 2,
  CooperativeWorthwhile = 3,
};
const char* subset_name(SubsetTag tag);

struct GoalAttempt {
  int episode = 0;
  int goal_id = -1;
  SubsetTag tag = SubsetTag::Unrewarding;
};

// CR: the ego agent's first goal-tile occupancy; LBF: one attempt per
// contiguous run of collects at the same fruit. Tags are left default.
std::vector<GoalAttempt> detect_attempts(const EpisodeTrace& trace);

SubsetTag classify_attempt(int goal_id, const GoalMask& ego_mask,
                           const GoalMask& teammate_mask, const GoalSpace& space);

struct EvalReport {
  std::string label;       // method/policy name (caller-supplied)
  std::string scenario;
  int episodes = 0;
  std::uint64_t eval_seed = 0;
  double mean_return = 0.0;
  double oracle_mean_return = 0.0;
  double oracle_relative = 0.0;  // mean(policy) / mean(oracle), matched seeds
  double relative_ci_lo = 0.0, relative_ci_hi = 0.0;  // 90% bootstrap
  long attempt_count = 0;
  std::array<long, 4> subset_counts{};
  std::array<double, 4> subset_props{};
  double nonsolo_attempt_prop = 0.0;
  std::vector<double> episode_returns;         // per episode, fixed order
  std::vector<double> oracle_episode_returns;  // matched seeds

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row(std::uint64_t run_seed) const;
};

// One primitive action per ego decision. Stateless policies may be evaluated
// on parallel workers.
class EpisodePolicy {
 public:
  virtual ~EpisodePolicy() = default;
  virtual void begin(std::uint64_t episode_seed) { (void)episode_seed; }
  virtual int act(const Env& env, const std::vector<float>& ego_obs, Rng& rng) = 0;
  virtual bool stateless() const { return false; }
};

class OraclePolicy final : public EpisodePolicy {
 public:
  int act(const Env& env, const std::vector<float>&, Rng&) override;
  bool stateless() const override { return true; }
};

class RandomPolicy final : public EpisodePolicy {
 public:
  int act(const Env& env, const std::vector<float>&, Rng& rng) override;
  bool stateless() const override { return true; }
};

// Wraps a trained RolloutAgent (uses its env slot 0).
class AgentPolicy final : public EpisodePolicy {
 public:
  explicit AgentPolicy(RolloutAgent& agent) : agent_(agent) {}
  void begin(std::uint64_t episode_seed) override;
  int act(const Env& env, const std::vector<float>& ego_obs, Rng& rng) override;

 private:
  RolloutAgent& agent_;
  std::vector<float> scratch_;
};

struct EvalOptions {
  int episodes = 1000;
  std::uint64_t seed = 0;
  double sigma2 = 0.05;
  bool cue_visible = true;
  bool parallel = true;  // applies to stateless policies only
};

// Runs matched-seed policy and oracle episodes; asserts the structural zeros
// (FutileCooperative under FullOverlap, CooperativeWorthwhile under
// NoOverlap) and throws if violated.
EvalReport evaluate(const std::string& env_name, EpisodePolicy& policy,
                    ScenarioKind scenario, const EvalOptions& opt,
                    std::vector<EpisodeTrace>* traces = nullptr);

// Δ_coop: non-solo attempt proportion (FullOverlap) minus the same
// (NoOverlap); missing when either report has zero attempts.
std::optional<double> delta_coop(const EvalReport& full, const EvalReport& none);

// Percentile bootstrap CI for the mean.
std::pair<double, double> bootstrap_ci(const std::vector<double>& xs, double conf = 0.9,
                                       int resamples = 2000, std::uint64_t seed = 7);

// Ratio-of-means bootstrap CI (paired numerator/denominator samples).
std::pair<double, double> bootstrap_ratio_ci(const std::vector<double>& num,
                                             const std::vector<double>& den,
                                             double conf = 0.9, int resamples = 2000,
                                             std::uint64_t seed = 7);

struct SweepRow {
  std::string condition;  // "sigma_<v>" or "absent"
  std::string method;
  std::uint64_t seed = 0;
  double mean_return = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;

  double mean(const std::string& condition, const std::string& method) const;
  // 100 * (GRILL-M - GRILL) / GRILL for one condition
  double gap_pct(const std::string& condition) const;
  std::string to_csv() const;
};

// Fig. 7-style export: per-episode agent polylines as CSV and an SVG overlay
// (one path per episode, deterministic jitter). CR traces only.
void export_trajectories(const std::vector<EpisodeTrace>& traces,
                         const std::string& csv_path, const std::string& svg_path);

}  // namespace hetgoal

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetgoal/rng.hpp"

namespace hetgoal {

class Rng;

// A goal is a subset of the one-step transition space plus a scalar reward.
// The transition predicate itself lives in the environments (they report
// achieved goal ids per step); here we keep the catalogue data.
struct Goal {
  int id = 0;
  std::string tag;          // e.g. "corner_nw", "apple_l2"
  double base_reward = 0.0; // r_g, > 0
  bool solo = false;        // achievable by a single agent
};

class GoalSpace {
 public:
  GoalSpace() = default;
  // Validates: ids 0..n-1 without gaps, base_reward > 0, and every
  // cooperative reward strictly above every solo reward.
  explicit GoalSpace(std::vector<Goal> goals);

  int size() const { return int(goals_.size()); }
  const Goal& goal(int id) const { return goals_.at(std::size_t(id)); }
  const std::vector<Goal>& goals() const { return goals_; }

  std::string to_json() const;

 private:
  std::vector<Goal> goals_;
};

// Binary reward mask over a goal space.
struct GoalMask {
  std::vector<std::uint8_t> bits;

  GoalMask() = default;
  explicit GoalMask(int n) : bits(std::size_t(n), 0) {}
  static GoalMask from_bits(std::initializer_list<int> b) {
    GoalMask m;
    for (int x : b) m.bits.push_back(std::uint8_t(x != 0));
    return m;
  }

  int size() const { return int(bits.size()); }
  bool test(int i) const { return bits[std::size_t(i)] != 0; }
  void set(int i, bool v = true) { bits[std::size_t(i)] = v ? 1 : 0; }
  bool empty() const {
    for (auto b : bits)
      if (b) return false;
    return true;
  }
  int count() const {
    int c = 0;
    for (auto b : bits) c += b != 0;
    return c;
  }
  bool operator==(const GoalMask& o) const { return bits == o.bits; }
};

// Noisy observable cue phi ~ N(mask, sigma^2 I). Values are unclamped.
struct Cue {
  std::vector<double> values;
  double sigma2 = 0.0;
};

enum class ScenarioKind { FullOverlap, PartialOverlap, NoOverlap };

const char* scenario_name(ScenarioKind k);
ScenarioKind scenario_from_name(const std::string& name);

// G* = G_ego intersect (G_teammates union G_solo), where G_teammates is the
// bitwise union of teammate masks and G_solo the solo-flagged goals.
GoalMask worthwhile_set(const GoalMask& ego, const std::vector<GoalMask>& teammates,
                        const GoalSpace& space);

// FullOverlap iff ego subset of union(teammates); NoOverlap iff the
// intersection is empty; PartialOverlap otherwise. Requires nonempty ego.
ScenarioKind classify_scenario(const GoalMask& ego, const std::vector<GoalMask>& teammates);

Cue sample_cue(const GoalMask& mask, double sigma2, Rng& rng);

// Scenario membership as used for episode setup: classification over the
// cooperative (non-solo) goals only. Mandatory shared solo goals (the CR
// center tile) would otherwise make NoOverlap unrealizable.
ScenarioKind classify_scenario_cooperative(const GoalMask& ego, const GoalMask& teammate,
                                           const GoalSpace& space);

// Uniform sampler over valid (ego, teammate) mask pairs for a scenario.
// The constraint narrows admissible single-agent masks (environment rules);
// pairs are bucketed by classify_scenario_cooperative at construction.
class ScenarioSampler {
 public:
  using MaskConstraint = std::function<bool(const GoalMask&)>;
  ScenarioSampler(const GoalSpace& space, MaskConstraint constraint = nullptr);

  // Throws if the scenario admits no valid pair.
  std::pair<GoalMask, GoalMask> sample(ScenarioKind kind, Rng& rng) const;
  const std::vector<std::pair<GoalMask, GoalMask>>& pairs(ScenarioKind kind) const;
  bool realizable(ScenarioKind kind) const { return !pairs(kind).empty(); }

 private:
  std::vector<std::pair<GoalMask, GoalMask>> buckets_[3];
};

}  // namespace hetgoal

#include "hetgoal/goal.hpp"

#include <json.hpp>

#include "hetgoal/rng.hpp"

namespace hetgoal {

GoalSpace::GoalSpace(std::vector<Goal> goals) : goals_(std::move(goals)) {
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    if (goals_[i].id != int(i))
      throw std::invalid_argument("GoalSpace: ids must be 0..n-1 without gaps");
    if (!(goals_[i].base_reward > 0.0))
      throw std::invalid_argument("GoalSpace: base_reward must be positive");
  }
  for (const auto& g : goals_) {
    if (g.solo) continue;
    for (const auto& gs : goals_) {
      if (!gs.solo) continue;
      if (!(g.base_reward > gs.base_reward))
        throw std::invalid_argument(
            "GoalSpace: cooperative rewards must exceed all solo rewards");
    }
  }
}

std::string GoalSpace::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : goals_) {
    arr.push_back({{"id", g.id},
                   {"tag", g.tag},
                   {"reward", g.base_reward},
                   {"solo", g.solo}});
  }
  return nlohmann::json{{"goals", arr}}.dump();
}

const char* scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::FullOverlap: return "full";
    case ScenarioKind::PartialOverlap: return "partial";
    case ScenarioKind::NoOverlap: return "no";
  }
  return "?";
}

ScenarioKind scenario_from_name(const std::string& name) {
  if (name == "full") return ScenarioKind::FullOverlap;
  if (name == "partial") return ScenarioKind::PartialOverlap;
  if (name == "no") return ScenarioKind::NoOverlap;
  throw std::invalid_argument("unknown scenario: " + name);
}

static GoalMask union_of(const std::vector<GoalMask>& masks, int n) {
  GoalMask u(n);
  for (const auto& m : masks) {
    if (m.size() != n) throw std::invalid_argument("mask length mismatch");
    for (int i = 0; i < n; ++i)
      if (m.test(i)) u.set(i);
  }
  return u;
}

GoalMask worthwhile_set(const GoalMask& ego, const std::vector<GoalMask>& teammates,
                        const GoalSpace& space) {
  const int n = space.size();
  if (ego.size() != n) throw std::invalid_argument("mask length mismatch");
  GoalMask tm = union_of(teammates, n);
  GoalMask out(n);
  for (int i = 0; i < n; ++i)
    out.set(i, ego.test(i) && (tm.test(i) || space.goal(i).solo));
  return out;
}

ScenarioKind classify_scenario(const GoalMask& ego, const std::vector<GoalMask>& teammates) {
  if (ego.empty()) throw std::invalid_argument("classify_scenario: empty ego mask");
  GoalMask tm = union_of(teammates, ego.size());
  bool subset = true, disjoint = true;
  for (int i = 0; i < ego.size(); ++i) {
    if (ego.test(i) && !tm.test(i)) subset = false;
    if (ego.test(i) && tm.test(i)) disjoint = false;
  }
  if (subset) return ScenarioKind::FullOverlap;
  if (disjoint) return ScenarioKind::NoOverlap;
  return ScenarioKind::PartialOverlap;
}

Cue sample_cue(const GoalMask& mask, double sigma2, Rng& rng) {
  if (sigma2 < 0.0) throw std::invalid_argument("sample_cue: negative sigma2");
  Cue cue;
  cue.sigma2 = sigma2;
  cue.values.resize(std::size_t(mask.size()));
  const double sd = std::sqrt(sigma2);
  for (int i = 0; i < mask.size(); ++i) {
    const double mean = mask.test(i) ? 1.0 : 0.0;
    cue.values[std::size_t(i)] = sigma2 == 0.0 ? mean : mean + sd * rng.normal();
  }
  return cue;
}

static GoalMask restrict_cooperative(const GoalMask& m, const GoalSpace& space) {
  GoalMask out(space.size());
  for (int i = 0; i < space.size(); ++i)
    out.set(i, m.test(i) && !space.goal(i).solo);
  return out;
}

ScenarioKind classify_scenario_cooperative(const GoalMask& ego, const GoalMask& teammate,
                                           const GoalSpace& space) {
  return classify_scenario(restrict_cooperative(ego, space),
                           {restrict_cooperative(teammate, space)});
}

ScenarioSampler::ScenarioSampler(const GoalSpace& space, MaskConstraint constraint) {
  const int n = space.size();
  if (n > 20) throw std::invalid_argument("ScenarioSampler: goal space too large");
  std::vector<GoalMask> admissible;
  for (std::uint32_t b = 1; b < (1u << n); ++b) {
    GoalMask m(n);
    for (int i = 0; i < n; ++i) m.set(i, (b >> i) & 1u);
    if (restrict_cooperative(m, space).empty()) continue;
    if (constraint && !constraint(m)) continue;
    admissible.push_back(std::move(m));
  }
  for (const auto& ego : admissible)
    for (const auto& tm : admissible) {
      ScenarioKind k = classify_scenario_cooperative(ego, tm, space);
      buckets_[int(k)].emplace_back(ego, tm);
    }
}

const std::vector<std::pair<GoalMask, GoalMask>>& ScenarioSampler::pairs(
    ScenarioKind kind) const {
  return buckets_[int(kind)];
}

std::pair<GoalMask, GoalMask> ScenarioSampler::sample(ScenarioKind kind, Rng& rng) const {
  const auto& bucket = buckets_[int(kind)];
  if (bucket.empty())
    throw std::runtime_error(std::string("scenario unrealizable: ") + scenario_name(kind));
  return bucket[rng.uniform_int(bucket.size())];
}

}  // namespace hetgoal

#include "hetgoal/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hetgoal/scripted.hpp"

namespace hetgoal {

const char* subset_name(SubsetTag tag) {
  switch (tag) {
    case SubsetTag::Unrewarding: return "unrewarding";
    case SubsetTag::FutileCooperative: return "futile_cooperative";
    case SubsetTag::SoloWorthwhile: return "solo_worthwhile";
    case SubsetTag::CooperativeWorthwhile: return "cooperative_worthwhile";
  }
  return "?";
}

namespace {

int cr_goal_at(int side, std::pair<int, int> p) {
  const int hi = side - 1, c = side / 2;
  if (p == std::pair<int, int>{0, 0}) return 0;
  if (p == std::pair<int, int>{hi, 0}) return 1;
  if (p == std::pair<int, int>{0, hi}) return 2;
  if (p == std::pair<int, int>{hi, hi}) return 3;
  if (p == std::pair<int, int>{c, c}) return 4;
  return -1;
}

}  // namespace

std::vector<GoalAttempt> detect_attempts(const EpisodeTrace& trace) {
  std::vector<GoalAttempt> out;
  if (trace.env_kind == EnvKind::Reaching) {
    if (trace.grid_side <= 0) throw std::invalid_argument("detect_attempts: grid_side unset");
    for (const auto& s : trace.steps) {
      const int g = cr_goal_at(trace.grid_side, s.pos[0]);
      if (g >= 0) {
        out.push_back({0, g, SubsetTag::Unrewarding});
        break;  // the tile is absorbing; first occupancy is the attempt
      }
    }
    return out;
  }
  // LBF: one attempt per contiguous run of ego collects at the same fruit
  int last_fruit = -1;
  long last_t = -2;
  for (long t = 0; t < long(trace.steps.size()); ++t) {
    for (const auto& c : trace.steps[std::size_t(t)].collects) {
      if (c.agent != 0) continue;
      if (!(c.fruit_index == last_fruit && last_t == t - 1))
        out.push_back({0, c.goal_id, SubsetTag::Unrewarding});
      last_fruit = c.fruit_index;
      last_t = t;
    }
  }
  return out;
}

SubsetTag classify_attempt(int goal_id, const GoalMask& ego_mask,
                           const GoalMask& teammate_mask, const GoalSpace& space) {
  if (goal_id < 0 || goal_id >= space.size())
    throw std::invalid_argument("classify_attempt: goal id out of range");
  if (!ego_mask.test(goal_id)) return SubsetTag::Unrewarding;
  if (space.goal(goal_id).solo) return SubsetTag::SoloWorthwhile;
  return teammate_mask.test(goal_id) ? SubsetTag::CooperativeWorthwhile
                                     : SubsetTag::FutileCooperative;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["label"] = label;
  j["scenario"] = scenario;
  j["episodes"] = episodes;
  j["eval_seed"] = eval_seed;
  j["mean_return"] = mean_return;
  j["oracle_mean_return"] = oracle_mean_return;
  j["oracle_relative"] = oracle_relative;
  j["oracle_relative_ci90"] = {relative_ci_lo, relative_ci_hi};
  j["attempt_count"] = attempt_count;
  nlohmann::json sc, sp;
  for (int k = 0; k < 4; ++k) {
    const auto* n = subset_name(SubsetTag(k));
    sc[n] = subset_counts[std::size_t(k)];
    sp[n] = subset_props[std::size_t(k)];
  }
  j["subset_counts"] = sc;
  j["subset_props"] = sp;
  j["nonsolo_attempt_prop"] = nonsolo_attempt_prop;
  return j.dump(2);
}

std::string EvalReport::csv_header() {
  return "label,scenario,run_seed,eval_seed,episodes,mean_return,oracle_mean_return,"
         "oracle_relative,rel_ci_lo,rel_ci_hi,attempts,prop_unrewarding,"
         "prop_futile_coop,prop_solo,prop_coop,nonsolo_prop";
}

std::string EvalReport::csv_row(std::uint64_t run_seed) const {
  std::ostringstream os;
  os << label << ',' << scenario << ',' << run_seed << ',' << eval_seed << ','
     << episodes << ',' << mean_return << ',' << oracle_mean_return << ','
     << oracle_relative << ',' << relative_ci_lo << ',' << relative_ci_hi << ','
     << attempt_count;
  for (int k = 0; k < 4; ++k) os << ',' << subset_props[std::size_t(k)];
  os << ',' << nonsolo_attempt_prop;
  return os.str();
}

int OraclePolicy::act(const Env& env, const std::vector<float>&, Rng&) {
  return oracle_action(env, 0);
}

int RandomPolicy::act(const Env& env, const std::vector<float>&, Rng& rng) {
  return int(rng.uniform_int(std::uint64_t(env.spec().action_count)));
}

void AgentPolicy::begin(std::uint64_t) {
  agent_.batch_begin();
  agent_.episode_begin(0);
  scratch_.assign(std::size_t(agent_.ppo_obs_dim()), 0.0f);
}

int AgentPolicy::act(const Env&, const std::vector<float>& ego_obs, Rng& rng) {
  const auto d = agent_.act(0, ego_obs, rng, scratch_.data());
  agent_.post_step(0, 0, false);  // keep recurrent bookkeeping consistent
  return d.env_action;
}

namespace {

double run_one_episode(const std::string& env_name, EpisodePolicy& policy,
                       const EpisodeConfig& cfg, Rng& pol_rng, EpisodeTrace* trace) {
  EgoEnv env(make_env(env_name), 0);
  if (trace) env.begin_trace();
  env.reset_with(cfg);
  policy.begin(cfg.seed);
  double ret = 0.0;
  while (!env.needs_reset()) {
    const int a = policy.act(env.env(), env.obs(), pol_rng);
    ret += env.step(a).reward;
  }
  if (trace) *trace = env.take_trace();
  return ret;
}

}  // namespace

EvalReport evaluate(const std::string& env_name, EpisodePolicy& policy,
                    ScenarioKind scenario, const EvalOptions& opt,
                    std::vector<EpisodeTrace>* traces) {
  if (opt.episodes <= 0) throw std::invalid_argument("evaluate: episodes");
  const int n = opt.episodes;
  EvalReport rep;
  rep.scenario = scenario_name(scenario);
  rep.episodes = n;
  rep.eval_seed = opt.seed;
  rep.episode_returns.assign(std::size_t(n), 0.0);
  rep.oracle_episode_returns.assign(std::size_t(n), 0.0);
  std::vector<EpisodeTrace> local;
  local.resize(std::size_t(n));

  const bool par = opt.parallel && policy.stateless();
#pragma omp parallel for schedule(static) if (par)
  for (int i = 0; i < n; ++i) {
    EpisodeConfig cfg;
    cfg.scenario = scenario;
    cfg.sigma2 = opt.sigma2;
    cfg.cue_visible = opt.cue_visible;
    cfg.seed = mix_seed(opt.seed, std::uint64_t(i));
    Rng pol_rng(mix_seed(cfg.seed, 0x90CA));
    rep.episode_returns[std::size_t(i)] =
        run_one_episode(env_name, policy, cfg, pol_rng, &local[std::size_t(i)]);
  }
  // matched-seed oracle baseline (always stateless, parallel-safe)
  OraclePolicy oracle;
#pragma omp parallel for schedule(static) if (opt.parallel)
  for (int i = 0; i < n; ++i) {
    EpisodeConfig cfg;
    cfg.scenario = scenario;
    cfg.sigma2 = opt.sigma2;
    cfg.cue_visible = opt.cue_visible;
    cfg.seed = mix_seed(opt.seed, std::uint64_t(i));
    Rng orng(mix_seed(cfg.seed, 0x09AC1E));
    rep.oracle_episode_returns[std::size_t(i)] =
        run_one_episode(env_name, oracle, cfg, orng, nullptr);
  }

  const auto space = make_env(env_name)->spec().goal_space;
  long nonsolo = 0;
  for (int i = 0; i < n; ++i) {
    const auto& tr = local[std::size_t(i)];
    for (auto att : detect_attempts(tr)) {
      att.episode = i;
      att.tag = classify_attempt(att.goal_id, tr.ego_mask, tr.tm_mask, space);
      if (scenario == ScenarioKind::FullOverlap && att.tag == SubsetTag::FutileCooperative)
        throw std::logic_error("structural zero violated: futile_cooperative in full overlap");
      if (scenario == ScenarioKind::NoOverlap && att.tag == SubsetTag::CooperativeWorthwhile)
        throw std::logic_error("structural zero violated: cooperative_worthwhile in no overlap");
      rep.subset_counts[std::size_t(int(att.tag))]++;
      ++rep.attempt_count;
      if (!space.goal(att.goal_id).solo) ++nonsolo;
    }
  }
  if (rep.attempt_count > 0) {
    for (int k = 0; k < 4; ++k)
      rep.subset_props[std::size_t(k)] =
          double(rep.subset_counts[std::size_t(k)]) / double(rep.attempt_count);
    rep.nonsolo_attempt_prop = double(nonsolo) / double(rep.attempt_count);
  }
  double sum = 0.0, osum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += rep.episode_returns[std::size_t(i)];
    osum += rep.oracle_episode_returns[std::size_t(i)];
  }
  rep.mean_return = sum / double(n);
  rep.oracle_mean_return = osum / double(n);
  rep.oracle_relative = osum != 0.0 ? sum / osum : 0.0;
  const auto ci =
      bootstrap_ratio_ci(rep.episode_returns, rep.oracle_episode_returns, 0.9, 2000,
                         mix_seed(opt.seed, 0xB007));
  rep.relative_ci_lo = ci.first;
  rep.relative_ci_hi = ci.second;
  if (traces) *traces = std::move(local);
  return rep;
}

std::optional<double> delta_coop(const EvalReport& full, const EvalReport& none) {
  if (full.attempt_count == 0 || none.attempt_count == 0) return std::nullopt;
  return full.nonsolo_attempt_prop - none.nonsolo_attempt_prop;
}

namespace {

std::pair<double, double> percentile_interval(std::vector<double>& stats, double conf) {
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - conf) / 2.0;
  const auto pick = [&](double q) {
    const double idx = q * double(stats.size() - 1);
    const std::size_t lo = std::size_t(idx);
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double w = idx - double(lo);
    return stats[lo] * (1.0 - w) + stats[hi] * w;
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

}  // namespace

std::pair<double, double> bootstrap_ci(const std::vector<double>& xs, double conf,
                                       int resamples, std::uint64_t seed) {
  if (xs.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  Rng rng(mix_seed(seed, 0xC1));
  std::vector<double> stats(std::size_t(resamples), 0.0);
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
      s += xs[std::size_t(rng.uniform_int(xs.size()))];
    stats[std::size_t(r)] = s / double(xs.size());
  }
  return percentile_interval(stats, conf);
}

std::pair<double, double> bootstrap_ratio_ci(const std::vector<double>& num,
                                             const std::vector<double>& den,
                                             double conf, int resamples,
                                             std::uint64_t seed) {
  if (num.empty() || num.size() != den.size())
    throw std::invalid_argument("bootstrap_ratio_ci: size mismatch");
  Rng rng(mix_seed(seed, 0xC2));
  std::vector<double> stats;
  stats.reserve(std::size_t(resamples));
  for (int r = 0; r < resamples; ++r) {
    double sn = 0.0, sd = 0.0;
    for (std::size_t k = 0; k < num.size(); ++k) {
      const auto i = std::size_t(rng.uniform_int(num.size()));
      sn += num[i];
      sd += den[i];
    }
    if (sd != 0.0) stats.push_back(sn / sd);
  }
  if (stats.empty()) return {0.0, 0.0};
  return percentile_interval(stats, conf);
}

double SweepTable::mean(const std::string& condition, const std::string& method) const {
  double s = 0.0;
  long c = 0;
  for (const auto& r : rows)
    if (r.condition == condition && r.method == method) {
      s += r.mean_return;
      ++c;
    }
  if (c == 0) throw std::invalid_argument("sweep: missing condition " + condition + "/" + method);
  return s / double(c);
}

double SweepTable::gap_pct(const std::string& condition) const {
  const double g = mean(condition, "grill");
  const double gm = mean(condition, "grill-m");
  if (g == 0.0) throw std::domain_error("sweep: zero GRILL return in " + condition);
  return 100.0 * (gm - g) / g;
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << "condition,method,seed,mean_return,gap_pct\n";
  std::map<std::string, double> gaps;
  for (const auto& r : rows)
    if (!gaps.count(r.condition)) gaps[r.condition] = gap_pct(r.condition);
  for (const auto& r : rows)
    os << r.condition << ',' << r.method << ',' << r.seed << ',' << r.mean_return << ','
       << gaps.at(r.condition) << '\n';
  return os.str();
}

void export_trajectories(const std::vector<EpisodeTrace>& traces,
                         const std::string& csv_path, const std::string& svg_path) {
  for (const auto& t : traces)
    if (t.env_kind != EnvKind::Reaching)
      throw std::invalid_argument("export_trajectories: CR traces only");
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << "episode,agent,step,x,y\n";
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const auto& t = traces[e];
    for (int a = 0; a < 2; ++a) {
      csv << e << ',' << a << ",0," << t.start_pos[std::size_t(a)].first << ','
          << t.start_pos[std::size_t(a)].second << '\n';
      for (std::size_t s = 0; s < t.steps.size(); ++s)
        csv << e << ',' << a << ',' << s + 1 << ','
            << t.steps[s].pos[std::size_t(a)].first << ','
            << t.steps[s].pos[std::size_t(a)].second << '\n';
    }
  }
  if (svg_path.empty()) return;
  std::ofstream svg(svg_path);
  if (!svg) throw std::runtime_error("cannot write " + svg_path);
  const int side = traces.empty() ? 7 : std::max(traces[0].grid_side, 1);
  const double cell = 40.0;
  const double wh = cell * side;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << wh << "\" height=\""
      << wh << "\" viewBox=\"0 0 " << wh << ' ' << wh << "\">\n";
  svg << "<rect width=\"" << wh << "\" height=\"" << wh << "\" fill=\"white\"/>\n";
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const auto& t = traces[e];
    // deterministic per-episode jitter for visual separation
    const double jx = (double(splitmix64(e * 2 + 1) % 1000) / 1000.0 - 0.5) * 0.3;
    const double jy = (double(splitmix64(e * 2 + 2) % 1000) / 1000.0 - 0.5) * 0.3;
    const auto px = [&](int x) { return (double(x) + 0.5 + jx) * cell; };
    const auto py = [&](int y) { return (double(y) + 0.5 + jy) * cell; };
    svg << "<path fill=\"none\" stroke=\"hsl(" << (e * 47) % 360
        << ",70%,45%)\" stroke-width=\"1.5\" opacity=\"0.7\" d=\"M " << px(t.start_pos[0].first)
        << ' ' << py(t.start_pos[0].second);
    for (const auto& s : t.steps) svg << " L " << px(s.pos[0].first) << ' ' << py(s.pos[0].second);
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
}

}  // namespace hetgoal

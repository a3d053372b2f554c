#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "hetgoal/evalkit.hpp"
#include "hetgoal/grill.hpp"
#include "hetgoal/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "hetgoal-1.0.0";

void cap_threads() {
  if (const char* v = std::getenv("HETGOAL_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(std::min(n, omp_get_max_threads()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// layered config: built-in defaults <- JSON file <- flags (flags win)
void apply_json_config(hetgoal::TrainConfig& cfg, const json& j) {
  if (j.contains("method")) cfg.method = j["method"].get<std::string>();
  if (j.contains("env")) cfg.env_name = j["env"].get<std::string>();
  if (j.contains("total_steps")) cfg.total_steps = j["total_steps"].get<long>();
  if (j.contains("dataset_steps")) cfg.dataset_steps = j["dataset_steps"].get<long>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
  if (j.contains("cue_visible")) cfg.cue_visible = j["cue_visible"].get<bool>();
  if (j.contains("z_dim")) cfg.z_dim = j["z_dim"].get<int>();
  if (j.contains("dataset_path")) cfg.dataset_path = j["dataset_path"].get<std::string>();
  if (j.contains("stage1_path")) cfg.stage1_path = j["stage1_path"].get<std::string>();
  if (j.contains("checkpoint_every")) cfg.checkpoint_every = j["checkpoint_every"].get<long>();
  if (j.contains("ppo")) {
    const auto& p = j["ppo"];
    if (p.contains("batch_size")) cfg.ppo.batch_size = p["batch_size"].get<int>();
    if (p.contains("minibatches")) cfg.ppo.minibatches = p["minibatches"].get<int>();
    if (p.contains("epochs")) cfg.ppo.epochs = p["epochs"].get<int>();
    if (p.contains("lr")) cfg.ppo.lr = p["lr"].get<double>();
    if (p.contains("gamma")) cfg.ppo.gamma = p["gamma"].get<double>();
    if (p.contains("gae_lambda")) cfg.ppo.gae_lambda = p["gae_lambda"].get<double>();
    if (p.contains("clip_eps")) cfg.ppo.clip_eps = p["clip_eps"].get<double>();
    if (p.contains("entropy_coef")) cfg.ppo.entropy_coef = p["entropy_coef"].get<double>();
    if (p.contains("value_coef")) cfg.ppo.value_coef = p["value_coef"].get<double>();
    if (p.contains("max_grad_norm")) cfg.ppo.max_grad_norm = p["max_grad_norm"].get<double>();
    if (p.contains("n_envs")) cfg.ppo.n_envs = p["n_envs"].get<int>();
  }
  if (j.contains("stage1")) {
    const auto& s = j["stage1"];
    if (s.contains("code_count")) cfg.stage1.code_count = s["code_count"].get<int>();
    if (s.contains("seg_len")) cfg.stage1.seg_len = s["seg_len"].get<int>();
    if (s.contains("lambda")) cfg.stage1.lambda = s["lambda"].get<double>();
    if (s.contains("lr")) cfg.stage1.lr = s["lr"].get<double>();
    if (s.contains("epochs")) cfg.stage1.epochs = s["epochs"].get<int>();
    if (s.contains("minibatch")) cfg.stage1.minibatch = s["minibatch"].get<int>();
    if (s.contains("tau_start")) cfg.stage1.tau_start = s["tau_start"].get<double>();
    if (s.contains("restarts")) cfg.stage1.restarts = s["restarts"].get<int>();
    if (s.contains("tau_end")) cfg.stage1.tau_end = s["tau_end"].get<double>();
  }
  if (j.contains("scenario_mix")) {
    cfg.mix.clear();
    for (const auto& s : j["scenario_mix"])
      cfg.mix.push_back(hetgoal::scenario_from_name(s.get<std::string>()));
  }
}

int cmd_collect(const std::string& env, double steps, std::uint64_t seed, double sigma2,
                bool cue_visible, const std::string& out_dir) {
  fs::create_directories(out_dir);
  hetgoal::EpisodeOpts opts;
  opts.sigma2 = sigma2;
  opts.cue_visible = cue_visible;
  const auto ds =
      hetgoal::collect_offline_dataset(env, long(steps), opts, hetgoal::mix_seed(seed, 0xDA7A));
  ds.save(out_dir + "/dataset.bin");
  json manifest;
  manifest["command"] = "collect";
  manifest["env"] = env;
  manifest["steps"] = long(steps);
  manifest["seed"] = seed;
  manifest["sigma2"] = sigma2;
  manifest["cue_visible"] = cue_visible;
  manifest["obs_dim"] = ds.obs_dim;
  manifest["n_actions"] = ds.n_actions;
  manifest["n_goals"] = ds.n_goals;
  manifest["rows"] = ds.rows();
  manifest["version"] = kVersion;
  write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << ds.rows() << " rows to " << out_dir << "/dataset.bin\n";
  return 0;
}

std::vector<hetgoal::ScenarioKind> scenario_list(const std::string& s) {
  if (s == "all")
    return {hetgoal::ScenarioKind::FullOverlap, hetgoal::ScenarioKind::PartialOverlap,
            hetgoal::ScenarioKind::NoOverlap};
  return {hetgoal::scenario_from_name(s)};
}

int cmd_eval(const std::string& checkpoint, const std::string& env_flag,
             const std::string& scenario, int episodes, std::uint64_t seed, double sigma2,
             bool cue_visible, bool export_traj, const std::string& label_flag,
             const std::string& out_dir, bool serial) {
  fs::create_directories(out_dir);
  std::string env_name = env_flag;
  std::unique_ptr<hetgoal::EpisodePolicy> owned;
  hetgoal::LoadedAgent loaded;
  std::string label = label_flag;
  if (checkpoint == "oracle") {
    owned = std::make_unique<hetgoal::OraclePolicy>();
    if (label.empty()) label = "oracle";
  } else if (checkpoint == "random") {
    owned = std::make_unique<hetgoal::RandomPolicy>();
    if (label.empty()) label = "random";
  } else {
    loaded = hetgoal::load_agent(checkpoint);
    if (!env_name.empty() && env_name != loaded.env_name)
      throw std::invalid_argument("eval: checkpoint was trained on env " + loaded.env_name);
    env_name = loaded.env_name;
    owned = std::make_unique<hetgoal::AgentPolicy>(*loaded.agent);
    if (label.empty()) label = loaded.method;
  }
  if (env_name.empty()) throw std::invalid_argument("eval: --env required for " + checkpoint);

  hetgoal::EvalOptions opt;
  opt.episodes = episodes;
  opt.seed = seed;
  opt.sigma2 = sigma2;
  opt.cue_visible = cue_visible;
  opt.parallel = !serial;

  std::ofstream csv(out_dir + "/reports.csv");
  csv << hetgoal::EvalReport::csv_header() << "\n";
  std::optional<hetgoal::EvalReport> rep_full, rep_none;
  for (auto sc : scenario_list(scenario)) {
    std::vector<hetgoal::EpisodeTrace> traces;
    auto rep = hetgoal::evaluate(env_name, *owned, sc, opt, &traces);
    rep.label = label;
    const std::string tag = hetgoal::scenario_name(sc);
    write_text(out_dir + "/report_" + tag + ".json", rep.to_json() + "\n");
    csv << rep.csv_row(seed) << "\n";
    {
      hetgoal::TraceWriter tw(out_dir + "/traces_" + tag + ".bin", true);
      for (const auto& t : traces) tw.write(t);
    }
    if (export_traj)
      hetgoal::export_trajectories(traces, out_dir + "/traj_" + tag + ".csv",
                                   out_dir + "/traj_" + tag + ".svg");
    if (sc == hetgoal::ScenarioKind::FullOverlap) rep_full = rep;
    if (sc == hetgoal::ScenarioKind::NoOverlap) rep_none = rep;
    std::cout << tag << ": mean_return " << rep.mean_return << ", oracle-relative "
              << rep.oracle_relative << "\n";
  }
  if (rep_full && rep_none) {
    json summary;
    const auto dc = hetgoal::delta_coop(*rep_full, *rep_none);
    summary["delta_coop"] = dc ? json(*dc) : json(nullptr);
    summary["label"] = label;
    summary["eval_seed"] = seed;
    write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
    if (dc) std::cout << "delta_coop " << *dc << "\n";
  }
  return 0;
}

struct SweepCondition {
  std::string name;
  double sigma2 = 0.05;
  bool cue_visible = true;
};

int cmd_sweep(const std::string& env, const std::vector<double>& sigmas, bool absent,
              double budget, double dataset_steps, const std::vector<std::uint64_t>& seeds,
              int episodes, const std::string& config_path, const std::string& out_dir,
              bool serial) {
  fs::create_directories(out_dir);
  std::vector<SweepCondition> conds;
  for (double s : sigmas) conds.push_back({"sigma_" + std::to_string(s), s, true});
  if (absent) conds.push_back({"absent", 0.0, false});

  hetgoal::SweepTable table;
  for (const auto& cond : conds) {
    for (auto seed : seeds) {
      std::string grill_dir;
      for (const std::string method : {"grill", "grill-m"}) {
        const std::string dir =
            out_dir + "/" + cond.name + "/" + method + "/seed" + std::to_string(seed);
        const std::string eval_file = dir + "/sweep_eval.json";
        double mean_return;
        if (fs::exists(eval_file)) {  // resumable: skip completed runs
          std::ifstream in(eval_file);
          mean_return = json::parse(in).at("mean_return").get<double>();
          std::cout << "skip (done): " << dir << "\n";
        } else {
          hetgoal::TrainConfig cfg;
          if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot read config " + config_path);
            apply_json_config(cfg, json::parse(in));
          }
          cfg.method = method;
          cfg.env_name = env;
          cfg.total_steps = long(budget);
          cfg.dataset_steps = long(dataset_steps);
          cfg.seed = seed;
          cfg.sigma2 = cond.sigma2;
          cfg.cue_visible = cond.cue_visible;
          cfg.out_dir = dir;
          cfg.parallel = !serial;
          // both methods share one stage-1 model per (condition, seed)
          if (method == std::string("grill-m") && !grill_dir.empty())
            cfg.stage1_path = grill_dir + "/stage1.bin";
          auto res = hetgoal::train_run(cfg);
          hetgoal::AgentPolicy policy(*res.agent);
          hetgoal::EvalOptions opt;
          opt.episodes = episodes;
          opt.seed = hetgoal::mix_seed(seed, 0xE7A1);
          opt.sigma2 = cond.sigma2;
          opt.cue_visible = cond.cue_visible;
          opt.parallel = !serial;
          double sum = 0.0;
          for (auto sc : scenario_list("all"))
            sum += hetgoal::evaluate(env, policy, sc, opt).mean_return;
          mean_return = sum / 3.0;
          json ev;
          ev["condition"] = cond.name;
          ev["method"] = method;
          ev["seed"] = seed;
          ev["episodes_per_scenario"] = episodes;
          ev["mean_return"] = mean_return;
          write_text(eval_file, ev.dump(2) + "\n");
          std::cout << "done: " << dir << " mean_return " << mean_return << "\n";
        }
        if (method == std::string("grill")) grill_dir = dir;
        table.rows.push_back({cond.name, method, seed, mean_return});
      }
    }
  }
  write_text(out_dir + "/sweep.csv", table.to_csv());
  for (const auto& cond : conds)
    std::cout << cond.name << ": gap " << table.gap_pct(cond.name) << "%\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  cap_threads();
  CLI::App app{"heterogeneous-goals ad hoc teamwork testbed"};
  app.require_subcommand(1);

  // collect
  auto* collect = app.add_subcommand("collect", "collect a stage-1 demonstration dataset");
  std::string c_env = "reach", c_out = "runs/collect";
  double c_steps = 2e6, c_sigma2 = 0.05;
  std::uint64_t c_seed = 0;
  bool c_nocue = false;
  collect->add_option("--env", c_env, "reach|lbf");
  collect->add_option("--steps", c_steps, "dataset size (ego decisions)");
  collect->add_option("--seed", c_seed);
  collect->add_option("--sigma2", c_sigma2, "cue noise variance");
  collect->add_flag("--no-cue", c_nocue, "hide the teammate cue");
  collect->add_option("--out", c_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train one method");
  hetgoal::TrainConfig t_base;
  std::string t_method, t_env, t_config, t_out, t_dataset, t_stage1;
  double t_steps = -1, t_dataset_steps = -1, t_sigma2 = -1;
  std::int64_t t_seed = -1;
  bool t_nocue = false, t_serial = false;
  train->add_option("--method", t_method, "ppo|liam|grill|grill-m");
  train->add_option("--env", t_env, "reach|lbf");
  train->add_option("--steps", t_steps, "total step budget");
  train->add_option("--dataset-steps", t_dataset_steps, "stage-1 dataset size");
  train->add_option("--seed", t_seed);
  train->add_option("--config", t_config, "JSON config file");
  train->add_option("--dataset", t_dataset, "pre-collected dataset file");
  train->add_option("--stage1", t_stage1, "pre-trained stage-1 checkpoint");
  train->add_option("--sigma2", t_sigma2);
  train->add_flag("--no-cue", t_nocue);
  train->add_flag("--serial", t_serial, "disable OpenMP rollout workers");
  train->add_option("--out", t_out, "run directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or scripted policy");
  std::string e_ckpt, e_env, e_scenario = "all", e_label, e_out;
  int e_episodes = 1000;
  std::uint64_t e_seed = 0;
  double e_sigma2 = 0.05;
  bool e_nocue = false, e_export = false, e_serial = false;
  eval->add_option("--checkpoint", e_ckpt, "run dir, or 'oracle'/'random'")->required();
  eval->add_option("--env", e_env, "required for oracle/random");
  eval->add_option("--scenario", e_scenario, "no|partial|full|all");
  eval->add_option("--episodes", e_episodes);
  eval->add_option("--seed", e_seed);
  eval->add_option("--sigma2", e_sigma2);
  eval->add_flag("--no-cue", e_nocue);
  eval->add_flag("--export-traj", e_export, "emit trajectory CSV/SVG");
  eval->add_option("--label", e_label, "method label in reports");
  eval->add_flag("--serial", e_serial);
  eval->add_option("--out", e_out, "output directory")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "cue-noise sweep over grill/grill-m");
  std::string s_env = "lbf", s_out, s_config;
  std::vector<double> s_sigmas{0.05, 1.0};
  std::vector<std::uint64_t> s_seeds{0, 1, 2};
  double s_budget = 5e6, s_dataset = 2e5;
  int s_episodes = 150;
  bool s_nocue = false, s_serial = false;
  sweep->add_option("--env", s_env);
  sweep->add_option("--sigma", s_sigmas, "sigma^2 grid")->delimiter(',');
  sweep->add_flag("--no-cue", s_nocue, "include the cue-absent condition");
  sweep->add_option("--budget", s_budget, "total steps per run");
  sweep->add_option("--dataset-steps", s_dataset);
  sweep->add_option("--seeds", s_seeds)->delimiter(',');
  sweep->add_option("--episodes", s_episodes, "eval episodes per scenario");
  sweep->add_option("--config", s_config, "JSON config file");
  sweep->add_flag("--serial", s_serial);
  sweep->add_option("--out", s_out, "sweep directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect->parsed())
      return cmd_collect(c_env, c_steps, c_seed, c_sigma2, !c_nocue, c_out);
    if (train->parsed()) {
      hetgoal::TrainConfig cfg;
      if (!t_config.empty()) {
        std::ifstream in(t_config);
        if (!in) throw std::invalid_argument("cannot read config " + t_config);
        apply_json_config(cfg, json::parse(in));
      }
      if (!t_method.empty()) cfg.method = t_method;
      if (!t_env.empty()) cfg.env_name = t_env;
      if (t_steps >= 0) cfg.total_steps = long(t_steps);
      if (t_dataset_steps >= 0) cfg.dataset_steps = long(t_dataset_steps);
      if (t_seed >= 0) cfg.seed = std::uint64_t(t_seed);
      if (t_sigma2 >= 0) cfg.sigma2 = t_sigma2;
      if (t_nocue) cfg.cue_visible = false;
      if (!t_dataset.empty()) cfg.dataset_path = t_dataset;
      if (!t_stage1.empty()) cfg.stage1_path = t_stage1;
      cfg.parallel = !t_serial;
      cfg.out_dir = t_out;
      const auto res = hetgoal::train_run(cfg);
      std::cout << "trained " << cfg.method << " on " << cfg.env_name << ": "
                << res.online_steps << " online steps, final mean return "
                << res.final_mean_return << "\n";
      return 0;
    }
    if (eval->parsed())
      return cmd_eval(e_ckpt, e_env, e_scenario, e_episodes, e_seed, e_sigma2, !e_nocue,
                      e_export, e_label, e_out, e_serial);
    if (sweep->parsed())
      return cmd_sweep(s_env, s_sigmas, s_nocue, s_budget, s_dataset, s_seeds, s_episodes,
                       s_config, s_out, s_serial);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

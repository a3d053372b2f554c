#include "hetgoal/trace.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hetgoal {

namespace {
constexpr std::uint32_t kTraceMagic = 0x4C544748;  // "HGTL"
constexpr std::uint32_t kTraceVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_mask(std::ostream& out, const GoalMask& m) {
  put<std::uint32_t>(out, std::uint32_t(m.size()));
  for (auto b : m.bits) put<std::uint8_t>(out, b);
}
GoalMask get_mask(std::istream& in) {
  GoalMask m(int(get<std::uint32_t>(in)));
  for (auto& b : m.bits) b = get<std::uint8_t>(in);
  return m;
}
}  // namespace

struct TraceWriter::Impl {
  std::ofstream bin;
  std::ofstream jsonl;
  bool want_jsonl = false;
};

TraceWriter::TraceWriter(const std::string& path, bool jsonl) : impl_(new Impl) {
  impl_->bin.open(path, std::ios::binary);
  if (!impl_->bin) throw std::runtime_error("cannot write " + path);
  put(impl_->bin, kTraceMagic);
  put(impl_->bin, kTraceVersion);
  impl_->want_jsonl = jsonl;
  if (jsonl) {
    impl_->jsonl.open(path + ".jsonl");
    if (!impl_->jsonl) throw std::runtime_error("cannot write " + path + ".jsonl");
  }
}

TraceWriter::~TraceWriter() {
  close();
  delete impl_;
}

void TraceWriter::close() {
  if (impl_->bin.is_open()) impl_->bin.close();
  if (impl_->jsonl.is_open()) impl_->jsonl.close();
}

void TraceWriter::write(const EpisodeTrace& t) {
  auto& out = impl_->bin;
  put<std::uint8_t>(out, t.env_kind == EnvKind::Reaching ? 0 : 1);
  put<std::int32_t>(out, t.grid_side);
  put<std::uint8_t>(out, std::uint8_t(t.config.scenario));
  put<double>(out, t.config.sigma2);
  put<std::uint8_t>(out, t.config.cue_visible ? 1 : 0);
  put<std::uint64_t>(out, t.config.seed);
  put_mask(out, t.ego_mask);
  put_mask(out, t.tm_mask);
  for (int a = 0; a < 2; ++a) {
    put<std::int32_t>(out, t.start_pos[std::size_t(a)].first);
    put<std::int32_t>(out, t.start_pos[std::size_t(a)].second);
  }
  put<std::uint32_t>(out, std::uint32_t(t.steps.size()));
  for (const auto& s : t.steps) {
    for (int a = 0; a < 2; ++a) {
      put<std::int32_t>(out, s.pos[std::size_t(a)].first);
      put<std::int32_t>(out, s.pos[std::size_t(a)].second);
      put<std::int32_t>(out, s.actions[std::size_t(a)]);
      put<double>(out, s.rewards[std::size_t(a)]);
    }
    put<std::uint32_t>(out, std::uint32_t(s.achieved.size()));
    for (const auto& ag : s.achieved) {
      put<std::int32_t>(out, ag.goal_id);
      put<std::uint32_t>(out, std::uint32_t(ag.agents.size()));
      for (int a : ag.agents) put<std::int32_t>(out, a);
    }
    put<std::uint32_t>(out, std::uint32_t(s.collects.size()));
    for (const auto& c : s.collects) {
      put<std::int32_t>(out, c.agent);
      put<std::int32_t>(out, c.fruit_index);
      put<std::int32_t>(out, c.goal_id);
      put<std::uint8_t>(out, c.success ? 1 : 0);
    }
  }
  if (impl_->want_jsonl) impl_->jsonl << trace_to_json(t) << "\n";
}

std::vector<EpisodeTrace> read_traces(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  if (get<std::uint32_t>(in) != kTraceMagic) throw std::runtime_error("bad trace magic");
  if (get<std::uint32_t>(in) != kTraceVersion)
    throw std::runtime_error("bad trace version");
  std::vector<EpisodeTrace> traces;
  while (true) {
    EpisodeTrace t;
    const auto kind = get<std::uint8_t>(in);
    if (!in) break;  // clean EOF between frames
    t.env_kind = kind == 0 ? EnvKind::Reaching : EnvKind::Foraging;
    t.grid_side = get<std::int32_t>(in);
    t.config.scenario = ScenarioKind(get<std::uint8_t>(in));
    t.config.sigma2 = get<double>(in);
    t.config.cue_visible = get<std::uint8_t>(in) != 0;
    t.config.seed = get<std::uint64_t>(in);
    t.ego_mask = get_mask(in);
    t.tm_mask = get_mask(in);
    for (int a = 0; a < 2; ++a) {
      t.start_pos[std::size_t(a)].first = get<std::int32_t>(in);
      t.start_pos[std::size_t(a)].second = get<std::int32_t>(in);
    }
    const auto n = get<std::uint32_t>(in);
    t.steps.resize(n);
    for (auto& s : t.steps) {
      for (int a = 0; a < 2; ++a) {
        s.pos[std::size_t(a)].first = get<std::int32_t>(in);
        s.pos[std::size_t(a)].second = get<std::int32_t>(in);
        s.actions[std::size_t(a)] = get<std::int32_t>(in);
        s.rewards[std::size_t(a)] = get<double>(in);
      }
      s.achieved.resize(get<std::uint32_t>(in));
      for (auto& ag : s.achieved) {
        ag.goal_id = get<std::int32_t>(in);
        ag.agents.resize(get<std::uint32_t>(in));
        for (auto& a : ag.agents) a = get<std::int32_t>(in);
      }
      s.collects.resize(get<std::uint32_t>(in));
      for (auto& c : s.collects) {
        c.agent = get<std::int32_t>(in);
        c.fruit_index = get<std::int32_t>(in);
        c.goal_id = get<std::int32_t>(in);
        c.success = get<std::uint8_t>(in) != 0;
      }
    }
    if (!in) throw std::runtime_error("truncated trace file: " + path);
    traces.push_back(std::move(t));
  }
  return traces;
}

std::string trace_to_json(const EpisodeTrace& t) {
  nlohmann::json j;
  j["env"] = t.env_kind == EnvKind::Reaching ? "reach" : "lbf";
  j["grid_side"] = t.grid_side;
  j["scenario"] = scenario_name(t.config.scenario);
  j["sigma2"] = t.config.sigma2;
  j["cue_visible"] = t.config.cue_visible;
  j["seed"] = t.config.seed;
  j["ego_mask"] = t.ego_mask.bits;
  j["tm_mask"] = t.tm_mask.bits;
  j["start"] = {{t.start_pos[0].first, t.start_pos[0].second},
                {t.start_pos[1].first, t.start_pos[1].second}};
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    nlohmann::json js;
    js["pos"] = {{s.pos[0].first, s.pos[0].second}, {s.pos[1].first, s.pos[1].second}};
    js["actions"] = s.actions;
    js["rewards"] = s.rewards;
    if (!s.achieved.empty()) {
      nlohmann::json ach = nlohmann::json::array();
      for (const auto& ag : s.achieved) ach.push_back({{"goal", ag.goal_id}, {"agents", ag.agents}});
      js["achieved"] = ach;
    }
    if (!s.collects.empty()) {
      nlohmann::json col = nlohmann::json::array();
      for (const auto& c : s.collects)
        col.push_back({{"agent", c.agent},
                       {"fruit", c.fruit_index},
                       {"goal", c.goal_id},
                       {"success", c.success}});
      js["collects"] = col;
    }
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  j["ego_return"] = t.ego_return();
  return j.dump();
}

}  // namespace hetgoal

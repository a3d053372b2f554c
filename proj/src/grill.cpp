#include "hetgoal/grill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hetgoal {

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(T)));
}
template <typename T>
void get_vec(std::istream& in, std::vector<T>& v) {
  v.resize(std::size_t(get<std::uint64_t>(in)));
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(T)));
}

constexpr std::uint32_t kDatasetMagic = 0x53444748;  // "HGDS"
constexpr std::uint32_t kStage1Magic = 0x31534748;   // "HGS1"
constexpr std::uint32_t kVersion = 1;

int sample_from_logp(const std::vector<float>& lp, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < lp.size(); ++i) {
    acc += std::exp(double(lp[i]));
    if (u < acc) return int(i);
  }
  return int(lp.size()) - 1;
}

}  // namespace

void OfflineDataset::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  put(out, kDatasetMagic);
  put(out, kVersion);
  put<std::uint32_t>(out, std::uint32_t(env_name.size()));
  out.write(env_name.data(), std::streamsize(env_name.size()));
  put<std::int32_t>(out, obs_dim);
  put<std::int32_t>(out, n_actions);
  put<std::int32_t>(out, n_goals);
  put_vec(out, episode);
  put_vec(out, obs);
  put_vec(out, actions);
  put_vec(out, goals);
  if (!out) throw std::runtime_error("write failure: " + path);
}

OfflineDataset OfflineDataset::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  if (get<std::uint32_t>(in) != kDatasetMagic) throw std::runtime_error("bad dataset magic");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("bad dataset version");
  OfflineDataset ds;
  ds.env_name.resize(std::size_t(get<std::uint32_t>(in)));
  in.read(ds.env_name.data(), std::streamsize(ds.env_name.size()));
  ds.obs_dim = get<std::int32_t>(in);
  ds.n_actions = get<std::int32_t>(in);
  ds.n_goals = get<std::int32_t>(in);
  get_vec(in, ds.episode);
  get_vec(in, ds.obs);
  get_vec(in, ds.actions);
  get_vec(in, ds.goals);
  if (!in) throw std::runtime_error("truncated dataset: " + path);
  return ds;
}

OfflineDataset collect_offline_dataset(const std::string& env_name, long n_steps,
                                       const EpisodeOpts& opts, std::uint64_t seed) {
  auto env = make_env(env_name);
  OfflineDataset ds;
  ds.env_name = env_name;
  ds.obs_dim = env->spec().observation_length;
  ds.n_actions = env->spec().action_count;
  ds.n_goals = env->spec().goal_space.size();
  ds.episode.reserve(std::size_t(n_steps));
  ds.obs.reserve(std::size_t(n_steps) * std::size_t(ds.obs_dim));
  ds.actions.reserve(std::size_t(n_steps));
  ds.goals.reserve(std::size_t(n_steps));

  Rng setup(mix_seed(seed, 0xD5));
  HeuristicAgent h0(0), h1(1);
  std::int32_t episode_id = 0;
  while (ds.rows() < n_steps) {
    if (opts.mix.empty()) throw std::invalid_argument("collect_offline_dataset: empty mix");
    EpisodeConfig cfg;
    cfg.scenario = opts.mix[std::size_t(setup.uniform_int(opts.mix.size()))];
    cfg.sigma2 = opts.sigma2;
    cfg.cue_visible = opts.cue_visible;
    cfg.seed = setup.next_u64();
    env->reset(cfg);
    Rng r0(mix_seed(cfg.seed, 0xA0)), r1(mix_seed(cfg.seed, 0xA1));
    h0.reset();
    h1.reset();
    while (!env->done() && ds.rows() < n_steps) {
      const bool ego_live = !env->frozen(0);
      std::array<int, 2> joint{env->noop_action(), env->noop_action()};
      if (ego_live) joint[0] = h0.act(*env, r0);
      if (!env->frozen(1)) joint[1] = h1.act(*env, r1);
      if (ego_live) {
        const auto o = env->observe(0);
        ds.episode.push_back(episode_id);
        ds.obs.insert(ds.obs.end(), o.begin(), o.end());
        ds.actions.push_back(joint[0]);
        ds.goals.push_back(h0.target_goal());
      }
      env->step(joint);
    }
    ++episode_id;
  }
  return ds;
}

SegmentSet segment_trajectories(const OfflineDataset& ds, int seg_len) {
  if (seg_len <= 0) throw std::invalid_argument("segment_trajectories: seg_len");
  SegmentSet out;
  out.seg_len = seg_len;
  out.obs_dim = ds.obs_dim;
  out.n_actions = ds.n_actions;
  out.n_goals = ds.n_goals;
  const long n = ds.rows();
  long r = 0;
  while (r < n) {
    // maximal run of rows sharing episode and annotation
    long end = r + 1;
    while (end < n && ds.episode[std::size_t(end)] == ds.episode[std::size_t(r)] &&
           ds.goals[std::size_t(end)] == ds.goals[std::size_t(r)])
      ++end;
    for (long c = r; c < end; c += seg_len) {
      const long len = std::min<long>(seg_len, end - c);
      out.goal.push_back(ds.goals[std::size_t(c)]);
      for (int t = 0; t < seg_len; ++t) {
        const bool live = t < len;
        out.valid.push_back(live ? 1 : 0);
        out.actions.push_back(live ? ds.actions[std::size_t(c + t)] : 0);
        if (live) {
          const float* o = ds.obs.data() + std::size_t(c + t) * std::size_t(ds.obs_dim);
          out.obs.insert(out.obs.end(), o, o + ds.obs_dim);
        } else {
          out.obs.insert(out.obs.end(), std::size_t(ds.obs_dim), 0.0f);
        }
      }
    }
    r = end;
  }
  return out;
}

Stage1Model::Stage1Model(int obs_dim_, int n_actions_, const Stage1Config& cfg, Rng& rng)
    : obs_dim(obs_dim_), n_actions(n_actions_), code_count(cfg.code_count),
      seg_len(cfg.seg_len) {
  enc = approx::SeqEncoder<float>::build(ps, obs_dim + n_actions, 64, 64, code_count,
                                         approx::Act::Relu, rng);
  // Zero the final logit layer so codes start uniformly likely under the
  // Gumbel sample; otherwise rarely-drawn codes never train their decoder
  // columns and collapse permanently.
  const auto& logit_layer = enc.head.layers.back();
  std::fill_n(ps.w.begin() + std::ptrdiff_t(logit_layer.w_off),
              std::size_t(logit_layer.in) * std::size_t(logit_layer.out), 0.0f);
  std::fill_n(ps.w.begin() + std::ptrdiff_t(logit_layer.b_off),
              std::size_t(logit_layer.out), 0.0f);
  head.code_count = code_count;
  dec1 = approx::Mlp<float>::build(ps, obs_dim + code_count, {64, 64}, n_actions,
                                   approx::Act::Relu, rng);
  dec2 = approx::Mlp<float>::build(ps, obs_dim + code_count, {64, 64}, obs_dim,
                                   approx::Act::Relu, rng);
}

int Stage1Model::encode(const float* seg_obs, const std::int32_t* seg_actions,
                        const std::uint8_t* seg_valid, int T) const {
  approx::SeqEncoder<float>::Ws ws;
  ws.reset_state(enc.hid);
  std::vector<float> x(std::size_t(obs_dim + n_actions));
  int steps = 0;
  for (int t = 0; t < T; ++t) {
    if (seg_valid && !seg_valid[t]) continue;
    std::fill(x.begin(), x.end(), 0.0f);
    std::copy_n(seg_obs + std::size_t(t) * std::size_t(obs_dim), obs_dim, x.begin());
    x[std::size_t(obs_dim + seg_actions[t])] = 1.0f;
    enc.step(ps, x.data(), ws);
    ++steps;
  }
  if (steps == 0) return 0;
  const auto& logits = ws.outputs.back();
  return int(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

void Stage1Model::action_logp(const float* obs, int code, std::vector<float>& logp) const {
  std::vector<float> x(std::size_t(obs_dim + code_count), 0.0f);
  std::copy_n(obs, obs_dim, x.begin());
  x[std::size_t(obs_dim + code)] = 1.0f;
  approx::Mlp<float>::Ws ws;
  const auto& logits = dec1.forward(ps, x.data(), ws);
  logp.resize(std::size_t(n_actions));
  approx::log_softmax(logits.data(), n_actions, logp.data());
}

float* Stage1Model::decode_obs(const float* first_obs, int code,
                               std::vector<float>& out) const {
  std::vector<float> x(std::size_t(obs_dim + code_count), 0.0f);
  std::copy_n(first_obs, obs_dim, x.begin());
  x[std::size_t(obs_dim + code)] = 1.0f;
  approx::Mlp<float>::Ws ws;
  out = dec2.forward(ps, x.data(), ws);
  return out.data();
}

void Stage1Model::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  put(out, kStage1Magic);
  put(out, kVersion);
  put<std::int32_t>(out, obs_dim);
  put<std::int32_t>(out, n_actions);
  put<std::int32_t>(out, code_count);
  put<std::int32_t>(out, seg_len);
  put_vec(out, ps.w);
  if (!out) throw std::runtime_error("write failure: " + path);
}

Stage1Model Stage1Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  if (get<std::uint32_t>(in) != kStage1Magic) throw std::runtime_error("bad stage1 magic");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("bad stage1 version");
  const int obs_dim = get<std::int32_t>(in);
  const int n_actions = get<std::int32_t>(in);
  Stage1Config cfg;
  cfg.code_count = get<std::int32_t>(in);
  cfg.seg_len = get<std::int32_t>(in);
  Rng dummy(0);
  Stage1Model m(obs_dim, n_actions, cfg, dummy);
  std::vector<float> w;
  get_vec(in, w);
  if (!in || w.size() != m.ps.w.size())
    throw std::runtime_error("stage1 checkpoint size mismatch: " + path);
  m.ps.w = std::move(w);
  return m;
}

namespace {

Stage1Stats train_stage1_run(Stage1Model& m, const SegmentSet& segs, const Stage1Config& cfg,
                             std::uint64_t restart) {
  const int n = segs.count();
  Rng rng(mix_seed(cfg.seed, 0x51A9E + restart));
  std::vector<int> order(std::size_t(n), 0);
  std::iota(order.begin(), order.end(), 0);
  const int mbs_per_epoch = (n + cfg.minibatch - 1) / cfg.minibatch;
  const long total_updates = long(cfg.epochs) * mbs_per_epoch;
  long update_idx = 0;

  Stage1Stats stats;
  std::vector<float> x(std::size_t(m.obs_dim + m.n_actions));
  std::vector<float> din(std::size_t(m.obs_dim + m.code_count));
  std::vector<float> lp(std::size_t(m.n_actions)), dlogits(std::size_t(m.n_actions));
  std::vector<float> dobs(std::size_t(m.obs_dim));
  std::vector<float> dcode(std::size_t(m.code_count)), denc(std::size_t(m.code_count));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[std::size_t(i)], order[std::size_t(rng.uniform_int(std::uint64_t(i + 1)))]);
    double epoch_loss = 0.0, epoch_la = 0.0, epoch_lo = 0.0;
    long epoch_count = 0;
    for (int mb0 = 0; mb0 < n; mb0 += cfg.minibatch) {
      const int mb_n = std::min(cfg.minibatch, n - mb0);
      const double tau =
          total_updates <= 1
              ? cfg.tau_end
              : cfg.tau_start + (cfg.tau_end - cfg.tau_start) *
                                    (double(update_idx) / double(total_updates - 1));
      m.ps.zero_grad();
      const double inv_m = 1.0 / double(mb_n);
      for (int k = 0; k < mb_n; ++k) {
        const int s = order[std::size_t(mb0 + k)];
        const float* sobs = segs.seg_obs(s);
        const std::int32_t* sact = segs.seg_actions(s);
        const std::uint8_t* sval = segs.seg_valid(s);

        // encoder over valid steps
        approx::SeqEncoder<float>::Ws ews;
        ews.reset_state(m.enc.hid);
        int n_valid = 0, first = -1, last = -1;
        for (int t = 0; t < segs.seg_len; ++t) {
          if (!sval[t]) continue;
          std::fill(x.begin(), x.end(), 0.0f);
          std::copy_n(sobs + std::size_t(t) * std::size_t(m.obs_dim), m.obs_dim, x.begin());
          x[std::size_t(m.obs_dim + sact[t])] = 1.0f;
          m.enc.step(m.ps, x.data(), ews);
          if (first < 0) first = t;
          last = t;
          ++n_valid;
        }
        if (n_valid == 0) continue;
        approx::GumbelHead<float>::Ws hws;
        std::vector<float> code;
        m.head.forward(ews.outputs.back().data(), tau, true, rng, hws, code);

        std::fill(dcode.begin(), dcode.end(), 0.0f);

        // action reconstruction: lambda * sum_t -log dec1(a_t | o_t, g)
        double la = 0.0;
        approx::Mlp<float>::Ws dws;
        for (int t = 0; t < segs.seg_len; ++t) {
          if (!sval[t]) continue;
          std::vector<float> in1(std::size_t(m.obs_dim + m.code_count), 0.0f);
          std::copy_n(sobs + std::size_t(t) * std::size_t(m.obs_dim), m.obs_dim, in1.begin());
          std::copy(code.begin(), code.end(), in1.begin() + m.obs_dim);
          const auto& logits = m.dec1.forward(m.ps, in1.data(), dws);
          approx::log_softmax(logits.data(), m.n_actions, lp.data());
          la -= double(lp[std::size_t(sact[t])]);
          const float scale = float(cfg.lambda * inv_m);
          for (int a = 0; a < m.n_actions; ++a)
            dlogits[std::size_t(a)] =
                scale * (std::exp(lp[std::size_t(a)]) - (a == sact[t] ? 1.0f : 0.0f));
          m.dec1.backward(m.ps, dws, dlogits.data(), din.data());
          for (int c = 0; c < m.code_count; ++c)
            dcode[std::size_t(c)] += din[std::size_t(m.obs_dim + c)];
        }

        // final-observation reconstruction from the first observation
        std::vector<float> in2(std::size_t(m.obs_dim + m.code_count), 0.0f);
        const float* o0 = sobs + std::size_t(first) * std::size_t(m.obs_dim);
        const float* oT = sobs + std::size_t(last) * std::size_t(m.obs_dim);
        std::copy_n(o0, m.obs_dim, in2.begin());
        std::copy(code.begin(), code.end(), in2.begin() + m.obs_dim);
        approx::Mlp<float>::Ws ows;
        const auto& pred = m.dec2.forward(m.ps, in2.data(), ows);
        double lo = 0.0;
        for (int d = 0; d < m.obs_dim; ++d) {
          const double err = double(pred[std::size_t(d)]) - double(oT[d]);
          lo += err * err;
          dobs[std::size_t(d)] = float(2.0 * err * (1.0 - cfg.lambda) * inv_m);
        }
        m.dec2.backward(m.ps, ows, dobs.data(), din.data());
        for (int c = 0; c < m.code_count; ++c)
          dcode[std::size_t(c)] += din[std::size_t(m.obs_dim + c)];

        // straight-through into the encoder's final logits
        m.head.backward(hws, dcode.data(), denc.data());
        std::vector<std::vector<float>> dys(ews.outputs.size());
        dys.back().assign(denc.begin(), denc.end());
        m.enc.backward(m.ps, ews, dys);

        epoch_la += la;
        epoch_lo += lo;
        epoch_loss += cfg.lambda * la + (1.0 - cfg.lambda) * lo;
        ++epoch_count;
      }
      m.ps.adam_step(cfg.lr);
      ++update_idx;
    }
    stats.loss_curve.push_back(epoch_loss / double(std::max<long>(1, epoch_count)));
    stats.action_loss = epoch_la / double(std::max<long>(1, epoch_count));
    stats.obs_loss = epoch_lo / double(std::max<long>(1, epoch_count));
  }
  return stats;
}

}  // namespace

Stage1Stats train_stage1(Stage1Model& m, const SegmentSet& segs, const Stage1Config& cfg) {
  if (segs.obs_dim != m.obs_dim || segs.n_actions != m.n_actions)
    throw std::invalid_argument("train_stage1: dataset/model dims differ");
  if (segs.count() == 0) throw std::invalid_argument("train_stage1: empty segment set");
  const int n_restarts = std::max(1, cfg.restarts);
  Stage1Model best;
  Stage1Stats best_stats;
  std::vector<double> restart_losses;
  double best_score = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_restarts; ++r) {
    Stage1Model cand;
    if (r == 0) {
      cand = m;  // caller-provided initialization
    } else {
      Rng init_rng(mix_seed(cfg.seed, 0xF5E5A + std::uint64_t(r)));
      cand = Stage1Model(m.obs_dim, m.n_actions, cfg, init_rng);
    }
    Stage1Stats stats = train_stage1_run(cand, segs, cfg, std::uint64_t(r));
    // Select by the final behaviour-cloning loss: dec1 is the artifact kept
    // after stage 1, and action reconstruction is the term that requires the
    // code to carry the true goal (the observation term can hide residual
    // goal merges behind regional codes).
    const double score =
        stats.loss_curve.empty() ? std::numeric_limits<double>::infinity()
                                 : stats.action_loss;
    restart_losses.push_back(score);
    if (score < best_score) {
      best_score = score;
      best = std::move(cand);
      best_stats = std::move(stats);
    }
  }
  m = std::move(best);
  best_stats.restart_losses = std::move(restart_losses);
  return best_stats;
}

double code_purity(const Stage1Model& m, const SegmentSet& segs) {
  const int n = segs.count();
  if (n == 0) return 0.0;
  std::vector<std::vector<long>> counts(std::size_t(m.code_count),
                                        std::vector<long>(std::size_t(segs.n_goals) + 1, 0));
  for (int s = 0; s < n; ++s) {
    const int c = m.encode(segs.seg_obs(s), segs.seg_actions(s), segs.seg_valid(s),
                           segs.seg_len);
    const int g = segs.goal[std::size_t(s)];
    counts[std::size_t(c)][std::size_t(g < 0 ? segs.n_goals : g)]++;
  }
  long matched = 0;
  for (const auto& row : counts)
    matched += *std::max_element(row.begin(), row.end());
  return double(matched) / double(n);
}

AuxModel::AuxModel(int obs_dim_, int n_prim_actions_, int n_tm_actions_, int z_dim_,
                   int n_envs, Rng& rng)
    : obs_dim(obs_dim_), n_prim_actions(n_prim_actions_), n_tm_actions(n_tm_actions_),
      z_dim(z_dim_) {
  enc = approx::SeqEncoder<float>::build(ps, obs_dim + n_prim_actions, 64, 64, z_dim,
                                         approx::Act::Relu, rng);
  dec = approx::Mlp<float>::build(ps, z_dim, {64, 64}, n_tm_actions, approx::Act::Relu,
                                  rng);
  envs.resize(std::size_t(n_envs));
  for (auto& e : envs) e.open.ws.reset_state(enc.hid);
}

void AuxModel::build_input(const float* obs, int prev_action, std::vector<float>& x) const {
  x.assign(std::size_t(obs_dim + n_prim_actions), 0.0f);
  std::copy_n(obs, obs_dim, x.begin());
  if (prev_action >= 0) x[std::size_t(obs_dim + prev_action)] = 1.0f;
}

void AuxModel::begin_window() {
  for (auto& e : envs) {
    e.closed.clear();
    auto h = e.open.ws.h;
    auto c = e.open.ws.c;
    e.open = Window{};
    e.open.ws.reset_state(enc.hid);
    if (h.size() == e.open.ws.h.size()) {
      e.open.ws.h = std::move(h);
      e.open.ws.c = std::move(c);
    }
  }
}

void AuxModel::reset_env(int e) {
  auto& st = envs[std::size_t(e)];
  if (!st.open.ws.steps.empty()) st.closed.push_back(std::move(st.open));
  st.open = Window{};
  st.open.ws.reset_state(enc.hid);
}

const std::vector<float>& AuxModel::step(int e, const float* obs, int prev_action) {
  std::vector<float> x;
  build_input(obs, prev_action, x);
  return enc.step(ps, x.data(), envs[std::size_t(e)].open.ws);
}

std::vector<float> AuxModel::peek(int e, const float* obs, int prev_action) const {
  std::vector<float> x;
  build_input(obs, prev_action, x);
  const auto& ws = envs[std::size_t(e)].open.ws;
  approx::LstmCell<float>::StepWs sw;
  enc.cell.forward_step(ps, x.data(), ws.h.data(), ws.c.data(), sw);
  approx::Mlp<float>::Ws hw;
  return enc.head.forward(ps, sw.h.data(), hw);
}

void AuxModel::label(int e, int tm_action) {
  envs[std::size_t(e)].open.labels.push_back(tm_action);
}

double AuxModel::update() {
  long total = 0;
  for (const auto& e : envs) {
    for (const auto& w : e.closed) total += long(w.labels.size());
    total += long(e.open.labels.size());
  }
  if (total == 0) return 0.0;
  ps.zero_grad();
  double loss = 0.0;
  std::vector<float> lp(std::size_t(n_tm_actions), 0.0f);
  std::vector<float> dlogits(std::size_t(n_tm_actions), 0.0f);
  std::vector<float> dz(std::size_t(z_dim), 0.0f);
  auto run = [&](const Window& w) {
    std::vector<std::vector<float>> dys(w.ws.steps.size());
    approx::Mlp<float>::Ws dws;
    for (std::size_t t = 0; t < w.labels.size() && t < w.ws.outputs.size(); ++t) {
      const int y = w.labels[t];
      const auto& logits = dec.forward(ps, w.ws.outputs[t].data(), dws);
      approx::log_softmax(logits.data(), n_tm_actions, lp.data());
      loss -= double(lp[std::size_t(y)]);
      for (int a = 0; a < n_tm_actions; ++a)
        dlogits[std::size_t(a)] =
            float((std::exp(double(lp[std::size_t(a)])) - (a == y ? 1.0 : 0.0)) /
                  double(total));
      dec.backward(ps, dws, dlogits.data(), dz.data());
      dys[t].assign(dz.begin(), dz.end());
    }
    enc.backward(ps, w.ws, dys);
  };
  for (const auto& e : envs) {
    for (const auto& w : e.closed) run(w);
    if (!e.open.ws.steps.empty()) run(e.open);
  }
  ps.adam_step(lr, 0.9, 0.999, 1e-8, max_grad_norm);
  return loss / double(total);
}

RolloutAgent::Decision FlatAgent::act(int, const std::vector<float>& env_obs, Rng& rng,
                                      float* ppo_obs_out) {
  std::copy(env_obs.begin(), env_obs.end(), ppo_obs_out);
  Decision d;
  d.ppo_action = ac.act(ppo_obs_out, rng, d.logp, d.value);
  d.env_action = d.ppo_action;
  return d;
}

float FlatAgent::bootstrap_value(int, const std::vector<float>& env_obs) {
  return ac.value_of(env_obs.data());
}

LiamAgent::LiamAgent(int obs_dim, int n_actions, int n_tm_actions, int z_dim, int n_envs,
                     Rng& rng)
    : aux(obs_dim, n_actions, n_tm_actions, z_dim, n_envs, rng),
      ac(obs_dim + z_dim, n_actions, rng), prev_action(std::size_t(n_envs), -1) {}

void LiamAgent::episode_begin(int env_idx) {
  aux.reset_env(env_idx);
  prev_action[std::size_t(env_idx)] = -1;
}

RolloutAgent::Decision LiamAgent::act(int env_idx, const std::vector<float>& env_obs,
                                      Rng& rng, float* ppo_obs_out) {
  const auto& z = aux.step(env_idx, env_obs.data(), prev_action[std::size_t(env_idx)]);
  std::copy(env_obs.begin(), env_obs.end(), ppo_obs_out);
  std::copy(z.begin(), z.end(), ppo_obs_out + env_obs.size());
  Decision d;
  d.ppo_action = ac.act(ppo_obs_out, rng, d.logp, d.value);
  d.env_action = d.ppo_action;
  prev_action[std::size_t(env_idx)] = d.ppo_action;
  return d;
}

void LiamAgent::post_step(int env_idx, int tm_action, bool) {
  aux.label(env_idx, tm_action);
}

float LiamAgent::bootstrap_value(int env_idx, const std::vector<float>& env_obs) {
  const auto z = aux.peek(env_idx, env_obs.data(), prev_action[std::size_t(env_idx)]);
  std::vector<float> x(env_obs);
  x.insert(x.end(), z.begin(), z.end());
  return ac.value_of(x.data());
}

GrillAgent::GrillAgent(std::shared_ptr<const Stage1Model> stage1_, int n_tm_actions,
                       int n_envs, bool with_aux_, int z_dim, Rng& rng)
    : stage1(std::move(stage1_)), with_aux(with_aux_),
      prev_action(std::size_t(n_envs), -1), held_code(std::size_t(n_envs), 0),
      hold_left(std::size_t(n_envs), 0) {
  if (with_aux)
    aux = AuxModel(stage1->obs_dim, stage1->n_actions, n_tm_actions, z_dim, n_envs, rng);
  ac = ActorCritic(stage1->obs_dim + (with_aux ? z_dim : 0), stage1->code_count, rng);
}

void GrillAgent::episode_begin(int env_idx) {
  if (with_aux) aux.reset_env(env_idx);
  prev_action[std::size_t(env_idx)] = -1;
  hold_left[std::size_t(env_idx)] = 0;
}

RolloutAgent::Decision GrillAgent::act(int env_idx, const std::vector<float>& env_obs,
                                       Rng& rng, float* ppo_obs_out) {
  std::copy(env_obs.begin(), env_obs.end(), ppo_obs_out);
  if (with_aux) {
    const auto& z = aux.step(env_idx, env_obs.data(), prev_action[std::size_t(env_idx)]);
    std::copy(z.begin(), z.end(), ppo_obs_out + env_obs.size());
  }
  Decision d;
  const std::size_t e = std::size_t(env_idx);
  if (hold_left[e] > 0) {
    --hold_left[e];
    d.ppo_action = held_code[e];
    std::vector<float> code_lp;
    ac.action_logp(ppo_obs_out, code_lp);
    d.logp = code_lp[std::size_t(d.ppo_action)];
    d.value = ac.value_of(ppo_obs_out);
  } else {
    d.ppo_action = ac.act(ppo_obs_out, rng, d.logp, d.value);
    held_code[e] = d.ppo_action;
    hold_left[e] = commit_interval - 1;
  }
  std::vector<float> lp;
  stage1->action_logp(env_obs.data(), d.ppo_action, lp);
  d.env_action = sample_from_logp(lp, rng);
  prev_action[e] = d.env_action;
  return d;
}

void GrillAgent::post_step(int env_idx, int tm_action, bool) {
  if (with_aux) aux.label(env_idx, tm_action);
}

float GrillAgent::bootstrap_value(int env_idx, const std::vector<float>& env_obs) {
  std::vector<float> x(env_obs);
  if (with_aux) {
    const auto z = aux.peek(env_idx, env_obs.data(), prev_action[std::size_t(env_idx)]);
    x.insert(x.end(), z.begin(), z.end());
  }
  return ac.value_of(x.data());
}

}  // namespace hetgoal

#include "hetgoal/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace hetgoal {

void PpoConfig::validate() const {
  if (batch_size % minibatches != 0)
    throw std::invalid_argument("ppo: batch_size must be divisible by minibatches");
  if (batch_size % n_envs != 0)
    throw std::invalid_argument("ppo: batch_size must be divisible by n_envs");
}

void RolloutBatch::resize(int envs, int steps, int dim) {
  n_envs = envs;
  steps_per_env = steps;
  obs_dim = dim;
  const std::size_t n = std::size_t(rows());
  obs.assign(n * std::size_t(dim), 0.0f);
  actions.assign(n, 0);
  logp.assign(n, 0.0f);
  rewards.assign(n, 0.0f);
  values.assign(n, 0.0f);
  dones.assign(n, 0);
  bootstrap.assign(std::size_t(envs), 0.0f);
  advantages.clear();
  returns.clear();
}

namespace {
constexpr std::uint32_t kBatchMagic = 0x42524748;  // "HGRB"
constexpr std::uint32_t kBatchVersion = 1;
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
}  // namespace

void RolloutBatch::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  put(out, kBatchMagic);
  put(out, kBatchVersion);
  put<std::int32_t>(out, n_envs);
  put<std::int32_t>(out, steps_per_env);
  put<std::int32_t>(out, obs_dim);
  put_vec(out, obs);
  put_vec(out, actions);
  put_vec(out, logp);
  put_vec(out, rewards);
  put_vec(out, values);
  put_vec(out, dones);
  put_vec(out, bootstrap);
  if (!out) throw std::runtime_error("write failure: " + path);
}

RolloutBatch RolloutBatch::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  if (get<std::uint32_t>(in) != kBatchMagic) throw std::runtime_error("bad batch magic");
  if (get<std::uint32_t>(in) != kBatchVersion) throw std::runtime_error("bad batch version");
  RolloutBatch b;
  b.n_envs = get<std::int32_t>(in);
  b.steps_per_env = get<std::int32_t>(in);
  b.obs_dim = get<std::int32_t>(in);
  get_vec(in, b.obs);
  get_vec(in, b.actions);
  get_vec(in, b.logp);
  get_vec(in, b.rewards);
  get_vec(in, b.values);
  get_vec(in, b.dones);
  get_vec(in, b.bootstrap);
  if (!in) throw std::runtime_error("truncated batch file: " + path);
  return b;
}

void compute_gae(RolloutBatch& batch, double gamma, double lambda) {
  const int n = batch.rows();
  batch.advantages.assign(std::size_t(n), 0.0);
  batch.returns.assign(std::size_t(n), 0.0);
  for (int e = 0; e < batch.n_envs; ++e) {
    double gae = 0.0;
    for (int t = batch.steps_per_env - 1; t >= 0; --t) {
      const int r = e * batch.steps_per_env + t;
      const bool done = batch.dones[std::size_t(r)] != 0;
      double next_value;
      if (done) {
        next_value = 0.0;
      } else if (t + 1 < batch.steps_per_env) {
        next_value = batch.values[std::size_t(r + 1)];
      } else {
        next_value = batch.bootstrap[std::size_t(e)];
      }
      const double delta =
          double(batch.rewards[std::size_t(r)]) + gamma * next_value - double(batch.values[std::size_t(r)]);
      gae = delta + (done ? 0.0 : gamma * lambda * gae);
      batch.advantages[std::size_t(r)] = gae;
      batch.returns[std::size_t(r)] = gae + double(batch.values[std::size_t(r)]);
    }
  }
}

ActorCritic::ActorCritic(int obs_dim_, int n_actions_, Rng& rng)
    : obs_dim(obs_dim_), n_actions(n_actions_) {
  pi = approx::Mlp<float>::build(pi_ps, obs_dim, {64, 64}, n_actions, approx::Act::Swish, rng);
  v = approx::Mlp<float>::build(v_ps, obs_dim, {64, 64}, 1, approx::Act::Swish, rng);
}

int ActorCritic::act(const float* x, Rng& rng, float& logp, float& value) const {
  approx::Mlp<float>::Ws ws;
  const auto& logits = pi.forward(pi_ps, x, ws);
  std::vector<float> lp(std::size_t(n_actions), 0.0f);
  approx::log_softmax(logits.data(), n_actions, lp.data());
  // inverse-CDF sample over probabilities
  double u = rng.uniform();
  int a = n_actions - 1;
  double acc = 0.0;
  for (int i = 0; i < n_actions; ++i) {
    acc += std::exp(double(lp[std::size_t(i)]));
    if (u < acc) {
      a = i;
      break;
    }
  }
  logp = lp[std::size_t(a)];
  value = value_of(x);
  return a;
}

int ActorCritic::greedy(const float* x) const {
  approx::Mlp<float>::Ws ws;
  const auto& logits = pi.forward(pi_ps, x, ws);
  return int(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

float ActorCritic::value_of(const float* x) const {
  approx::Mlp<float>::Ws ws;
  return v.forward(v_ps, x, ws)[0];
}

void ActorCritic::action_logp(const float* x, std::vector<float>& logp) const {
  approx::Mlp<float>::Ws ws;
  const auto& logits = pi.forward(pi_ps, x, ws);
  logp.resize(std::size_t(n_actions));
  approx::log_softmax(logits.data(), n_actions, logp.data());
}

void ppo_accumulate(ActorCritic& ac, const RolloutBatch& batch, const std::vector<int>& idx,
                    const PpoConfig& cfg, const std::vector<double>& advantages,
                    PpoStats& stats) {
  const double inv_n = 1.0 / double(idx.size());
  approx::Mlp<float>::Ws pi_ws, v_ws;
  std::vector<float> lp(std::size_t(ac.n_actions), 0.0f), p(std::size_t(ac.n_actions), 0.0f);
  std::vector<float> dlogits(std::size_t(ac.n_actions), 0.0f);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int r = idx[k];
    const float* x = batch.row_obs(r);
    const int a = batch.actions[std::size_t(r)];
    const double adv = advantages[k];

    const auto& logits = ac.pi.forward(ac.pi_ps, x, pi_ws);
    approx::log_softmax(logits.data(), ac.n_actions, lp.data());
    double entropy = 0.0;
    for (int i = 0; i < ac.n_actions; ++i) {
      p[std::size_t(i)] = std::exp(lp[std::size_t(i)]);
      entropy -= double(p[std::size_t(i)]) * double(lp[std::size_t(i)]);
    }
    const double ratio = std::exp(double(lp[std::size_t(a)]) - double(batch.logp[std::size_t(r)]));
    const bool clipped = (adv >= 0.0 && ratio > 1.0 + cfg.clip_eps) ||
                         (adv < 0.0 && ratio < 1.0 - cfg.clip_eps);
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv;
    stats.policy_loss += -std::min(surr1, surr2) * inv_n;
    stats.entropy += entropy * inv_n;
    if (std::abs(ratio - 1.0) > cfg.clip_eps) stats.clip_fraction += inv_n;

    // d/dlogits of (-surrogate - entropy_coef * H) / n
    const double pg = clipped ? 0.0 : ratio * adv;
    for (int i = 0; i < ac.n_actions; ++i) {
      const double indicator = i == a ? 1.0 : 0.0;
      const double d_surr = -pg * (indicator - double(p[std::size_t(i)]));
      const double d_ent = double(p[std::size_t(i)]) * (double(lp[std::size_t(i)]) + entropy);
      dlogits[std::size_t(i)] = float((d_surr + cfg.entropy_coef * d_ent) * inv_n);
    }
    ac.pi.backward(ac.pi_ps, pi_ws, dlogits.data(), nullptr);

    const float value = ac.v.forward(ac.v_ps, x, v_ws)[0];
    const double verr = double(value) - batch.returns[std::size_t(r)];
    stats.value_loss += verr * verr * inv_n;
    const float dv = float(2.0 * cfg.value_coef * verr * inv_n);
    ac.v.backward(ac.v_ps, v_ws, &dv, nullptr);
  }
}

PpoStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& cfg,
                    Rng& rng) {
  cfg.validate();
  if (batch.advantages.empty())
    throw std::invalid_argument("ppo_update: compute_gae first");
  PpoStats total;
  const int n = batch.rows();
  const int mb_size = n / cfg.minibatches;
  std::vector<int> order(std::size_t(n), 0);
  std::iota(order.begin(), order.end(), 0);
  int n_minibatches = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the caller's stream
    for (int i = n - 1; i > 0; --i)
      std::swap(order[std::size_t(i)], order[std::size_t(rng.uniform_int(std::uint64_t(i + 1)))]);
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      std::vector<int> idx(order.begin() + mb * mb_size, order.begin() + (mb + 1) * mb_size);
      std::vector<double> adv(std::size_t(mb_size), 0.0);
      for (int k = 0; k < mb_size; ++k)
        adv[std::size_t(k)] = batch.advantages[std::size_t(idx[std::size_t(k)])];
      if (cfg.advantage_norm) {
        double mean = 0.0;
        for (auto a : adv) mean += a;
        mean /= double(mb_size);
        double var = 0.0;
        for (auto a : adv) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / double(mb_size)) + 1e-8;
        for (auto& a : adv) a = (a - mean) / sd;
      }
      PpoStats s;
      ac.pi_ps.zero_grad();
      ac.v_ps.zero_grad();
      ppo_accumulate(ac, batch, idx, cfg, adv, s);
      const double loss = s.policy_loss + cfg.value_coef * s.value_loss -
                          cfg.entropy_coef * s.entropy;
      if (!std::isfinite(loss)) {
        ac.pi_ps.zero_grad();
        ac.v_ps.zero_grad();
        ++total.skipped_minibatches;
        continue;
      }
      ac.pi_ps.adam_step(cfg.lr, 0.9, 0.999, 1e-8, cfg.max_grad_norm);
      ac.v_ps.adam_step(cfg.lr, 0.9, 0.999, 1e-8, cfg.max_grad_norm);
      total.policy_loss += s.policy_loss;
      total.value_loss += s.value_loss;
      total.entropy += s.entropy;
      total.clip_fraction += s.clip_fraction;
      ++n_minibatches;
    }
  }
  if (n_minibatches > 0) {
    total.policy_loss /= n_minibatches;
    total.value_loss /= n_minibatches;
    total.entropy /= n_minibatches;
    total.clip_fraction /= n_minibatches;
  }
  return total;
}

}  // namespace hetgoal

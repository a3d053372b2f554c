#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetgoal/approx/store.hpp"
#include "hetgoal/rng.hpp"

namespace hetgoal::approx {

enum class Act { Identity, Relu, Swish };

inline const char* act_name(Act a) {
  switch (a) {
    case Act::Identity: return "identity";
    case Act::Relu: return "relu";
    case Act::Swish: return "swish";
  }
  return "?";
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T activate(Act a, T z) {
  switch (a) {
    case Act::Identity: return z;
    case Act::Relu: return z > T(0) ? z : T(0);
    case Act::Swish: return z * sigmoid(z);
  }
  return z;
}

template <typename T>
inline T activate_grad(Act a, T z) {
  switch (a) {
    case Act::Identity: return T(1);
    case Act::Relu: return z > T(0) ? T(1) : T(0);
    case Act::Swish: {
      const T s = sigmoid(z);
      return s + z * s * (T(1) - s);
    }
  }
  return T(1);
}

// Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
inline void init_uniform(ParamStore<T>& ps, std::size_t off, std::size_t n,
                         int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  for (std::size_t i = 0; i < n; ++i)
    ps.w[off + i] = T(rng.uniform(-bound, bound));
}

// Feed-forward network over a ParamStore. The final layer is linear
// (identity); interpretation of the output (logits vs real vector) is up to
// the caller.
template <typename T>
struct Mlp {
  struct Layer {
    std::size_t w_off, b_off;
    int in, out;
    Act act;
  };
  std::vector<Layer> layers;
  int in_dim = 0, out_dim = 0;

  struct Ws {
    std::vector<T> input;
    std::vector<std::vector<T>> pre;   // pre-activations per layer
    std::vector<std::vector<T>> post;  // post-activations per layer
  };

  static Mlp build(ParamStore<T>& ps, int in, const std::vector<int>& hidden,
                   int out, Act hidden_act, Rng& rng) {
    Mlp net;
    net.in_dim = in;
    net.out_dim = out;
    std::vector<int> sizes;
    sizes.push_back(in);
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(out);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      Layer layer;
      layer.in = sizes[l];
      layer.out = sizes[l + 1];
      layer.act = (l + 2 == sizes.size()) ? Act::Identity : hidden_act;
      layer.w_off = ps.alloc(std::size_t(layer.in) * std::size_t(layer.out));
      layer.b_off = ps.alloc(std::size_t(layer.out));
      init_uniform(ps, layer.w_off, std::size_t(layer.in) * std::size_t(layer.out),
                   layer.in, rng);
      init_uniform(ps, layer.b_off, std::size_t(layer.out), layer.in, rng);
      net.layers.push_back(layer);
    }
    return net;
  }

  const std::vector<T>& forward(const ParamStore<T>& ps, const T* x, Ws& ws) const {
    ws.input.assign(x, x + in_dim);
    ws.pre.resize(layers.size());
    ws.post.resize(layers.size());
    const T* cur = ws.input.data();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Layer& L = layers[l];
      auto& z = ws.pre[l];
      auto& h = ws.post[l];
      z.assign(std::size_t(L.out), T(0));
      h.resize(std::size_t(L.out));
      const T* W = ps.w.data() + L.w_off;
      const T* b = ps.w.data() + L.b_off;
      for (int o = 0; o < L.out; ++o) {
        T acc = b[o];
        const T* wrow = W + std::size_t(o) * std::size_t(L.in);
        for (int i = 0; i < L.in; ++i) acc += wrow[i] * cur[i];
        z[std::size_t(o)] = acc;
        h[std::size_t(o)] = activate(L.act, acc);
      }
      cur = h.data();
    }
    return ws.post.back();
  }

  // Accumulates parameter gradients into ps.g; writes d(input) when dx != nullptr.
  void backward(ParamStore<T>& ps, const Ws& ws, const T* dout, T* dx) const {
    std::vector<T> delta(dout, dout + out_dim);
    std::vector<T> prev;
    for (std::size_t li = layers.size(); li-- > 0;) {
      const Layer& L = layers[li];
      const auto& z = ws.pre[li];
      const T* in = li == 0 ? ws.input.data() : ws.post[li - 1].data();
      for (int o = 0; o < L.out; ++o)
        delta[std::size_t(o)] *= activate_grad(L.act, z[std::size_t(o)]);
      T* gW = ps.g.data() + L.w_off;
      T* gb = ps.g.data() + L.b_off;
      for (int o = 0; o < L.out; ++o) {
        const T d = delta[std::size_t(o)];
        gb[o] += d;
        T* grow = gW + std::size_t(o) * std::size_t(L.in);
        for (int i = 0; i < L.in; ++i) grow[i] += d * in[i];
      }
      if (li == 0 && dx == nullptr) break;
      prev.assign(std::size_t(L.in), T(0));
      const T* W = ps.w.data() + L.w_off;
      for (int o = 0; o < L.out; ++o) {
        const T d = delta[std::size_t(o)];
        const T* wrow = W + std::size_t(o) * std::size_t(L.in);
        for (int i = 0; i < L.in; ++i) prev[std::size_t(i)] += d * wrow[i];
      }
      if (li == 0) {
        for (int i = 0; i < L.in; ++i) dx[i] = prev[std::size_t(i)];
        return;
      }
      delta = prev;
    }
    if (dx != nullptr && layers.empty())
      for (int i = 0; i < in_dim; ++i) dx[i] = dout[i];
  }
};

// Single LSTM cell, gate order (i, f, g, o).
template <typename T>
struct LstmCell {
  std::size_t wx_off = 0, wh_off = 0, b_off = 0;
  int in = 0, hid = 0;

  struct StepWs {
    std::vector<T> x, h_prev, c_prev;
    std::vector<T> gi, gf, gg, go;  // post-nonlinearity gates
    std::vector<T> c, h, tanh_c;
  };

  static LstmCell build(ParamStore<T>& ps, int in, int hid, Rng& rng) {
    LstmCell cell;
    cell.in = in;
    cell.hid = hid;
    const std::size_t nx = std::size_t(4 * hid) * std::size_t(in);
    const std::size_t nh = std::size_t(4 * hid) * std::size_t(hid);
    cell.wx_off = ps.alloc(nx);
    cell.wh_off = ps.alloc(nh);
    cell.b_off = ps.alloc(std::size_t(4 * hid));
    init_uniform(ps, cell.wx_off, nx, in + hid, rng);
    init_uniform(ps, cell.wh_off, nh, in + hid, rng);
    init_uniform(ps, cell.b_off, std::size_t(4 * hid), in + hid, rng);
    return cell;
  }

  void forward_step(const ParamStore<T>& ps, const T* x, const T* h_prev,
                    const T* c_prev, StepWs& ws) const {
    ws.x.assign(x, x + in);
    ws.h_prev.assign(h_prev, h_prev + hid);
    ws.c_prev.assign(c_prev, c_prev + hid);
    ws.gi.resize(std::size_t(hid));
    ws.gf.resize(std::size_t(hid));
    ws.gg.resize(std::size_t(hid));
    ws.go.resize(std::size_t(hid));
    ws.c.resize(std::size_t(hid));
    ws.h.resize(std::size_t(hid));
    ws.tanh_c.resize(std::size_t(hid));
    const T* Wx = ps.w.data() + wx_off;
    const T* Wh = ps.w.data() + wh_off;
    const T* b = ps.w.data() + b_off;
    for (int j = 0; j < hid; ++j) {
      T pre[4];
      for (int k = 0; k < 4; ++k) {
        const std::size_t row = std::size_t(k * hid + j);
        T acc = b[row];
        const T* wxr = Wx + row * std::size_t(in);
        for (int i = 0; i < in; ++i) acc += wxr[i] * x[i];
        const T* whr = Wh + row * std::size_t(hid);
        for (int i = 0; i < hid; ++i) acc += whr[i] * h_prev[i];
        pre[k] = acc;
      }
      const T i_g = sigmoid(pre[0]);
      const T f_g = sigmoid(pre[1]);
      const T g_g = std::tanh(pre[2]);
      const T o_g = sigmoid(pre[3]);
      const T c = f_g * c_prev[j] + i_g * g_g;
      const T tc = std::tanh(c);
      ws.gi[std::size_t(j)] = i_g;
      ws.gf[std::size_t(j)] = f_g;
      ws.gg[std::size_t(j)] = g_g;
      ws.go[std::size_t(j)] = o_g;
      ws.c[std::size_t(j)] = c;
      ws.tanh_c[std::size_t(j)] = tc;
      ws.h[std::size_t(j)] = o_g * tc;
    }
  }

  // dh/dc: incoming gradients for this step's outputs; outputs the gradients
  // w.r.t. the previous state (accumulated into dh_prev/dc_prev) and
  // optionally w.r.t. the input.
  void backward_step(ParamStore<T>& ps, const StepWs& ws, const T* dh, const T* dc,
                     T* dh_prev, T* dc_prev, T* dx) const {
    const T* Wx = ps.w.data() + wx_off;
    const T* Wh = ps.w.data() + wh_off;
    T* gWx = ps.g.data() + wx_off;
    T* gWh = ps.g.data() + wh_off;
    T* gb = ps.g.data() + b_off;
    std::vector<T> dpre(std::size_t(4 * hid), T(0));
    for (int j = 0; j < hid; ++j) {
      const T i_g = ws.gi[std::size_t(j)], f_g = ws.gf[std::size_t(j)];
      const T g_g = ws.gg[std::size_t(j)], o_g = ws.go[std::size_t(j)];
      const T tc = ws.tanh_c[std::size_t(j)];
      const T dhj = dh[j];
      T dcj = dc[j] + dhj * o_g * (T(1) - tc * tc);
      const T doj = dhj * tc;
      dpre[std::size_t(0 * hid + j)] = dcj * g_g * i_g * (T(1) - i_g);
      dpre[std::size_t(1 * hid + j)] = dcj * ws.c_prev[std::size_t(j)] * f_g * (T(1) - f_g);
      dpre[std::size_t(2 * hid + j)] = dcj * i_g * (T(1) - g_g * g_g);
      dpre[std::size_t(3 * hid + j)] = doj * o_g * (T(1) - o_g);
      dc_prev[j] += dcj * f_g;
    }
    for (int r = 0; r < 4 * hid; ++r) {
      const T d = dpre[std::size_t(r)];
      if (d == T(0)) continue;
      gb[r] += d;
      T* gxr = gWx + std::size_t(r) * std::size_t(in);
      const T* xr = ws.x.data();
      for (int i = 0; i < in; ++i) gxr[i] += d * xr[i];
      T* ghr = gWh + std::size_t(r) * std::size_t(hid);
      const T* hp = ws.h_prev.data();
      for (int i = 0; i < hid; ++i) ghr[i] += d * hp[i];
      if (dx) {
        const T* wxr = Wx + std::size_t(r) * std::size_t(in);
        for (int i = 0; i < in; ++i) dx[i] += d * wxr[i];
      }
      const T* whr = Wh + std::size_t(r) * std::size_t(hid);
      for (int i = 0; i < hid; ++i) dh_prev[i] += d * whr[i];
    }
  }
};

// Recurrent encoder: LSTM cell followed by a dense head, matching the
// "(64, 64) (LSTM, dense)" layout. step() caches everything needed for
// truncated backprop through the consumed sequence.
template <typename T>
struct SeqEncoder {
  LstmCell<T> cell;
  Mlp<T> head;  // hid -> dense -> out
  int in_dim = 0, hid = 0, out_dim = 0;

  struct Ws {
    std::vector<typename LstmCell<T>::StepWs> steps;
    std::vector<typename Mlp<T>::Ws> head_ws;
    std::vector<std::vector<T>> outputs;
    std::vector<T> h, c;  // running state
    void reset_state(int hid) {
      h.assign(std::size_t(hid), T(0));
      c.assign(std::size_t(hid), T(0));
      steps.clear();
      head_ws.clear();
      outputs.clear();
    }
  };

  static SeqEncoder build(ParamStore<T>& ps, int in, int hid, int dense, int out,
                          Act head_act, Rng& rng) {
    SeqEncoder enc;
    enc.in_dim = in;
    enc.hid = hid;
    enc.out_dim = out;
    enc.cell = LstmCell<T>::build(ps, in, hid, rng);
    enc.head = Mlp<T>::build(ps, hid, {dense}, out, head_act, rng);
    return enc;
  }

  const std::vector<T>& step(const ParamStore<T>& ps, const T* x, Ws& ws) const {
    ws.steps.emplace_back();
    cell.forward_step(ps, x, ws.h.data(), ws.c.data(), ws.steps.back());
    ws.h = ws.steps.back().h;
    ws.c = ws.steps.back().c;
    ws.head_ws.emplace_back();
    ws.outputs.push_back(head.forward(ps, ws.h.data(), ws.head_ws.back()));
    return ws.outputs.back();
  }

  // dys[t] is the loss gradient w.r.t. the step-t output (may be empty for
  // steps that do not contribute). Optionally returns input gradients.
  void backward(ParamStore<T>& ps, const Ws& ws,
                const std::vector<std::vector<T>>& dys,
                std::vector<std::vector<T>>* dxs = nullptr) const {
    const std::size_t n = ws.steps.size();
    if (dys.size() != n) throw std::invalid_argument("SeqEncoder::backward: dys size");
    if (dxs) dxs->assign(n, std::vector<T>(std::size_t(in_dim), T(0)));
    std::vector<T> dh(std::size_t(hid), T(0)), dc(std::size_t(hid), T(0));
    std::vector<T> dh_head(std::size_t(hid), T(0));
    for (std::size_t t = n; t-- > 0;) {
      if (!dys[t].empty()) {
        head.backward(ps, ws.head_ws[t], dys[t].data(), dh_head.data());
        for (int j = 0; j < hid; ++j) dh[std::size_t(j)] += dh_head[std::size_t(j)];
      }
      std::vector<T> dh_prev(std::size_t(hid), T(0)), dc_prev(std::size_t(hid), T(0));
      cell.backward_step(ps, ws.steps[t], dh.data(), dc.data(), dh_prev.data(),
                         dc_prev.data(), dxs ? (*dxs)[t].data() : nullptr);
      dh = std::move(dh_prev);
      dc = std::move(dc_prev);
    }
  }
};

// Straight-through Gumbel-softmax head. Training mode emits a one-hot sample
// whose gradient flows through the soft relaxation; evaluation mode is argmax.
template <typename T>
struct GumbelHead {
  int code_count = 0;

  struct Ws {
    std::vector<T> soft;
    int hard = -1;
    double tau = 1.0;
    bool training = false;
  };

  void forward(const T* logits, double tau, bool training, Rng& rng, Ws& ws,
               std::vector<T>& out) const {
    out.assign(std::size_t(code_count), T(0));
    ws.tau = tau;
    ws.training = training;
    if (!training) {
      int best = 0;
      for (int k = 1; k < code_count; ++k)
        if (logits[k] > logits[best]) best = k;
      ws.hard = best;
      out[std::size_t(best)] = T(1);
      return;
    }
    std::vector<T> z(std::size_t(code_count), T(0));
    T zmax = std::numeric_limits<T>::lowest();
    for (int k = 0; k < code_count; ++k) {
      z[std::size_t(k)] = T((double(logits[k]) + rng.gumbel()) / tau);
      if (z[std::size_t(k)] > zmax) zmax = z[std::size_t(k)];
    }
    ws.soft.resize(std::size_t(code_count));
    T sum = T(0);
    int best = 0;
    for (int k = 0; k < code_count; ++k) {
      ws.soft[std::size_t(k)] = std::exp(z[std::size_t(k)] - zmax);
      sum += ws.soft[std::size_t(k)];
      if (z[std::size_t(k)] > z[std::size_t(best)]) best = k;
    }
    for (int k = 0; k < code_count; ++k) ws.soft[std::size_t(k)] /= sum;
    ws.hard = best;
    out[std::size_t(best)] = T(1);
  }

  // Straight-through: gradient of the hard sample is taken as the gradient of
  // the soft relaxation, softmax((logits + gumbel)/tau).
  void backward(const Ws& ws, const T* dout, T* dlogits) const {
    if (!ws.training) {
      for (int k = 0; k < code_count; ++k) dlogits[k] = T(0);
      return;
    }
    T dot = T(0);
    for (int k = 0; k < code_count; ++k) dot += dout[k] * ws.soft[std::size_t(k)];
    for (int k = 0; k < code_count; ++k)
      dlogits[k] = T(double(ws.soft[std::size_t(k)]) * double(dout[k] - dot) / ws.tau);
  }
};

// Numerically stable log-softmax.
template <typename T>
inline void log_softmax(const T* logits, int n, T* out) {
  T zmax = logits[0];
  for (int i = 1; i < n; ++i) zmax = std::max(zmax, logits[i]);
  T sum = T(0);
  for (int i = 0; i < n; ++i) sum += std::exp(logits[i] - zmax);
  const T lse = zmax + std::log(sum);
  for (int i = 0; i < n; ++i) out[i] = logits[i] - lse;
}

}  // namespace hetgoal::approx

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hetgoal::approx {

// Flat parameter storage shared by all layers of one model: parameters,
// gradient accumulator and Adam moment buffers with matching layout.
template <typename T>
struct ParamStore {
  std::vector<T> w;  // parameters
  std::vector<T> g;  // gradient accumulator
  std::vector<T> m;  // Adam first moment
  std::vector<T> v;  // Adam second moment
  std::int64_t adam_t = 0;

  std::size_t alloc(std::size_t n) {
    const std::size_t off = w.size();
    w.resize(off + n, T(0));
    g.resize(off + n, T(0));
    m.resize(off + n, T(0));
    v.resize(off + n, T(0));
    return off;
  }

  std::size_t size() const { return w.size(); }

  void zero_grad() { std::fill(g.begin(), g.end(), T(0)); }

  double grad_norm() const {
    double s = 0.0;
    for (auto x : g) s += double(x) * double(x);
    return std::sqrt(s);
  }

  // Global-norm clip followed by an Adam update; gradients are cleared.
  // Returns false (update aborted, gradients cleared) on non-finite gradients.
  bool adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8, double max_grad_norm = 0.0) {
    const double norm = grad_norm();
    if (!std::isfinite(norm)) {
      zero_grad();
      return false;
    }
    double scale = 1.0;
    if (max_grad_norm > 0.0 && norm > max_grad_norm) scale = max_grad_norm / norm;
    ++adam_t;
    const double bc1 = 1.0 - std::pow(beta1, double(adam_t));
    const double bc2 = 1.0 - std::pow(beta2, double(adam_t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = double(g[i]) * scale;
      const double mi = beta1 * double(m[i]) + (1.0 - beta1) * gi;
      const double vi = beta2 * double(v[i]) + (1.0 - beta2) * gi * gi;
      m[i] = T(mi);
      v[i] = T(vi);
      w[i] = T(double(w[i]) - lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
    }
    zero_grad();
    return true;
  }
};

}  // namespace hetgoal::approx

#include <cmath>
#include <memory>
#include <vector>

#include "asma/ops.hpp"

namespace asma {

template <typename T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.shape().rank() != 2 || w.shape().rank() != 2) throw ShapeError("linear: x and w must be rank 2");
  const int64_t n = x.shape()[0], c = x.shape()[1], m = w.shape()[0];
  if (w.shape()[1] != c) throw ShapeError("linear: weight " + w.shape().str() + " incompatible with input " + x.shape().str());
  if (b.defined() && (b.shape().rank() != 1 || b.shape()[0] != m))
    throw ShapeError("linear: bias must be rank-1 of length " + std::to_string(m));
  // plain sequential loops: head sizes are tiny and the arithmetic order is
  // part of the reproducibility contract
  Tensor<T> y = Tensor<T>::zeros(Shape{n, m});
  auto xd = x.data();
  auto wd = w.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) {
      T s = T(0);
      for (int64_t k = 0; k < c; ++k) s += xd[i * c + k] * wd[j * c + k];
      yd[i * m + j] = s;
    }
  if (b.defined()) {
    auto bd = b.data();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < m; ++j) yd[i * m + j] += bd[static_cast<size_t>(j)];
  }
  bool rx = x.requires_grad(), rw = w.requires_grad(), rb = b.defined() && b.requires_grad();
  if (tape.recording() && (rx || rw || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x, wc = w, bc = b;
    tape.record([xc, wc, bc, y, n, c, m]() mutable {
      auto g = y.grad();
      if (xc.requires_grad()) {
        xc.ensure_grad();
        auto xg = xc.grad();
        auto wv = wc.data();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < m; ++j) {
            const T gv = g[i * m + j];
            for (int64_t k = 0; k < c; ++k) xg[i * c + k] += gv * wv[j * c + k];
          }
      }
      if (wc.requires_grad()) {
        wc.ensure_grad();
        auto wg = wc.grad();
        auto xv = xc.data();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < m; ++j) {
            const T gv = g[i * m + j];
            for (int64_t k = 0; k < c; ++k) wg[j * c + k] += gv * xv[i * c + k];
          }
      }
      if (bc.defined() && bc.requires_grad()) {
        bc.ensure_grad();
        auto bg = bc.grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < m; ++j) bg[static_cast<size_t>(j)] += g[i * m + j];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> label_projection(Tape<T>& tape, const Tensor<T>& feat, const Tensor<T>& V, const Tensor<T>& label) {
  if (feat.shape().rank() != 2 || V.shape().rank() != 2 || label.shape().rank() != 1)
    throw ShapeError("label_projection: feat (N,C), V (K,C), label (K) expected");
  const int64_t n = feat.shape()[0], c = feat.shape()[1], k = V.shape()[0];
  if (V.shape()[1] != c || label.shape()[0] != k)
    throw ShapeError("label_projection: inconsistent shapes feat " + feat.shape().str() + " V " + V.shape().str() +
                     " label " + label.shape().str());
  // e = label^T V, then out_n = e . feat_n
  std::vector<T> e(static_cast<size_t>(c), T(0));
  auto vd = V.data();
  auto ld = label.data();
  for (int64_t kk = 0; kk < k; ++kk) {
    const T lv = ld[static_cast<size_t>(kk)];
    if (lv == T(0)) continue;
    for (int64_t j = 0; j < c; ++j) e[static_cast<size_t>(j)] += lv * vd[kk * c + j];
  }
  Tensor<T> y = Tensor<T>::zeros(Shape{n});
  auto fd = feat.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i) {
    T s = T(0);
    for (int64_t j = 0; j < c; ++j) s += e[static_cast<size_t>(j)] * fd[i * c + j];
    yd[static_cast<size_t>(i)] = s;
  }
  bool rf = feat.requires_grad(), rv = V.requires_grad();
  if (tape.recording() && (rf || rv)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> fc = feat, vc = V, lc = label;
    auto ec = std::make_shared<std::vector<T>>(std::move(e));
    tape.record([fc, vc, lc, y, ec, n, c, k]() mutable {
      auto g = y.grad();
      if (fc.requires_grad()) {
        fc.ensure_grad();
        auto fg = fc.grad();
        for (int64_t i = 0; i < n; ++i) {
          const T gv = g[static_cast<size_t>(i)];
          for (int64_t j = 0; j < c; ++j) fg[i * c + j] += gv * (*ec)[static_cast<size_t>(j)];
        }
      }
      if (vc.requires_grad()) {
        vc.ensure_grad();
        auto vg = vc.grad();
        auto fv = fc.data();
        auto lv = lc.data();
        // dV_kc = label_k * sum_n g_n feat_nc
        std::vector<T> gf(static_cast<size_t>(c), T(0));
        for (int64_t i = 0; i < n; ++i) {
          const T gv = g[static_cast<size_t>(i)];
          for (int64_t j = 0; j < c; ++j) gf[static_cast<size_t>(j)] += gv * fv[i * c + j];
        }
        for (int64_t kk = 0; kk < k; ++kk) {
          const T l = lv[static_cast<size_t>(kk)];
          if (l == T(0)) continue;
          for (int64_t j = 0; j < c; ++j) vg[kk * c + j] += l * gf[static_cast<size_t>(j)];
        }
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits, const std::vector<int>& targets) {
  if (logits.shape().rank() != 2) throw ShapeError("softmax_cross_entropy: logits must be (N,K)");
  const int64_t n = logits.shape()[0], k = logits.shape()[1];
  if (static_cast<int64_t>(targets.size()) != n) throw ShapeError("softmax_cross_entropy: target count mismatch");
  for (int t : targets)
    if (t < 0 || t >= k) throw ConfigError("softmax_cross_entropy: target class out of range");
  auto ld = logits.data();
  auto probs = std::make_shared<std::vector<T>>(static_cast<size_t>(n * k));
  T loss = T(0);
  for (int64_t i = 0; i < n; ++i) {
    const T* row = ld.data() + i * k;
    T mx = row[0];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    T z = T(0);
    for (int64_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const T logz = std::log(z) + mx;
    for (int64_t j = 0; j < k; ++j) (*probs)[static_cast<size_t>(i * k + j)] = std::exp(row[j] - logz);
    loss -= row[targets[static_cast<size_t>(i)]] - logz;
  }
  Tensor<T> y = Tensor<T>::scalar(loss / static_cast<T>(n));
  if (tape.recording() && logits.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> lc = logits;
    auto tg = std::make_shared<std::vector<int>>(targets);
    tape.record([lc, y, probs, tg, n, k]() mutable {
      lc.ensure_grad();
      const T g = y.grad()[0] / static_cast<T>(n);
      auto lg = lc.grad();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < k; ++j) {
          T p = (*probs)[static_cast<size_t>(i * k + j)];
          if (j == (*tg)[static_cast<size_t>(i)]) p -= T(1);
          lg[i * k + j] += g * p;
        }
    });
  }
  return y;
}

namespace {

template <typename T>
void normalize_vec(std::vector<T>& v) {
  T n = T(0);
  for (T x : v) n += x * x;
  n = std::sqrt(n);
  if (n < T(1e-20)) n = T(1e-20);
  for (T& x : v) x /= n;
}

// v = normalize(W^T u) for W matrixized (rows x cols).
template <typename T>
std::vector<T> right_vector(std::span<const T> w, std::span<const T> u, int64_t rows, int64_t cols) {
  std::vector<T> v(static_cast<size_t>(cols), T(0));
  for (int64_t r = 0; r < rows; ++r) {
    const T ur = u[static_cast<size_t>(r)];
    const T* row = w.data() + r * cols;
    for (int64_t c = 0; c < cols; ++c) v[static_cast<size_t>(c)] += ur * row[c];
  }
  normalize_vec(v);
  return v;
}

}  // namespace

template <typename T>
Tensor<T> spectral_normalize(Tape<T>& tape, const Tensor<T>& w, Tensor<T>& u_state, bool update_u) {
  const int64_t rows = w.shape()[0];
  const int64_t cols = w.numel() / rows;
  if (u_state.shape().rank() != 1 || u_state.numel() != rows)
    throw ShapeError("spectral_normalize: u_state must be rank-1 of length " + std::to_string(rows));

  auto wd = w.data();
  std::vector<T> v = right_vector<T>(wd, u_state.data(), rows, cols);
  if (update_u) {
    // u <- normalize(W v), one power-iteration step, persisted in place
    std::vector<T> unew(static_cast<size_t>(rows), T(0));
    for (int64_t r = 0; r < rows; ++r) {
      const T* row = wd.data() + r * cols;
      T s = T(0);
      for (int64_t c = 0; c < cols; ++c) s += row[c] * v[static_cast<size_t>(c)];
      unew[static_cast<size_t>(r)] = s;
    }
    normalize_vec(unew);
    auto ud = u_state.data();
    std::copy(unew.begin(), unew.end(), ud.begin());
    v = right_vector<T>(wd, u_state.data(), rows, cols);
  }

  // sigma = u^T W v with u, v held constant
  T sigma = T(0);
  auto ud = u_state.data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = wd.data() + r * cols;
    T s = T(0);
    for (int64_t c = 0; c < cols; ++c) s += row[c] * v[static_cast<size_t>(c)];
    sigma += ud[static_cast<size_t>(r)] * s;
  }
  if (sigma < T(1e-12)) sigma = T(1e-12);  // zero-matrix clamp

  Tensor<T> y = Tensor<T>::zeros(w.shape());
  auto yd = y.data();
  const T inv_sigma = T(1) / sigma;
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = wd[i] * inv_sigma;

  if (tape.recording() && w.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> wc = w;
    Tensor<T> uc = u_state.clone();
    auto vc = std::make_shared<std::vector<T>>(std::move(v));
    tape.record([wc, uc, vc, y, rows, cols, inv_sigma]() mutable {
      // dW = g/sigma - (sum g.y)/sigma * u v^T   (quotient rule through sigma)
      wc.ensure_grad();
      auto g = y.grad();
      auto yv = y.data();
      T gy = T(0);
      for (size_t i = 0; i < g.size(); ++i) gy += g[i] * yv[i];
      auto wg = wc.grad();
      auto uv = uc.data();
      for (int64_t r = 0; r < rows; ++r) {
        const T coef = gy * inv_sigma * uv[static_cast<size_t>(r)];
        T* grow = wg.data() + r * cols;
        const T* gr = g.data() + r * cols;
        for (int64_t c = 0; c < cols; ++c) grow[c] += gr[c] * inv_sigma - coef * (*vc)[static_cast<size_t>(c)];
      }
    });
  }
  return y;
}

template <typename T>
T spectral_sigma(const Tensor<T>& w, const Tensor<T>& u_state) {
  const int64_t rows = w.shape()[0];
  const int64_t cols = w.numel() / rows;
  auto wd = w.data();
  std::vector<T> v = right_vector<T>(wd, u_state.data(), rows, cols);
  T sigma = T(0);
  auto ud = u_state.data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = wd.data() + r * cols;
    T s = T(0);
    for (int64_t c = 0; c < cols; ++c) s += row[c] * v[static_cast<size_t>(c)];
    sigma += ud[static_cast<size_t>(r)] * s;
  }
  return sigma;
}

#define ASMA_INSTANTIATE_DENSE(T)                                                                              \
  template Tensor<T> linear<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> label_projection<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> softmax_cross_entropy<T>(Tape<T>&, const Tensor<T>&, const std::vector<int>&);           \
  template Tensor<T> spectral_normalize<T>(Tape<T>&, const Tensor<T>&, Tensor<T>&, bool);                     \
  template T spectral_sigma<T>(const Tensor<T>&, const Tensor<T>&);

ASMA_INSTANTIATE_DENSE(float)
ASMA_INSTANTIATE_DENSE(double)

}  // namespace asma

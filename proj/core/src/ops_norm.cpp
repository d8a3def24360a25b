#include <cmath>
#include <memory>
#include <vector>

#include "asma/ops.hpp"

namespace asma {

namespace {

// Shared instance-norm kernel. The affine parameters are addressed through
// (tensor, row offset) so the conditional variant reuses the same math and
// gradients land only in the selected row.
template <typename T>
Tensor<T> instance_norm_rowed(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                              int64_t row_offset, T eps, const char* op) {
  if (x.shape().rank() != 4) throw ShapeError(std::string(op) + ": input must be rank 4 NCHW");
  const int64_t n = x.shape().n(), c = x.shape().c(), h = x.shape().h(), w = x.shape().w();
  const int64_t m = h * w;
  if (m < 2) throw NumericError(std::string(op) + ": H*W must be >= 2 for per-slice statistics");
  if (row_offset + c > gamma.numel() || row_offset + c > beta.numel())
    throw ShapeError(std::string(op) + ": affine parameter row shorter than channel count");

  auto xd = x.data();
  auto gd = gamma.data();
  auto bd = beta.data();
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto yd = y.data();
  auto means = std::make_shared<std::vector<T>>(static_cast<size_t>(n * c));
  auto inv_stds = std::make_shared<std::vector<T>>(static_cast<size_t>(n * c));

  for (int64_t i = 0; i < n * c; ++i) {
    const T* src = xd.data() + i * m;
    T* dst = yd.data() + i * m;
    T mean = T(0);
    for (int64_t j = 0; j < m; ++j) mean += src[j];
    mean /= static_cast<T>(m);
    T var = T(0);
    for (int64_t j = 0; j < m; ++j) {
      T d = src[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(m);  // biased, 1/HW
    T inv_std = T(1) / std::sqrt(var + eps);
    (*means)[static_cast<size_t>(i)] = mean;
    (*inv_stds)[static_cast<size_t>(i)] = inv_std;
    const T g = gd[static_cast<size_t>(row_offset + i % c)];
    const T b = bd[static_cast<size_t>(row_offset + i % c)];
    for (int64_t j = 0; j < m; ++j) dst[j] = g * (src[j] - mean) * inv_std + b;
  }

  bool rx = x.requires_grad(), rg = gamma.requires_grad(), rb = beta.requires_grad();
  if (tape.recording() && (rx || rg || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x, gc = gamma, bc = beta;
    tape.record([xc, gc, bc, y, means, inv_stds, row_offset, n, c, m]() mutable {
      auto gy = y.grad();
      auto xv = xc.data();
      auto gv = gc.data();
      bool rx = xc.requires_grad(), rg = gc.requires_grad(), rb = bc.requires_grad();
      if (rx) xc.ensure_grad();
      if (rg) gc.ensure_grad();
      if (rb) bc.ensure_grad();
      for (int64_t i = 0; i < n * c; ++i) {
        const T* src = xv.data() + i * m;
        const T* g = gy.data() + i * m;
        const T mean = (*means)[static_cast<size_t>(i)];
        const T inv_std = (*inv_stds)[static_cast<size_t>(i)];
        const int64_t ch = row_offset + i % c;
        T sum_g = T(0), sum_gx = T(0);
        for (int64_t j = 0; j < m; ++j) {
          T xhat = (src[j] - mean) * inv_std;
          sum_g += g[j];
          sum_gx += g[j] * xhat;
        }
        if (rg) gc.grad()[static_cast<size_t>(ch)] += sum_gx;
        if (rb) bc.grad()[static_cast<size_t>(ch)] += sum_g;
        if (rx) {
          T* xg = xc.grad().data() + i * m;
          const T scale = gv[static_cast<size_t>(ch)] * inv_std;
          const T mg = sum_g / static_cast<T>(m);
          const T mgx = sum_gx / static_cast<T>(m);
          for (int64_t j = 0; j < m; ++j) {
            T xhat = (src[j] - mean) * inv_std;
            xg[j] += scale * (g[j] - mg - xhat * mgx);
          }
        }
      }
    });
  }
  return y;
}

}  // namespace

template <typename T>
Tensor<T> instance_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (gamma.shape().rank() != 1 || beta.shape().rank() != 1 || gamma.numel() != x.shape().c() ||
      beta.numel() != x.shape().c())
    throw ShapeError("instance_norm: gamma/beta must be rank-1 of length C=" + std::to_string(x.shape().c()));
  return instance_norm_rowed(tape, x, gamma, beta, 0, eps, "instance_norm");
}

template <typename T>
Tensor<T> cond_instance_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gammas, const Tensor<T>& betas,
                             const StyleLabel& label, T eps) {
  const int64_t c = x.shape().c();
  if (gammas.shape().rank() != 2 || betas.shape().rank() != 2 || gammas.shape()[1] != c || betas.shape()[1] != c)
    throw ShapeError("cond_instance_norm: gammas/betas must be (K," + std::to_string(c) + ")");
  const int64_t k = gammas.shape()[0];
  if (betas.shape()[0] != k) throw ShapeError("cond_instance_norm: gammas/betas row count mismatch");
  if (label.class_index() >= k)
    throw ConfigError("cond_instance_norm: label " + std::to_string(label.class_index()) + " out of range for K=" +
                      std::to_string(k));
  return instance_norm_rowed(tape, x, gammas, betas, static_cast<int64_t>(label.class_index()) * c, eps,
                             "cond_instance_norm");
}

#define ASMA_INSTANTIATE_NORM(T)                                                                                \
  template Tensor<T> instance_norm<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);      \
  template Tensor<T> cond_instance_norm<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                           const StyleLabel&, T);

ASMA_INSTANTIATE_NORM(float)
ASMA_INSTANTIATE_NORM(double)

}  // namespace asma

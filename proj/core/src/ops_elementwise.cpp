#include <cmath>

#include "asma/ops.hpp"

namespace asma {

namespace {

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
}

}  // namespace

template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto yd = y.data();
  for (size_t i = 0; i < xd.size(); ++i) yd[i] = xd[i] > T(0) ? xd[i] : slope * xd[i];
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, slope]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      auto xv = xc.data();
      // subgradient at exactly 0 is the negative-side slope
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (xv[i] > T(0) ? T(1) : slope);
    });
  }
  return y;
}

template <typename T>
Tensor<T> tanh_op(Tape<T>& tape, const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto yd = y.data();
  for (size_t i = 0; i < xd.size(); ++i) yd[i] = std::tanh(xd[i]);
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      auto yv = y.data();
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (T(1) - yv[i] * yv[i]);
    });
  }
  return y;
}

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto yd = y.data();
  for (size_t i = 0; i < xd.size(); ++i) {
    T v = xd[i];
    yd[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
  }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      auto yv = y.data();
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * yv[i] * (T(1) - yv[i]);
    });
  }
  return y;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "add");
  Tensor<T> y = Tensor<T>::zeros(a.shape());
  auto ad = a.data();
  auto bd = b.data();
  auto yd = y.data();
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = ad[i] + bd[i];
  bool ra = a.requires_grad(), rb = b.requires_grad();
  if (tape.recording() && (ra || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> ac = a, bc = b;
    tape.record([ac, bc, y, ra, rb]() mutable {
      auto g = y.grad();
      if (ra) {
        ac.ensure_grad();
        auto ag = ac.grad();
        for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
      }
      if (rb) {
        bc.ensure_grad();
        auto bg = bc.grad();
        for (size_t i = 0; i < g.size(); ++i) bg[i] += g[i];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "sub");
  Tensor<T> y = Tensor<T>::zeros(a.shape());
  auto ad = a.data();
  auto bd = b.data();
  auto yd = y.data();
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = ad[i] - bd[i];
  bool ra = a.requires_grad(), rb = b.requires_grad();
  if (tape.recording() && (ra || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> ac = a, bc = b;
    tape.record([ac, bc, y, ra, rb]() mutable {
      auto g = y.grad();
      if (ra) {
        ac.ensure_grad();
        auto ag = ac.grad();
        for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
      }
      if (rb) {
        bc.ensure_grad();
        auto bg = bc.grad();
        for (size_t i = 0; i < g.size(); ++i) bg[i] -= g[i];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "mul");
  Tensor<T> y = Tensor<T>::zeros(a.shape());
  auto ad = a.data();
  auto bd = b.data();
  auto yd = y.data();
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = ad[i] * bd[i];
  bool ra = a.requires_grad(), rb = b.requires_grad();
  if (tape.recording() && (ra || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> ac = a, bc = b;
    tape.record([ac, bc, y, ra, rb]() mutable {
      auto g = y.grad();
      auto av = ac.data();
      auto bv = bc.data();
      if (ra) {
        ac.ensure_grad();
        auto ag = ac.grad();
        for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
      }
      if (rb) {
        bc.ensure_grad();
        auto bg = bc.grad();
        for (size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> affine(Tape<T>& tape, const Tensor<T>& x, T scale, T shift) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto yd = y.data();
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = scale * xd[i] + shift;
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, scale]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * scale;
    });
  }
  return y;
}

template <typename T>
Tensor<T> abs_op(Tape<T>& tape, const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto yd = y.data();
  for (size_t i = 0; i < yd.size(); ++i) yd[i] = std::abs(xd[i]);
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      auto xv = xc.data();
      // subgradient 0 at exactly 0
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (xv[i] > T(0) ? T(1) : (xv[i] < T(0) ? T(-1) : T(0)));
    });
  }
  return y;
}

#define ASMA_INSTANTIATE_ELEMENTWISE(T)                                                       \
  template Tensor<T> leaky_relu<T>(Tape<T>&, const Tensor<T>&, T);                           \
  template Tensor<T> tanh_op<T>(Tape<T>&, const Tensor<T>&);                                 \
  template Tensor<T> sigmoid<T>(Tape<T>&, const Tensor<T>&);                                 \
  template Tensor<T> add<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> sub<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> mul<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> affine<T>(Tape<T>&, const Tensor<T>&, T, T);                            \
  template Tensor<T> abs_op<T>(Tape<T>&, const Tensor<T>&);

ASMA_INSTANTIATE_ELEMENTWISE(float)
ASMA_INSTANTIATE_ELEMENTWISE(double)

}  // namespace asma

#include <algorithm>
#include <memory>
#include <vector>

#include "asma/ops.hpp"

namespace asma {

template <typename T>
Tensor<T> upsample_nearest(Tape<T>& tape, const Tensor<T>& x, int factor) {
  if (x.shape().rank() != 4) throw ShapeError("upsample_nearest: input must be rank 4");
  if (factor < 1) throw ConfigError("upsample_nearest: factor must be >= 1");
  const int64_t n = x.shape().n(), c = x.shape().c(), h = x.shape().h(), w = x.shape().w();
  const int64_t f = factor, ho = h * f, wo = w * f;
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, c, ho, wo));
  auto xd = x.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* src = xd.data() + i * h * w;
    T* dst = yd.data() + i * ho * wo;
    for (int64_t oy = 0; oy < ho; ++oy)
      for (int64_t ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = src[(oy / f) * w + ox / f];
  }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, n, c, h, w, f, ho, wo]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (int64_t i = 0; i < n * c; ++i) {
        const T* src = g.data() + i * ho * wo;
        T* dst = xg.data() + i * h * w;
        for (int64_t oy = 0; oy < ho; ++oy)
          for (int64_t ox = 0; ox < wo; ++ox) dst[(oy / f) * w + ox / f] += src[oy * wo + ox];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> avg_pool(Tape<T>& tape, const Tensor<T>& x, int kernel, int stride) {
  if (x.shape().rank() != 4) throw ShapeError("avg_pool: input must be rank 4");
  if (kernel < 1 || stride < 1) throw ConfigError("avg_pool: kernel and stride must be >= 1");
  const int64_t n = x.shape().n(), c = x.shape().c(), h = x.shape().h(), w = x.shape().w();
  if (kernel > h || kernel > w) throw ShapeError("avg_pool: kernel exceeds spatial dims " + x.shape().str());
  const int64_t ho = (h - kernel) / stride + 1, wo = (w - kernel) / stride + 1;
  const T inv = T(1) / static_cast<T>(kernel * kernel);
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, c, ho, wo));
  auto xd = x.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* src = xd.data() + i * h * w;
    T* dst = yd.data() + i * ho * wo;
    for (int64_t oy = 0; oy < ho; ++oy)
      for (int64_t ox = 0; ox < wo; ++ox) {
        T s = T(0);
        for (int ky = 0; ky < kernel; ++ky)
          for (int kx = 0; kx < kernel; ++kx) s += src[(oy * stride + ky) * w + ox * stride + kx];
        dst[oy * wo + ox] = s * inv;
      }
  }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, n, c, h, w, ho, wo, kernel, stride, inv]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (int64_t i = 0; i < n * c; ++i) {
        const T* src = g.data() + i * ho * wo;
        T* dst = xg.data() + i * h * w;
        for (int64_t oy = 0; oy < ho; ++oy)
          for (int64_t ox = 0; ox < wo; ++ox) {
            const T gv = src[oy * wo + ox] * inv;
            for (int ky = 0; ky < kernel; ++ky)
              for (int kx = 0; kx < kernel; ++kx) dst[(oy * stride + ky) * w + ox * stride + kx] += gv;
          }
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> global_avg_pool(Tape<T>& tape, const Tensor<T>& x) {
  if (x.shape().rank() != 4) throw ShapeError("global_avg_pool: input must be rank 4");
  const int64_t n = x.shape().n(), c = x.shape().c(), m = x.shape().h() * x.shape().w();
  const T inv = T(1) / static_cast<T>(m);
  Tensor<T> y = Tensor<T>::zeros(Shape{n, c});
  auto xd = x.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n * c; ++i) {
    T s = T(0);
    const T* src = xd.data() + i * m;
    for (int64_t j = 0; j < m; ++j) s += src[j];
    yd[static_cast<size_t>(i)] = s * inv;
  }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, n, c, m, inv]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (int64_t i = 0; i < n * c; ++i) {
        const T gv = g[static_cast<size_t>(i)] * inv;
        T* dst = xg.data() + i * m;
        for (int64_t j = 0; j < m; ++j) dst[j] += gv;
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> sum_all(Tape<T>& tape, const Tensor<T>& x) {
  T s = T(0);
  for (T v : x.data()) s += v;
  Tensor<T> y = Tensor<T>::scalar(s);
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y]() mutable {
      xc.ensure_grad();
      const T g = y.grad()[0];
      for (T& v : xc.grad()) v += g;
    });
  }
  return y;
}

template <typename T>
Tensor<T> mean_all(Tape<T>& tape, const Tensor<T>& x) {
  const T inv = T(1) / static_cast<T>(x.numel());
  T s = T(0);
  for (T v : x.data()) s += v;
  Tensor<T> y = Tensor<T>::scalar(s * inv);
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, inv]() mutable {
      xc.ensure_grad();
      const T g = y.grad()[0] * inv;
      for (T& v : xc.grad()) v += g;
    });
  }
  return y;
}

template <typename T>
Tensor<T> channel_mean(Tape<T>& tape, const Tensor<T>& x) {
  if (x.shape().rank() != 4) throw ShapeError("channel_mean: input must be rank 4");
  const int64_t n = x.shape().n(), c = x.shape().c(), m = x.shape().h() * x.shape().w();
  const T inv = T(1) / static_cast<T>(c);
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, 1, x.shape().h(), x.shape().w()));
  auto xd = x.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) {
      T s = T(0);
      for (int64_t ch = 0; ch < c; ++ch) s += xd[(i * c + ch) * m + j];
      yd[i * m + j] = s * inv;
    }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, n, c, m, inv]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < m; ++j) {
          const T gv = g[i * m + j] * inv;
          for (int64_t ch = 0; ch < c; ++ch) xg[(i * c + ch) * m + j] += gv;
        }
    });
  }
  return y;
}

template <typename T>
Tensor<T> channel_max(Tape<T>& tape, const Tensor<T>& x) {
  if (x.shape().rank() != 4) throw ShapeError("channel_max: input must be rank 4");
  const int64_t n = x.shape().n(), c = x.shape().c(), m = x.shape().h() * x.shape().w();
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, 1, x.shape().h(), x.shape().w()));
  auto argmax = std::make_shared<std::vector<int32_t>>(static_cast<size_t>(n * m));
  auto xd = x.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) {
      T best = xd[i * c * m + j];
      int32_t arg = 0;
      for (int64_t ch = 1; ch < c; ++ch) {
        T v = xd[(i * c + ch) * m + j];
        if (v > best) {
          best = v;
          arg = static_cast<int32_t>(ch);
        }
      }
      yd[i * m + j] = best;
      (*argmax)[static_cast<size_t>(i * m + j)] = arg;  // ties -> lowest channel
    }
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y, argmax, n, c, m]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < m; ++j)
          xg[(i * c + (*argmax)[static_cast<size_t>(i * m + j)]) * m + j] += g[i * m + j];
    });
  }
  return y;
}

template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape().rank() != 4 || b.shape().rank() != 4) throw ShapeError("concat_channels: inputs must be rank 4");
  if (a.shape().n() != b.shape().n() || a.shape().h() != b.shape().h() || a.shape().w() != b.shape().w())
    throw ShapeError("concat_channels: N/H/W mismatch " + a.shape().str() + " vs " + b.shape().str());
  const int64_t n = a.shape().n(), ca = a.shape().c(), cb = b.shape().c(), m = a.shape().h() * a.shape().w();
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, ca + cb, a.shape().h(), a.shape().w()));
  auto ad = a.data();
  auto bd = b.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i) {
    std::copy(ad.begin() + i * ca * m, ad.begin() + (i + 1) * ca * m, yd.begin() + i * (ca + cb) * m);
    std::copy(bd.begin() + i * cb * m, bd.begin() + (i + 1) * cb * m, yd.begin() + (i * (ca + cb) + ca) * m);
  }
  bool ra = a.requires_grad(), rb = b.requires_grad();
  if (tape.recording() && (ra || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> ac = a, bc = b;
    tape.record([ac, bc, y, n, ca, cb, m]() mutable {
      auto g = y.grad();
      if (ac.requires_grad()) {
        ac.ensure_grad();
        auto ag = ac.grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < ca * m; ++j) ag[i * ca * m + j] += g[i * (ca + cb) * m + j];
      }
      if (bc.requires_grad()) {
        bc.ensure_grad();
        auto bg = bc.grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < cb * m; ++j) bg[i * cb * m + j] += g[(i * (ca + cb) + ca) * m + j];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& x, const Shape& s) {
  if (s.numel() != x.numel())
    throw ShapeError("reshape: element count mismatch " + x.shape().str() + " -> " + s.str());
  auto xd = x.data();
  Tensor<T> y = Tensor<T>::from_data(s, std::vector<T>(xd.begin(), xd.end()));
  if (tape.recording() && x.requires_grad()) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x;
    tape.record([xc, y]() mutable {
      xc.ensure_grad();
      auto g = y.grad();
      auto xg = xc.grad();
      for (size_t i = 0; i < g.size(); ++i) xg[i] += g[i];
    });
  }
  return y;
}

template <typename T>
Tensor<T> scale_by_mask(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& mask) {
  if (x.shape().rank() != 4 || mask.shape().rank() != 4) throw ShapeError("scale_by_mask: inputs must be rank 4");
  if (mask.shape().c() != 1 || mask.shape().n() != x.shape().n() || mask.shape().h() != x.shape().h() ||
      mask.shape().w() != x.shape().w())
    throw ShapeError("scale_by_mask: mask must be (N,1,H,W) matching " + x.shape().str());
  const int64_t n = x.shape().n(), c = x.shape().c(), m = x.shape().h() * x.shape().w();
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  auto xd = x.data();
  auto md = mask.data();
  auto yd = y.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t j = 0; j < m; ++j) yd[(i * c + ch) * m + j] = xd[(i * c + ch) * m + j] * md[i * m + j];
  bool rx = x.requires_grad(), rm = mask.requires_grad();
  if (tape.recording() && (rx || rm)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x, mc = mask;
    tape.record([xc, mc, y, n, c, m]() mutable {
      auto g = y.grad();
      auto xv = xc.data();
      auto mv = mc.data();
      if (xc.requires_grad()) {
        xc.ensure_grad();
        auto xg = xc.grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t j = 0; j < m; ++j) xg[(i * c + ch) * m + j] += g[(i * c + ch) * m + j] * mv[i * m + j];
      }
      if (mc.requires_grad()) {
        mc.ensure_grad();
        auto mg = mc.grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t j = 0; j < m; ++j) mg[i * m + j] += g[(i * c + ch) * m + j] * xv[(i * c + ch) * m + j];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> broadcast_label(const StyleLabel& label, int h, int w) {
  if (h < 1 || w < 1) throw ConfigError("broadcast_label: non-positive spatial dims");
  Tensor<T> y = Tensor<T>::zeros(Shape{label.num_classes(), h, w});
  auto yd = y.data();
  const int64_t m = static_cast<int64_t>(h) * w;
  std::fill(yd.begin() + label.class_index() * m, yd.begin() + (label.class_index() + 1) * m, T(1));
  return y;
}

template <typename T>
Tensor<T> broadcast_label_nchw(const StyleLabel& label, int n, int h, int w) {
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, label.num_classes(), h, w));
  auto yd = y.data();
  const int64_t m = static_cast<int64_t>(h) * w;
  const int64_t k = label.num_classes();
  for (int64_t i = 0; i < n; ++i) {
    auto base = yd.begin() + (i * k + label.class_index()) * m;
    std::fill(base, base + m, T(1));
  }
  return y;
}

#define ASMA_INSTANTIATE_SPATIAL(T)                                                   \
  template Tensor<T> upsample_nearest<T>(Tape<T>&, const Tensor<T>&, int);           \
  template Tensor<T> avg_pool<T>(Tape<T>&, const Tensor<T>&, int, int);              \
  template Tensor<T> global_avg_pool<T>(Tape<T>&, const Tensor<T>&);                 \
  template Tensor<T> sum_all<T>(Tape<T>&, const Tensor<T>&);                         \
  template Tensor<T> mean_all<T>(Tape<T>&, const Tensor<T>&);                        \
  template Tensor<T> channel_mean<T>(Tape<T>&, const Tensor<T>&);                    \
  template Tensor<T> channel_max<T>(Tape<T>&, const Tensor<T>&);                     \
  template Tensor<T> concat_channels<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> reshape<T>(Tape<T>&, const Tensor<T>&, const Shape&);            \
  template Tensor<T> scale_by_mask<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> broadcast_label<T>(const StyleLabel&, int, int);                \
  template Tensor<T> broadcast_label_nchw<T>(const StyleLabel&, int, int, int);

ASMA_INSTANTIATE_SPATIAL(float)
ASMA_INSTANTIATE_SPATIAL(double)

}  // namespace asma

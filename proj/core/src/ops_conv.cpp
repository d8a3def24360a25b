#include <vector>

#include "asma/ops.hpp"
#include "gemm.hpp"

namespace asma {

namespace {

// Reflection index without edge repeat (mirror across the border pixel);
// valid for |i| < n, which the p < dim precondition guarantees.
inline int64_t reflect_index(int64_t i, int64_t n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

// (N,C,H,W) -> padded (N,C,H+2p,W+2p) buffer.
template <typename T>
std::vector<T> pad_spatial(const Tensor<T>& x, int p, PadMode mode) {
  const Shape& s = x.shape();
  const int64_t n = s.n(), c = s.c(), h = s.h(), w = s.w();
  const int64_t hp = h + 2 * p, wp = w + 2 * p;
  std::vector<T> out(static_cast<size_t>(n * c * hp * wp), T(0));
  auto xd = x.data();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* src = xd.data() + i * h * w;
    T* dst = out.data() + i * hp * wp;
    for (int64_t y = 0; y < hp; ++y) {
      for (int64_t z = 0; z < wp; ++z) {
        int64_t sy = y - p, sz = z - p;
        if (mode == PadMode::kReflect) {
          dst[y * wp + z] = src[reflect_index(sy, h) * w + reflect_index(sz, w)];
        } else if (sy >= 0 && sy < h && sz >= 0 && sz < w) {
          dst[y * wp + z] = src[sy * w + sz];
        }
      }
    }
  }
  return out;
}

// Adjoint of pad_spatial: fold a padded-gradient buffer back onto x.grad.
template <typename T>
void unpad_accumulate(const std::vector<T>& gpad, Tensor<T>& x, int p, PadMode mode) {
  const Shape& s = x.shape();
  const int64_t n = s.n(), c = s.c(), h = s.h(), w = s.w();
  const int64_t hp = h + 2 * p, wp = w + 2 * p;
  auto xg = x.grad();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* src = gpad.data() + i * hp * wp;
    T* dst = xg.data() + i * h * w;
    for (int64_t y = 0; y < hp; ++y) {
      for (int64_t z = 0; z < wp; ++z) {
        int64_t sy = y - p, sz = z - p;
        if (mode == PadMode::kReflect) {
          dst[reflect_index(sy, h) * w + reflect_index(sz, w)] += src[y * wp + z];
        } else if (sy >= 0 && sy < h && sz >= 0 && sz < w) {
          dst[sy * w + sz] += src[y * wp + z];
        }
      }
    }
  }
}

// Patch gather over one (C,Hp,Wp) image: col is (C*k*k, Ho*Wo) row-major.
template <typename T>
void im2col_one(const T* img, T* col, int64_t c, int64_t hp, int64_t wp, int k, int stride, int64_t ho, int64_t wo) {
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* row = col + ((ch * k + kh) * k + kw) * ho * wo;
        const T* base = img + ch * hp * wp + kh * wp + kw;
        for (int64_t oy = 0; oy < ho; ++oy) {
          const T* line = base + oy * stride * wp;
          for (int64_t ox = 0; ox < wo; ++ox) row[oy * wo + ox] = line[ox * stride];
        }
      }
    }
  }
}

// Scatter-add adjoint of im2col_one.
template <typename T>
void col2im_one(const T* col, T* img, int64_t c, int64_t hp, int64_t wp, int k, int stride, int64_t ho, int64_t wo) {
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* row = col + ((ch * k + kh) * k + kw) * ho * wo;
        T* base = img + ch * hp * wp + kh * wp + kw;
        for (int64_t oy = 0; oy < ho; ++oy) {
          T* line = base + oy * stride * wp;
          for (int64_t ox = 0; ox < wo; ++ox) line[ox * stride] += row[oy * wo + ox];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding,
                 PadMode mode) {
  if (x.shape().rank() != 4 || w.shape().rank() != 4) throw ShapeError("conv2d: input and weight must be rank 4");
  const int64_t n = x.shape().n(), ci = x.shape().c(), h = x.shape().h(), wi = x.shape().w();
  const int64_t co = w.shape()[0], wci = w.shape()[1], k = w.shape()[2];
  if (w.shape()[2] != w.shape()[3]) throw ShapeError("conv2d: kernel must be square, got " + w.shape().str());
  if (wci != ci)
    throw ShapeError("conv2d: weight expects " + std::to_string(wci) + " input channels, input has " + std::to_string(ci));
  if (b.defined() && (b.shape().rank() != 1 || b.shape()[0] != co))
    throw ShapeError("conv2d: bias must be rank-1 of length " + std::to_string(co));
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d: negative padding");
  if (h + 2 * padding < k || wi + 2 * padding < k)
    throw ShapeError("conv2d: padded input smaller than kernel");
  if (mode == PadMode::kReflect && (padding >= h || padding >= wi))
    throw ConfigError("conv2d: reflect padding " + std::to_string(padding) + " too large for input " + x.shape().str());

  const int64_t hp = h + 2 * padding, wp = wi + 2 * padding;
  const int64_t ho = (hp - k) / stride + 1, wo = (wp - k) / stride + 1;
  const int64_t ckk = ci * k * k, hw = ho * wo;

  auto padded = pad_spatial(x, padding, mode);
  auto cols = std::make_shared<std::vector<T>>(static_cast<size_t>(n * ckk * hw));
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, co, ho, wo));
  auto yd = y.data();
  auto wd = w.data();
  for (int64_t i = 0; i < n; ++i) {
    T* col = cols->data() + i * ckk * hw;
    im2col_one(padded.data() + i * ci * hp * wp, col, ci, hp, wp, static_cast<int>(k), stride, ho, wo);
    detail::gemm(wd.data(), col, yd.data() + i * co * hw, co, ckk, hw);
  }
  if (b.defined()) {
    auto bd = b.data();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t oc = 0; oc < co; ++oc) {
        T* out = yd.data() + (i * co + oc) * hw;
        for (int64_t j = 0; j < hw; ++j) out[j] += bd[static_cast<size_t>(oc)];
      }
  }

  bool rx = x.requires_grad(), rw = w.requires_grad(), rb = b.defined() && b.requires_grad();
  if (tape.recording() && (rx || rw || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x, wc = w, bc = b;
    tape.record([xc, wc, bc, y, cols, n, ci, co, k, hw, ckk, hp, wp, ho, wo, stride, padding, mode]() mutable {
      auto gy = y.grad();
      bool rx = xc.requires_grad(), rw = wc.requires_grad(), rb = bc.defined() && bc.requires_grad();
      if (rw) wc.ensure_grad();
      if (rb) bc.ensure_grad();
      std::vector<T> gpad;
      if (rx) {
        xc.ensure_grad();
        gpad.assign(static_cast<size_t>(n * ci * hp * wp), T(0));
      }
      std::vector<T> gcol(rx ? static_cast<size_t>(ckk * hw) : 0);
      for (int64_t i = 0; i < n; ++i) {
        const T* gyn = gy.data() + i * co * hw;
        const T* col = cols->data() + i * ckk * hw;
        if (rw) detail::gemm_bt(gyn, col, wc.grad().data(), co, hw, ckk, /*accumulate=*/true);
        if (rb) {
          auto bg = bc.grad();
          for (int64_t oc = 0; oc < co; ++oc) {
            T s = T(0);
            const T* row = gyn + oc * hw;
            for (int64_t j = 0; j < hw; ++j) s += row[j];
            bg[static_cast<size_t>(oc)] += s;
          }
        }
        if (rx) {
          detail::gemm_at(wc.data().data(), gyn, gcol.data(), ckk, co, hw);
          col2im_one(gcol.data(), gpad.data() + i * ci * hp * wp, ci, hp, wp, static_cast<int>(k), stride, ho, wo);
        }
      }
      if (rx) unpad_accumulate(gpad, xc, padding, mode);
    });
  }
  return y;
}

template <typename T>
Tensor<T> conv2d_transposed(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                            int padding) {
  if (x.shape().rank() != 4 || w.shape().rank() != 4)
    throw ShapeError("conv2d_transposed: input and weight must be rank 4");
  const int64_t n = x.shape().n(), ci = x.shape().c(), h = x.shape().h(), wi = x.shape().w();
  const int64_t wci = w.shape()[0], co = w.shape()[1], k = w.shape()[2];
  if (w.shape()[2] != w.shape()[3]) throw ShapeError("conv2d_transposed: kernel must be square");
  if (wci != ci)
    throw ShapeError("conv2d_transposed: weight expects " + std::to_string(wci) + " input channels, input has " +
                     std::to_string(ci));
  if (b.defined() && (b.shape().rank() != 1 || b.shape()[0] != co))
    throw ShapeError("conv2d_transposed: bias must be rank-1 of length " + std::to_string(co));
  if (stride < 1) throw ConfigError("conv2d_transposed: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d_transposed: negative padding");
  const int64_t ho = (h - 1) * stride - 2 * padding + k;
  const int64_t wo = (wi - 1) * stride - 2 * padding + k;
  if (ho < 1 || wo < 1) throw ShapeError("conv2d_transposed: non-positive output dims");

  const int64_t ckk = co * k * k, hw = h * wi;
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, co, ho, wo));
  auto yd = y.data();
  auto xd = x.data();
  auto wd = w.data();
  std::vector<T> col(static_cast<size_t>(ckk * hw));
  for (int64_t i = 0; i < n; ++i) {
    // col = W^T (Co*k*k, Ci) x X_n (Ci, HW), with W viewed as (Ci, Co*k*k)
    detail::gemm_at(wd.data(), xd.data() + i * ci * hw, col.data(), ckk, ci, hw);
    T* out = yd.data() + i * co * ho * wo;
    for (int64_t oc = 0; oc < co; ++oc) {
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          const T* row = col.data() + ((oc * k + kh) * k + kw) * hw;
          for (int64_t iy = 0; iy < h; ++iy) {
            int64_t oy = iy * stride + kh - padding;
            if (oy < 0 || oy >= ho) continue;
            for (int64_t ix = 0; ix < wi; ++ix) {
              int64_t ox = ix * stride + kw - padding;
              if (ox < 0 || ox >= wo) continue;
              out[(oc * ho + oy) * wo + ox] += row[iy * wi + ix];
            }
          }
        }
      }
    }
  }
  if (b.defined()) {
    auto bd = b.data();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t oc = 0; oc < co; ++oc) {
        T* out = yd.data() + (i * co + oc) * ho * wo;
        for (int64_t j = 0; j < ho * wo; ++j) out[j] += bd[static_cast<size_t>(oc)];
      }
  }

  bool rx = x.requires_grad(), rw = w.requires_grad(), rb = b.defined() && b.requires_grad();
  if (tape.recording() && (rx || rw || rb)) {
    y.set_requires_grad(true);
    y.ensure_grad();
    Tensor<T> xc = x, wc = w, bc = b;
    tape.record([xc, wc, bc, y, n, ci, co, k, h, wi, ho, wo, hw, ckk, stride, padding]() mutable {
      auto gy = y.grad();
      bool rx = xc.requires_grad(), rw = wc.requires_grad(), rb = bc.defined() && bc.requires_grad();
      if (rx) xc.ensure_grad();
      if (rw) wc.ensure_grad();
      if (rb) bc.ensure_grad();
      std::vector<T> colg(static_cast<size_t>(ckk * hw));
      for (int64_t i = 0; i < n; ++i) {
        const T* gyn = gy.data() + i * co * ho * wo;
        if (rx || rw) {
          // gather d(out) at each scatter target back into column layout
          std::fill(colg.begin(), colg.end(), T(0));
          for (int64_t oc = 0; oc < co; ++oc) {
            for (int kh = 0; kh < k; ++kh) {
              for (int kw = 0; kw < k; ++kw) {
                T* row = colg.data() + ((oc * k + kh) * k + kw) * hw;
                for (int64_t iy = 0; iy < h; ++iy) {
                  int64_t oy = iy * stride + kh - padding;
                  if (oy < 0 || oy >= ho) continue;
                  for (int64_t ix = 0; ix < wi; ++ix) {
                    int64_t ox = ix * stride + kw - padding;
                    if (ox < 0 || ox >= wo) continue;
                    row[iy * wi + ix] = gyn[(oc * ho + oy) * wo + ox];
                  }
                }
              }
            }
          }
          if (rx) detail::gemm(wc.data().data(), colg.data(), xc.grad().data() + i * ci * hw, ci, ckk, hw, /*accumulate=*/true);
          if (rw) detail::gemm_bt(xc.data().data() + i * ci * hw, colg.data(), wc.grad().data(), ci, hw, ckk, /*accumulate=*/true);
        }
        if (rb) {
          auto bg = bc.grad();
          for (int64_t oc = 0; oc < co; ++oc) {
            T s = T(0);
            const T* row = gyn + oc * ho * wo;
            for (int64_t j = 0; j < ho * wo; ++j) s += row[j];
            bg[static_cast<size_t>(oc)] += s;
          }
        }
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> conv2d_transposed(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, int stride, int padding) {
  return conv2d_transposed(tape, x, w, Tensor<T>(), stride, padding);
}

#define ASMA_INSTANTIATE_CONV(T)                                                                                      \
  template Tensor<T> conv2d<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int, PadMode);   \
  template Tensor<T> conv2d_transposed<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
  template Tensor<T> conv2d_transposed<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, int, int);

ASMA_INSTANTIATE_CONV(float)
ASMA_INSTANTIATE_CONV(double)

}  // namespace asma

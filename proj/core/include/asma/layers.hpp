#pragma once

#include <string>

#include "asma/ops.hpp"
#include "asma/params.hpp"

namespace asma {

// Normalization epsilon used across the project.
inline constexpr double kNormEps = 1e-5;

template <typename T>
struct ConvLayer {
  Tensor<T> w, b;
  int stride = 1;
  int pad = 0;
  PadMode mode = PadMode::kZero;

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x) const { return conv2d(tape, x, w, b, stride, pad, mode); }
};

template <typename T>
ConvLayer<T> make_conv(ParamStore<T>& store, Rng& rng, const std::string& name, int in_ch, int out_ch, int k,
                       int stride, int pad, PadMode mode, double leaky_slope, bool zero_init = false) {
  ConvLayer<T> l;
  l.w = store.create(name + ".w", Shape{out_ch, in_ch, k, k});
  l.b = store.create(name + ".b", Shape{out_ch});
  if (!zero_init) fill_he_normal(l.w, rng, static_cast<int64_t>(in_ch) * k * k, leaky_slope);
  l.stride = stride;
  l.pad = pad;
  l.mode = mode;
  return l;
}

template <typename T>
struct ConvTransposedLayer {
  Tensor<T> w, b;
  int stride = 1;
  int pad = 0;

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x) const {
    return conv2d_transposed(tape, x, w, b, stride, pad);
  }
};

template <typename T>
ConvTransposedLayer<T> make_conv_transposed(ParamStore<T>& store, Rng& rng, const std::string& name, int in_ch,
                                            int out_ch, int k, int stride, int pad, double leaky_slope) {
  ConvTransposedLayer<T> l;
  l.w = store.create(name + ".w", Shape{in_ch, out_ch, k, k});
  l.b = store.create(name + ".b", Shape{out_ch});
  fill_he_normal(l.w, rng, static_cast<int64_t>(in_ch) * k * k, leaky_slope);
  l.stride = stride;
  l.pad = pad;
  return l;
}

template <typename T>
struct InstanceNormLayer {
  Tensor<T> gamma, beta;

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x) const {
    return instance_norm(tape, x, gamma, beta, static_cast<T>(kNormEps));
  }
};

template <typename T>
InstanceNormLayer<T> make_instance_norm(ParamStore<T>& store, const std::string& name, int channels) {
  InstanceNormLayer<T> l;
  l.gamma = store.create(name + ".gamma", Shape{channels});
  l.beta = store.create(name + ".beta", Shape{channels});
  fill_constant(l.gamma, T(1));
  return l;
}

template <typename T>
struct CondInstanceNormLayer {
  Tensor<T> gammas, betas;  // (K, C)

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x, const StyleLabel& label) const {
    return cond_instance_norm(tape, x, gammas, betas, label, static_cast<T>(kNormEps));
  }
};

template <typename T>
CondInstanceNormLayer<T> make_cond_instance_norm(ParamStore<T>& store, const std::string& name, int num_styles,
                                                 int channels) {
  CondInstanceNormLayer<T> l;
  l.gammas = store.create(name + ".gammas", Shape{num_styles, channels});
  l.betas = store.create(name + ".betas", Shape{num_styles, channels});
  fill_constant(l.gammas, T(1));
  return l;
}

// Spectrally normalized conv block: weight is divided by its estimated
// largest singular value before use; u persists across steps as state.
template <typename T>
struct SpectralConvLayer {
  Tensor<T> w, b, u;
  int stride = 1;
  int pad = 0;

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x, bool update_u) const {
    Tensor<T> wn = spectral_normalize(tape, w, const_cast<Tensor<T>&>(u), update_u);
    return conv2d(tape, x, wn, b, stride, pad, PadMode::kZero);
  }
};

template <typename T>
SpectralConvLayer<T> make_spectral_conv(ParamStore<T>& store, Rng& rng, const std::string& name, int in_ch, int out_ch,
                                        int k, int stride, int pad, double leaky_slope) {
  SpectralConvLayer<T> l;
  l.w = store.create(name + ".w", Shape{out_ch, in_ch, k, k});
  l.b = store.create(name + ".b", Shape{out_ch});
  l.u = store.create_state(name + ".u", Shape{out_ch});
  fill_he_normal(l.w, rng, static_cast<int64_t>(in_ch) * k * k, leaky_slope);
  fill_unit_normalized(l.u, rng);
  l.stride = stride;
  l.pad = pad;
  return l;
}

template <typename T>
struct SpectralLinearLayer {
  Tensor<T> w, b, u;  // w (M, C)

  Tensor<T> operator()(Tape<T>& tape, const Tensor<T>& x, bool update_u) const {
    Tensor<T> wn = spectral_normalize(tape, w, const_cast<Tensor<T>&>(u), update_u);
    return linear(tape, x, wn, b);
  }
};

template <typename T>
SpectralLinearLayer<T> make_spectral_linear(ParamStore<T>& store, Rng& rng, const std::string& name, int in_dim,
                                            int out_dim) {
  SpectralLinearLayer<T> l;
  l.w = store.create(name + ".w", Shape{out_dim, in_dim});
  l.b = store.create(name + ".b", Shape{out_dim});
  l.u = store.create_state(name + ".u", Shape{out_dim});
  fill_he_normal(l.w, rng, in_dim, 0.0);
  fill_unit_normalized(l.u, rng);
  return l;
}

}  // namespace asma

#pragma once

#include <vector>

#include "asma/style_label.hpp"
#include "asma/tape.hpp"
#include "asma/tensor.hpp"

namespace asma {

enum class PadMode { kZero, kReflect };

// ---------------------------------------------------------------------------
// Convolution family. Weights are OIkk (conv) / IOkk (transposed conv),
// square kernels, NCHW activations. Forward goes through explicit patch
// gathering (im2col) and a GEMM; backward reuses the gathered patches.
// ---------------------------------------------------------------------------

// out spatial = floor((H + 2p - k) / stride) + 1. Reflect padding requires
// p < spatial dim.
template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding,
                 PadMode mode);

// out spatial = (H - 1) * stride - 2p + k. Adjoint of conv2d: for matching
// configuration, <conv(x), y> == <x, conv2d_transposed(y)> with the same
// weight buffer.
template <typename T>
Tensor<T> conv2d_transposed(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, int stride, int padding);

template <typename T>
Tensor<T> conv2d_transposed(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                            int padding);

// ---------------------------------------------------------------------------
// Normalization. Variance is biased (1/HW). H*W == 1 is rejected.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> instance_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

// Instance norm with the affine row selected by the style label; only the
// selected row of gammas/betas receives gradients.
template <typename T>
Tensor<T> cond_instance_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gammas, const Tensor<T>& betas,
                             const StyleLabel& label, T eps);

// ---------------------------------------------------------------------------
// Elementwise. leaky_relu's subgradient at exactly 0 is the negative-side
// slope.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope);

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
  return leaky_relu(tape, x, T(0));
}

template <typename T>
Tensor<T> tanh_op(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

// scale * x + shift
template <typename T>
Tensor<T> affine(Tape<T>& tape, const Tensor<T>& x, T scale, T shift);

template <typename T>
Tensor<T> abs_op(Tape<T>& tape, const Tensor<T>& x);

// ---------------------------------------------------------------------------
// Spatial resampling and reductions.
// ---------------------------------------------------------------------------

// Each pixel replicated factor x factor; backward sums the block.
template <typename T>
Tensor<T> upsample_nearest(Tape<T>& tape, const Tensor<T>& x, int factor);

template <typename T>
Tensor<T> avg_pool(Tape<T>& tape, const Tensor<T>& x, int kernel, int stride);

// (N,C,H,W) -> (N,C) mean over the spatial extent.
template <typename T>
Tensor<T> global_avg_pool(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> sum_all(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> mean_all(Tape<T>& tape, const Tensor<T>& x);

// Per-pixel statistics over channels: (N,C,H,W) -> (N,1,H,W).
template <typename T>
Tensor<T> channel_mean(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> channel_max(Tape<T>& tape, const Tensor<T>& x);

// ---------------------------------------------------------------------------
// Structure ops.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

// Same element count, new shape; gradient passes through unchanged.
template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& x, const Shape& s);

// x (N,C,H,W) * mask (N,1,H,W), mask broadcast over channels.
template <typename T>
Tensor<T> scale_by_mask(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& mask);

// Constant one-hot spatial maps: channel label.class_index is all ones,
// the rest all zeros. Not differentiable (labels are constants).
template <typename T>
Tensor<T> broadcast_label(const StyleLabel& label, int h, int w);

template <typename T>
Tensor<T> broadcast_label_nchw(const StyleLabel& label, int n, int h, int w);

// ---------------------------------------------------------------------------
// Dense heads.
// ---------------------------------------------------------------------------

// x (N,C) * w^T (C,M) + b (M) -> (N,M)
template <typename T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// feat (N,C), V (K,C), label (K) -> (N): out_n = label^T V feat_n.
// Affine in the label vector; label receives no gradient.
template <typename T>
Tensor<T> label_projection(Tape<T>& tape, const Tensor<T>& feat, const Tensor<T>& V, const Tensor<T>& label);

// logits (N,K), integer targets -> scalar mean cross-entropy.
template <typename T>
Tensor<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits, const std::vector<int>& targets);

// ---------------------------------------------------------------------------
// Spectral normalization. w is matrixized as (w.shape[0], numel/rows).
// update_u runs one power-iteration step and writes the new u in place;
// with update_u=false the op is pure given (w, u_state). sigma estimates
// the largest singular value; a zero matrix clamps sigma to a tiny epsilon.
// Gradient flows through w / sigma(w) with u, v treated as constants.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> spectral_normalize(Tape<T>& tape, const Tensor<T>& w, Tensor<T>& u_state, bool update_u);

// Current sigma estimate without normalizing (diagnostics/tests).
template <typename T>
T spectral_sigma(const Tensor<T>& w, const Tensor<T>& u_state);

}  // namespace asma

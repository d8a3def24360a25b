#pragma once

#include "asma/discriminator.hpp"
#include "asma/generator.hpp"

namespace asma {

template <typename T>
struct LossWeights {
  T lambda_C = T(90);
  T lambda_T = T(100);
};

// Style-aware content loss: mean |E(x_c) - E(x_o)| with E the generator's
// own encoder (bottleneck input h). No stop-gradient on either branch; the
// encoder is a moving target by design.
template <typename T>
Tensor<T> content_loss(Tape<T>& tape, const Generator<T>& g, const Tensor<T>& x_c, const Tensor<T>& x_o) {
  if (x_c.shape() != x_o.shape())
    throw ShapeError("content_loss: image shapes differ, " + x_c.shape().str() + " vs " + x_o.shape().str());
  Tensor<T> ec = g.encode(tape, x_c).h;
  Tensor<T> eo = g.encode(tape, x_o).h;
  return mean_all(tape, abs_op(tape, sub(tape, ec, eo)));
}

// Transform loss: mean absolute difference of pooled images (the 1/CHW
// factor over the pooled tensor makes the l1 norm a plain mean).
template <typename T>
Tensor<T> transform_loss(Tape<T>& tape, const Tensor<T>& x_c, const Tensor<T>& x_o, int pool_kernel, int pool_stride) {
  if (x_c.shape() != x_o.shape())
    throw ShapeError("transform_loss: image shapes differ, " + x_c.shape().str() + " vs " + x_o.shape().str());
  Tensor<T> pc = avg_pool(tape, x_c, pool_kernel, pool_stride);
  Tensor<T> po = avg_pool(tape, x_o, pool_kernel, pool_stride);
  return mean_all(tape, abs_op(tape, sub(tape, pc, po)));
}

// Hinge loss for the discriminator; photographs count as an extra fake
// class. Each term is a batch mean.
template <typename T>
Tensor<T> d_hinge_loss(Tape<T>& tape, const Tensor<T>& scores_real, const Tensor<T>& scores_photo,
                       const Tensor<T>& scores_fake) {
  Tensor<T> lr = mean_all(tape, relu(tape, affine(tape, scores_real, T(-1), T(1))));   // max(0, 1 - D(x_s,c))
  Tensor<T> lp = mean_all(tape, relu(tape, affine(tape, scores_photo, T(1), T(1))));   // max(0, 1 + D(x_c,c))
  Tensor<T> lf = mean_all(tape, relu(tape, affine(tape, scores_fake, T(1), T(1))));    // max(0, 1 + D(G(x_c,c),c))
  return add(tape, add(tape, lr, lp), lf);
}

// Generator adversarial term: -E[D(G(x_c,c), c)] with D frozen by the
// caller (its parameters' requires_grad cleared for this pass).
template <typename T>
Tensor<T> g_adv_loss(Tape<T>& tape, const Tensor<T>& scores_fake) {
  return affine(tape, mean_all(tape, scores_fake), T(-1), T(0));
}

// Generator-step objective: adv + lambda_C * L_C + lambda_T * L_T. The
// discriminator's hinge term is optimized in its own steps.
template <typename T>
Tensor<T> total_g_objective(Tape<T>& tape, const Tensor<T>& g_adv, const Tensor<T>& l_c, const Tensor<T>& l_t,
                            const LossWeights<T>& w, T adv_weight = T(1)) {
  Tensor<T> total = affine(tape, g_adv, adv_weight, T(0));
  total = add(tape, total, affine(tape, l_c, w.lambda_C, T(0)));
  return add(tape, total, affine(tape, l_t, w.lambda_T, T(0)));
}

}  // namespace asma

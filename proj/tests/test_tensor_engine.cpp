#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asma/gradcheck.hpp"
#include "asma/ops.hpp"
#include "asma/params.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace asma;
using namespace asma::testing;

using Td = Tensor<double>;
using Tf = Tensor<float>;

TEST_CASE("conv2d: all-ones 3x3 kernel sums the window") {
  Tape<double> t(false);
  Td x = Td::full(Shape::nchw(1, 1, 3, 3), 1.0);
  Td w = Td::full(Shape{1, 1, 3, 3}, 1.0);
  Td b = Td::zeros(Shape{1});
  Td y = conv2d(t, x, w, b, 1, 0, PadMode::kZero);
  CHECK(y.shape() == Shape::nchw(1, 1, 1, 1));
  CHECK(y.item() == doctest::Approx(9.0));
}

TEST_CASE("conv2d: identity kernel with reflect padding reproduces the input") {
  Rng rng(5);
  Tape<double> t(false);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 6, 7), rng);
  Td w = Td::zeros(Shape{3, 3, 3, 3});
  for (int c = 0; c < 3; ++c) w[((c * 3 + c) * 3 + 1) * 3 + 1] = 1.0;  // center tap, per channel
  Td y = conv2d(t, x, w, Td(), 1, 1, PadMode::kReflect);
  CHECK(max_abs_diff(x, y) < 1e-12);
}

TEST_CASE("conv2d: matches the naive loop oracle for random configs") {
  Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const int stride = 1 + static_cast<int>(rng.uniform_int(2));
    const int pad = static_cast<int>(rng.uniform_int(3));
    const PadMode mode = trial % 2 == 0 ? PadMode::kZero : PadMode::kReflect;
    Td x = random_tensor<double>(Shape::nchw(2, 3, 8, 9), rng);
    Td w = random_tensor<double>(Shape{4, 3, 3, 3}, rng);
    Td b = random_tensor<double>(Shape{4}, rng);
    Tape<double> t(false);
    Td got = conv2d(t, x, w, b, stride, pad, mode);
    Td want = naive_conv2d(x, w, b, stride, pad, mode);
    CHECK(got.shape() == want.shape());
    CHECK(max_abs_diff(got, want) < 1e-11);
  }
}

TEST_CASE("conv2d: contract violations are rejected") {
  Tape<double> t(false);
  Td x = Td::zeros(Shape::nchw(1, 2, 4, 4));
  Td w_badc = Td::zeros(Shape{1, 3, 3, 3});
  CHECK_THROWS_AS(conv2d(t, x, w_badc, Td(), 1, 1, PadMode::kZero), ShapeError);
  Td w = Td::zeros(Shape{1, 2, 3, 3});
  CHECK_THROWS_AS(conv2d(t, x, w, Td(), 1, 4, PadMode::kReflect), ConfigError);  // reflect pad >= dim
  Td tiny = Td::zeros(Shape::nchw(1, 2, 2, 2));
  CHECK_THROWS_AS(conv2d(t, tiny, w, Td(), 1, 0, PadMode::kZero), ShapeError);  // window larger than input
}

TEST_CASE("conv2d_transposed: ones mass is conserved") {
  Tape<double> t(false);
  Td x = Td::full(Shape::nchw(1, 1, 2, 2), 1.0);
  Td w = Td::full(Shape{1, 1, 2, 2}, 1.0);
  Td y = conv2d_transposed(t, x, w, 2, 0);
  CHECK(y.shape() == Shape::nchw(1, 1, 4, 4));
  double sum = 0;
  for (double v : y.data()) sum += v;
  CHECK(sum == doctest::Approx(16.0));
}

TEST_CASE("conv2d_transposed: matches the naive scatter oracle") {
  Rng rng(23);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 4, 5), rng);
  Td w = random_tensor<double>(Shape{3, 2, 3, 3}, rng);
  Td b = random_tensor<double>(Shape{2}, rng);
  Tape<double> t(false);
  Td got = conv2d_transposed(t, x, w, b, 2, 1);
  Td want = naive_conv2d_transposed(x, w, b, 2, 1);
  CHECK(got.shape() == want.shape());
  CHECK(max_abs_diff(got, want) < 1e-11);
}

TEST_CASE("conv2d_transposed: non-positive output dims rejected") {
  Tape<double> t(false);
  Td x = Td::zeros(Shape::nchw(1, 1, 2, 2));
  Td w = Td::zeros(Shape{1, 1, 2, 2});
  CHECK_THROWS_AS(conv2d_transposed(t, x, w, 1, 2), ShapeError);
}

TEST_CASE("conv/conv_transposed adjoint identity at 64-bit") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const int stride = 1 + static_cast<int>(rng.uniform_int(2));
    const int pad = static_cast<int>(rng.uniform_int(2));
    Td x = random_tensor<double>(Shape::nchw(1, 2, 7, 7), rng);
    Td w = random_tensor<double>(Shape{3, 2, 3, 3}, rng);
    Tape<double> t(false);
    Td cx = conv2d(t, x, w, Td(), stride, pad, PadMode::kZero);
    Td y = random_tensor<double>(cx.shape(), rng);
    Td cty = conv2d_transposed(t, y, w, stride, pad);
    REQUIRE(cty.shape() == x.shape());
    double lhs = 0, rhs = 0;
    auto cxd = cx.data();
    auto yd = y.data();
    for (size_t i = 0; i < cxd.size(); ++i) lhs += cxd[i] * yd[i];
    auto xd = x.data();
    auto ctyd = cty.data();
    for (size_t i = 0; i < xd.size(); ++i) rhs += xd[i] * ctyd[i];
    CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30}) < 1e-10);
  }
}

TEST_CASE("instance_norm: identity affine gives zero mean unit variance per slice") {
  Rng rng(41);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 5, 5), rng);
  Td gamma = Td::full(Shape{3}, 1.0);
  Td beta = Td::zeros(Shape{3});
  Tape<double> t(false);
  Td y = instance_norm(t, x, gamma, beta, 1e-5);
  const int64_t m = 25;
  for (int64_t s = 0; s < 6; ++s) {
    double mean = 0, var = 0;
    for (int64_t j = 0; j < m; ++j) mean += y.data()[s * m + j];
    mean /= m;
    for (int64_t j = 0; j < m; ++j) {
      double d = y.data()[s * m + j] - mean;
      var += d * d;
    }
    var /= m;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
}

TEST_CASE("instance_norm: constant slice flows through eps to beta") {
  Tape<double> t(false);
  Td x = Td::full(Shape::nchw(1, 2, 4, 4), 3.25);
  Td gamma = Td::full(Shape{2}, 1.0);
  Td beta = Td::full(Shape{2}, 0.5);
  Td y = instance_norm(t, x, gamma, beta, 1e-5);
  for (double v : y.data()) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("instance_norm: single-pixel slices are a degenerate-statistics error") {
  Tape<double> t(false);
  Td x = Td::zeros(Shape::nchw(1, 2, 1, 1));
  Td gamma = Td::full(Shape{2}, 1.0);
  Td beta = Td::zeros(Shape{2});
  CHECK_THROWS_AS(instance_norm(t, x, gamma, beta, 1e-5), NumericError);
}

TEST_CASE("cond_instance_norm: beta separation and identity-row reduction") {
  Rng rng(47);
  Td x = random_tensor<double>(Shape::nchw(1, 2, 4, 4), rng);
  Td gammas = Td::full(Shape{3, 2}, 1.0);
  Td betas = Td::zeros(Shape{3, 2});
  betas[0 * 2 + 0] = 0.0;
  betas[1 * 2 + 0] = 0.75;  // label1 channel0 beta differs by 0.75
  betas[1 * 2 + 1] = 0.0;
  Tape<double> t(false);
  Td y0 = cond_instance_norm(t, x, gammas, betas, StyleLabel(0, 3), 1e-5);
  Td y1 = cond_instance_norm(t, x, gammas, betas, StyleLabel(1, 3), 1e-5);
  // same gamma rows: outputs differ exactly by the beta delta
  CHECK(max_abs_diff(y0, y1) == doctest::Approx(0.75));

  Td gamma1 = Td::full(Shape{2}, 1.0);
  Td beta1 = Td::zeros(Shape{2});
  Td yin = instance_norm(t, x, gamma1, beta1, 1e-5);
  Td ycin = cond_instance_norm(t, x, gammas, betas, StyleLabel(0, 3), 1e-5);
  CHECK(bitwise_equal(yin, ycin));

  CHECK_THROWS_AS(cond_instance_norm(t, x, gammas, betas, StyleLabel(3, 4), 1e-5), ConfigError);
}

TEST_CASE("cond_instance_norm: one optimizer step leaves unselected rows bit-identical") {
  Rng rng(53);
  ParamStore<double> store;
  Tensor<double> gammas = store.create("g", Shape{3, 2});
  Tensor<double> betas = store.create("b", Shape{3, 2});
  fill_constant(gammas, 1.0);
  fill_normal(betas, rng, 0.1);
  auto snap_g = gammas.clone();
  auto snap_b = betas.clone();
  Adam<double> opt(1e-2, 0.5, 0.999);
  opt.attach(store);

  Td x = random_tensor<double>(Shape::nchw(2, 2, 4, 4), rng);
  Tape<double> t;
  Td y = cond_instance_norm(t, x, gammas, betas, StyleLabel(1, 3), 1e-5);
  Td loss = mean_all(t, mul(t, y, y));
  store.zero_grads();
  t.backward(loss);
  opt.step();

  for (int row : {0, 2})
    for (int c = 0; c < 2; ++c) {
      CHECK(gammas[row * 2 + c] == snap_g[row * 2 + c]);
      CHECK(betas[row * 2 + c] == snap_b[row * 2 + c]);
    }
  // the selected row moved
  bool moved = false;
  for (int c = 0; c < 2; ++c) moved |= gammas[1 * 2 + c] != snap_g[1 * 2 + c];
  CHECK(moved);
}

TEST_CASE("activations: pinned values and the subgradient at zero") {
  Tape<double> t(false);
  Td x = Td::from_data(Shape{3}, {-2.0, 0.0, 3.0});
  Td y = leaky_relu(t, x, 0.2);
  CHECK(y[0] == doctest::Approx(-0.4));
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(3.0));
  CHECK(tanh_op(t, Td::scalar(0.0)).item() == 0.0);
  CHECK(sigmoid(t, Td::scalar(0.0)).item() == doctest::Approx(0.5));

  // at exactly 0 the leaky_relu subgradient is the negative-side slope
  Td x0 = Td::scalar(0.0);
  x0.set_requires_grad(true);
  x0.ensure_grad();
  Tape<double> tg;
  Td loss = sum_all(tg, leaky_relu(tg, x0, 0.2));
  tg.backward(loss);
  CHECK(x0.grad()[0] == doctest::Approx(0.2));
}

TEST_CASE("upsample_nearest: replication and block-summed backward") {
  Tape<double> t(false);
  Rng rng(59);
  Td x = random_tensor<double>(Shape::nchw(1, 2, 3, 3), rng);
  Td same = upsample_nearest(t, x, 1);
  CHECK(bitwise_equal(x, same));

  Td v = Td::full(Shape::nchw(1, 1, 1, 1), 2.5);
  v.set_requires_grad(true);
  v.ensure_grad();
  Tape<double> tg;
  Td up = upsample_nearest(tg, v, 2);
  for (double u : up.data()) CHECK(u == doctest::Approx(2.5));
  Td loss = sum_all(tg, up);
  tg.backward(loss);
  CHECK(v.grad()[0] == doctest::Approx(4.0));  // replication count
}

TEST_CASE("avg_pool: full-extent kernel is the global mean; constants pass through") {
  Rng rng(61);
  Td x = random_tensor<double>(Shape::nchw(1, 2, 4, 4), rng);
  Tape<double> t(false);
  Td y = avg_pool(t, x, 4, 4);
  CHECK(y.shape() == Shape::nchw(1, 2, 1, 1));
  for (int c = 0; c < 2; ++c) {
    double mean = 0;
    for (int j = 0; j < 16; ++j) mean += x.data()[c * 16 + j];
    CHECK(y[c] == doctest::Approx(mean / 16));
  }
  Td k = Td::full(Shape::nchw(1, 1, 6, 6), -0.3);
  Td yk = avg_pool(t, k, 2, 2);
  for (double v : yk.data()) CHECK(v == doctest::Approx(-0.3));
  CHECK_THROWS_AS(avg_pool(t, k, 7, 1), ShapeError);
}

TEST_CASE("concat_channels: slices recoverable, gradient routes without mixing") {
  Rng rng(67);
  Td a = random_tensor<double>(Shape::nchw(1, 3, 4, 4), rng);
  Td b = random_tensor<double>(Shape::nchw(1, 2, 4, 4), rng);
  Tape<double> t(false);
  Td y = concat_channels(t, a, b);
  CHECK(y.shape() == Shape::nchw(1, 5, 4, 4));
  for (int64_t i = 0; i < a.numel(); ++i) CHECK(y[i] == a[i]);
  for (int64_t i = 0; i < b.numel(); ++i) CHECK(y[a.numel() + i] == b[i]);

  // orthogonal probe: weight only the a-channels; b must receive zero grad
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  a.ensure_grad();
  b.ensure_grad();
  Tape<double> tg;
  Td cat = concat_channels(tg, a, b);
  Td probe = Td::zeros(cat.shape());
  Rng prng(71);
  for (int64_t i = 0; i < a.numel(); ++i) probe[i] = prng.uniform(-1, 1);
  Td loss = sum_all(tg, mul(tg, cat, probe));
  tg.backward(loss);
  for (int64_t i = 0; i < a.numel(); ++i) CHECK(a.grad()[i] == doctest::Approx(probe[i]));
  for (int64_t i = 0; i < b.numel(); ++i) CHECK(b.grad()[i] == 0.0);
}

TEST_CASE("broadcast_label: one-hot constant maps") {
  Td maps = broadcast_label<double>(StyleLabel(1, 3), 4, 4);
  CHECK(maps.shape() == Shape{3, 4, 4});
  for (int i = 0; i < 16; ++i) {
    CHECK(maps[i] == 0.0);
    CHECK(maps[16 + i] == 1.0);
    CHECK(maps[32 + i] == 0.0);
  }
}

TEST_CASE("backward: seed gradients and contract errors") {
  Rng rng(73);
  Td x = random_tensor<double>(Shape{6}, rng);
  x.set_requires_grad(true);
  x.ensure_grad();
  {
    Tape<double> t;
    Td loss = sum_all(t, x);
    t.backward(loss);
    for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
    CHECK_THROWS_AS(t.backward(loss), ConfigError);  // repeated backward without reset
  }
  x.zero_grad();
  {
    Tape<double> t;
    Td loss = affine(t, sum_all(t, mul(t, x, x)), 0.5, 0.0);  // sum(x.x)/2
    t.backward(loss);
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(x.grad()[i] == doctest::Approx(x[i]));
  }
  {
    Tape<double> t;
    Td vec = mul(t, x, x);
    CHECK_THROWS_AS(t.backward(vec), ShapeError);  // non-scalar loss
  }
  {
    Tape<double> t;
    Td detached = Td::scalar(1.0);
    CHECK_THROWS_AS(t.backward(detached), ConfigError);  // empty graph
  }
}

TEST_CASE("gradient suite: spec example configs at 64-bit") {
  // the per-operation finite-difference oracles, 3 seeds in the unit run
  GradSuiteReport rep = run_gradient_suite(1234, 3, nullptr);
  CHECK(rep.failures == 0);
  CHECK(rep.max_primitive_err < kPrimitiveTol);
  CHECK(rep.max_composite_err < kCompositeTol);
}

TEST_CASE("forward outputs stay finite on finite inputs") {
  Rng rng(79);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 8, 8), rng);
  Td w = random_tensor<double>(Shape{4, 3, 3, 3}, rng);
  Td b = random_tensor<double>(Shape{4}, rng);
  Tape<double> t(false);
  Td y = conv2d(t, x, w, b, 1, 1, PadMode::kReflect);
  CHECK(y.all_finite());
  Td g = Td::full(Shape{4}, 1.0);
  Td z = Td::zeros(Shape{4});
  CHECK(instance_norm(t, y, g, z, 1e-5).all_finite());
  CHECK(tanh_op(t, y).all_finite());
  CHECK(sigmoid(t, y).all_finite());
}

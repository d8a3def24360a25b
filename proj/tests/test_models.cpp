#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "asma/discriminator.hpp"
#include "asma/gradcheck.hpp"
#include "asma/generator.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace asma;
using namespace asma::testing;

using Td = Tensor<double>;
using Tf = Tensor<float>;

namespace {

GeneratorConfig small_gen_config(AsmPlacement placement = AsmPlacement::kAsm2) {
  GeneratorConfig gc;
  gc.base_channels = 8;
  gc.channel_cap = 32;
  gc.num_styles = 2;
  gc.asm_placement = placement;
  return gc;
}

}  // namespace

TEST_CASE("generator: encoder pyramid shapes and 16x downsample") {
  Rng rng(3);
  ParamStore<double> store;
  Generator<double> g(small_gen_config(AsmPlacement::kNone), store, rng);
  Td x = random_tensor<double>(Shape::nchw(1, 3, 64, 64), rng);
  Tape<double> t(false);
  auto f = g.encode(t, x);
  CHECK(f.h.shape().h() == 4);
  CHECK(f.h.shape().w() == 4);
  for (int l = 1; l <= 4; ++l) {
    CHECK(f.stage(l).shape().h() == 64 >> l);
    CHECK(f.stage(l).shape().w() == 64 >> l);
  }
  Td bad = random_tensor<double>(Shape::nchw(1, 3, 60, 64), rng);
  CHECK_THROWS_AS(g.encode(t, bad), ShapeError);
}

TEST_CASE("generator: encode is translation-covariant away from borders") {
  // 96-wide crops of a 112-wide scene that is constant outside a content
  // band present in both crops: instance-norm statistics agree exactly, so
  // interior activations must match after a one-pixel shift of h.
  Rng rng(7);
  ParamStore<double> store;
  Generator<double> g(small_gen_config(AsmPlacement::kNone), store, rng);

  const int h = 96, scene_w = 112, crop = 96, shift = 16;
  std::vector<double> scene(static_cast<size_t>(3) * h * scene_w, 0.2);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 48; x < 64; ++x)
        scene[static_cast<size_t>((c * h + y) * scene_w + x)] = rng.uniform(-1, 1);

  auto crop_at = [&](int x0) {
    Td img = Td::zeros(Shape::nchw(1, 3, h, crop));
    auto d = img.data();
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < crop; ++x)
          d[(static_cast<int64_t>(c) * h + y) * crop + x] = scene[static_cast<size_t>((c * h + y) * scene_w + x0 + x)];
    return img;
  };

  Tape<double> t(false);
  Td ha = g.encode(t, crop_at(0)).h;
  Td hb = g.encode(t, crop_at(shift)).h;
  // central 2x2 of h: rows {2,3}, cols {2,3} in A map to cols {1,2} in B
  double worst = 0;
  for (int64_t c = 0; c < ha.shape().c(); ++c)
    for (int64_t r = 2; r <= 3; ++r)
      for (int64_t col = 2; col <= 3; ++col)
        worst = std::max(worst, std::abs(ha.at(0, c, r, col) - hb.at(0, c, r, col - 1)));
  CHECK(worst < 1e-5);
}

TEST_CASE("generator: residual stack is the identity at initialization") {
  Rng rng(11);
  ParamStore<double> store;
  Generator<double> g(small_gen_config(AsmPlacement::kNone), store, rng);
  Td h = random_tensor<double>(Shape::nchw(1, 32, 4, 4), rng);
  Tape<double> t(false);
  Td out0 = g.bottleneck(t, h, StyleLabel(0, 2));
  CHECK(bitwise_equal(out0, h));
  // identical CIN rows: output independent of the label, bit for bit
  Td out1 = g.bottleneck(t, h, StyleLabel(1, 2));
  CHECK(bitwise_equal(out0, out1));
}

TEST_CASE("generator: gradient reaches only the selected CIN row") {
  Rng rng(13);
  ParamStore<double> store;
  Generator<double> g(small_gen_config(AsmPlacement::kNone), store, rng);
  // make the conditional block non-degenerate so gradients actually flow
  for (auto& e : store.entries())
    for (double& v : e.tensor.data()) v += rng.uniform(-0.05, 0.05);

  Td x = random_tensor<double>(Shape::nchw(1, 3, 32, 32), rng);
  Tape<double> t;
  Td out = g.generate(t, x, StyleLabel(0, 2));
  Td loss = mean_all(t, mul(t, out, out));
  store.zero_grads();
  t.backward(loss);

  for (const auto& e : store.entries()) {
    if (e.name.find("condres.norm") == std::string::npos) continue;
    const int64_t c = e.tensor.shape()[1];
    auto grad = e.tensor.grad();
    double row0 = 0, row1 = 0;
    for (int64_t j = 0; j < c; ++j) {
      row0 += std::abs(grad[j]);
      row1 += std::abs(grad[c + j]);
    }
    CHECK(row1 == 0.0);   // unselected label row
    CHECK(row0 > 0.0);
  }
}

TEST_CASE("generator: shape contract, tanh range, determinism") {
  Rng rng(17);
  ParamStore<float> store;
  Generator<float> g(small_gen_config(AsmPlacement::kAsm2), store, rng);
  for (auto& e : store.entries())
    for (float& v : e.tensor.data()) v += static_cast<float>(rng.uniform(-0.05, 0.05));
  Tf x = random_tensor<float>(Shape::nchw(2, 3, 48, 32), rng);
  Tape<float> t(false);
  Tf y1 = g.generate(t, x, StyleLabel(1, 2));
  CHECK(y1.shape() == Shape::nchw(2, 3, 48, 32));
  for (float v : y1.data()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  Tf y2 = g.generate(t, x, StyleLabel(1, 2));
  CHECK(bitwise_equal(y1, y2));
  CHECK(y1.all_finite());
}

TEST_CASE("generator: parameter count matches the config arithmetic") {
  GeneratorConfig gc = small_gen_config(AsmPlacement::kAsm2);
  Rng rng(19);
  ParamStore<double> store;
  Generator<double> g(gc, store, rng);

  // golden value recomputed here from first principles
  auto ch = [&](int l) { return gc.stage_channels(l); };
  int64_t want = 0;
  auto conv = [](int64_t ci, int64_t co, int64_t k) { return co * ci * k * k + co; };
  auto in_params = [](int64_t c) { return 2 * c; };
  want += conv(3, ch(0), 3) + in_params(ch(0));                      // stem
  for (int l = 1; l <= 4; ++l) want += conv(ch(l - 1), ch(l), 3) + in_params(ch(l));
  const int64_t cb = ch(4);
  for (int i = 0; i < gc.n_resblocks; ++i) want += 2 * conv(cb, cb, 3) + 2 * in_params(cb);
  want += 2 * conv(cb, cb, 3) + 2 * (2 * gc.num_styles * cb);        // conditional resblock, CIN tables
  const int stage = asm_stage(gc.asm_placement);
  const int64_t stride = int64_t(1) << (4 - stage);
  want += (cb + gc.num_styles) * ch(stage) * stride * stride + ch(stage);  // lift
  want += 2 * (1 * 2 * 7 * 7 + 1);                                   // both spatial gates
  want += conv(2 * ch(stage), ch(stage), 3);                         // merge
  for (int l = stage; l >= 1; --l) want += conv(ch(l), ch(l - 1), 3) + in_params(ch(l - 1));
  want += conv(ch(0), 3, 3);                                         // colorization

  CHECK(store.total_trainable() == want);
}

TEST_CASE("asm: lift is linear in the label maps and tiles by the stage stride") {
  Rng rng(23);
  AsmConfig ac;
  ac.stage = 2;
  ac.hidden_channels = 8;
  ac.out_channels = 4;
  ac.num_styles = 3;
  ParamStore<double> store;
  AsmModule<double> asm_mod(ac, store, rng);

  Td h0 = Td::zeros(Shape::nchw(1, 8, 4, 4));
  Tape<double> t(false);
  Td lifted0 = asm_mod.lift_hidden(t, h0, StyleLabel(0, 3));
  Td lifted1 = asm_mod.lift_hidden(t, h0, StyleLabel(1, 3));
  CHECK(lifted0.shape() == Shape::nchw(1, 4, 16, 16));  // stride-4, 4x spatial

  // with h = 0 the outputs depend on the label channels only; the delta
  // equals the transposed conv of the label-map difference with zero bias
  Td delta = sub(t, lifted0, lifted1);
  Td maps0 = broadcast_label_nchw<double>(StyleLabel(0, 3), 1, 4, 4);
  Td maps1 = broadcast_label_nchw<double>(StyleLabel(1, 3), 1, 4, 4);
  Td dmaps = sub(t, maps0, maps1);
  Td zeros_h = Td::zeros(Shape::nchw(1, 8, 4, 4));
  Td full_dmaps = concat_channels(t, zeros_h, dmaps);
  Td direct = conv2d_transposed(t, full_dmaps, asm_mod.lift().w, 4, 0);
  CHECK(max_abs_diff(delta, direct) < 1e-12);
}

TEST_CASE("asm: spatial gate is 0.5 under zero weights and always in (0,1)") {
  Rng rng(29);
  AsmConfig ac;
  ac.stage = 2;
  ac.hidden_channels = 8;
  ac.out_channels = 4;
  ac.num_styles = 2;
  ParamStore<double> store;
  AsmModule<double> asm_mod(ac, store, rng);

  Td hhat = random_tensor<double>(Shape::nchw(1, 4, 8, 8), rng);
  Td xl = random_tensor<double>(Shape::nchw(1, 4, 8, 8), rng);
  {
    ParamStore<double> zstore;
    Rng zrng(1);
    AsmModule<double> zeroed(ac, zstore, zrng);
    for (auto& e : zstore.entries())
      if (e.name.find("reset") != std::string::npos) fill_constant(e.tensor, 0.0);
    Tape<double> t(false);
    Td mask = zeroed.spatial_gate(t, hhat, xl, zeroed.reset_gate());
    for (double v : mask.data()) CHECK(v == doctest::Approx(0.5));
  }
  Tape<double> t(false);
  Td mask = asm_mod.spatial_gate(t, hhat, xl, asm_mod.update_gate());
  CHECK(mask.shape() == Shape::nchw(1, 1, 8, 8));
  for (double v : mask.data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  Td badshape = random_tensor<double>(Shape::nchw(1, 4, 4, 8), rng);
  CHECK_THROWS_AS(asm_mod.spatial_gate(t, hhat, badshape, asm_mod.reset_gate()), ShapeError);
}

TEST_CASE("asm: gate-bias saturation drives the fusion to its endpoints") {
  // float32: sigmoid(+20) rounds to exactly 1, so x_hat == candidate bit
  // for bit; with bias -20 the residual z*h_til term is below half an ulp
  // of any |h_hat| >= 0.05 and x_hat == h_hat exactly.
  Rng rng(31);
  AsmConfig ac;
  ac.stage = 2;
  ac.hidden_channels = 4;
  ac.out_channels = 4;
  ac.num_styles = 2;

  for (double bias : {20.0, -20.0}) {
    ParamStore<float> store;
    Rng prng(31);
    AsmModule<float> asm_mod(ac, store, prng);
    for (auto& e : store.entries()) {
      if (e.name == "asm.update.w") fill_constant(e.tensor, 0.0f);
      if (e.name == "asm.update.b") fill_constant(e.tensor, static_cast<float>(bias));
      if (e.name == "asm.lift.w") fill_constant(e.tensor, 0.0f);
      if (e.name == "asm.lift.b")
        for (float& v : e.tensor.data()) v = static_cast<float>(prng.uniform(0.1, 1.0) * (prng.uniform() < 0.5 ? -1 : 1));
    }
    Tf h = random_tensor<float>(Shape::nchw(1, 4, 4, 4), rng);
    Tf xl = random_tensor<float>(Shape::nchw(1, 4, 16, 16), rng);
    StyleLabel label(0, 2);

    Tape<float> t(false);
    Tf fused = asm_mod.fuse(t, xl, h, label);
    // rebuild the candidate/hidden branches exactly as fuse does
    Tf h_hat = asm_mod.lift_hidden(t, h, label);
    Tf r = asm_mod.spatial_gate(t, h_hat, xl, asm_mod.reset_gate());
    Tf rh = scale_by_mask(t, h_hat, r);
    Tf candidate;
    {
      Tape<float> t2(false);
      Tf cat = concat_channels(t2, rh, xl);
      candidate = tanh_op(t2, conv2d(t2, cat, store.find("asm.merge.w") ? *store.find("asm.merge.w") : Tf(),
                                     *store.find("asm.merge.b"), 1, 1, PadMode::kReflect));
    }
    if (bias > 0) {
      CHECK(bitwise_equal(fused, candidate));
    } else {
      CHECK(bitwise_equal(fused, h_hat));
    }
  }
}

TEST_CASE("asm: fused output lies between the candidate and the hidden state") {
  Rng rng(37);
  AsmConfig ac;
  ac.stage = 3;
  ac.hidden_channels = 6;
  ac.out_channels = 5;
  ac.num_styles = 2;
  ParamStore<double> store;
  AsmModule<double> asm_mod(ac, store, rng);
  Td h = random_tensor<double>(Shape::nchw(2, 6, 4, 4), rng);
  Td xl = random_tensor<double>(Shape::nchw(2, 5, 8, 8), rng);
  StyleLabel label(1, 2);

  Tape<double> t(false);
  Td fused = asm_mod.fuse(t, xl, h, label);
  Td h_hat = asm_mod.lift_hidden(t, h, label);
  Td r = asm_mod.spatial_gate(t, h_hat, xl, asm_mod.reset_gate());
  Td candidate = tanh_op(t, conv2d(t, concat_channels(t, scale_by_mask(t, h_hat, r), xl), *store.find("asm.merge.w"),
                                   *store.find("asm.merge.b"), 1, 1, PadMode::kReflect));
  auto fd = fused.data();
  auto cd = candidate.data();
  auto hd = h_hat.data();
  for (size_t i = 0; i < fd.size(); ++i) {
    CHECK(fd[i] >= std::min(cd[i], hd[i]) - 1e-12);
    CHECK(fd[i] <= std::max(cd[i], hd[i]) + 1e-12);
    CHECK(cd[i] > -1.0);  // tanh bound on the candidate
    CHECK(cd[i] < 1.0);
  }
}

TEST_CASE("asm: ablation flags change the function") {
  Td h, xl;
  {
    Rng rng(41);
    h = random_tensor<double>(Shape::nchw(1, 6, 4, 4), rng);
    xl = random_tensor<double>(Shape::nchw(1, 5, 16, 16), rng);
  }
  auto run = [&](bool no_reset, bool no_update) {
    AsmConfig ac;
    ac.stage = 2;
    ac.hidden_channels = 6;
    ac.out_channels = 5;
    ac.num_styles = 2;
    ac.disable_reset_gate = no_reset;
    ac.disable_update_gate = no_update;
    ParamStore<double> store;
    Rng prng(43);  // same init draws for the shared layers
    AsmModule<double> mod(ac, store, prng);
    Tape<double> t(false);
    return mod.fuse(t, xl, h, StyleLabel(0, 2));
  };
  Td full = run(false, false);
  CHECK(max_abs_diff(full, run(true, false)) > 1e-6);
  CHECK(max_abs_diff(full, run(false, true)) > 1e-6);
}

TEST_CASE("asm: gradient checks through lift and gates") {
  Rng rng(47);
  AsmConfig ac;
  ac.stage = 2;
  ac.hidden_channels = 4;
  ac.out_channels = 3;
  ac.num_styles = 2;
  ParamStore<double> store;
  AsmModule<double> asm_mod(ac, store, rng);
  Td h = random_tensor<double>(Shape::nchw(1, 4, 2, 2), rng);
  Td xl = random_tensor<double>(Shape::nchw(1, 3, 8, 8), rng);
  StyleLabel label(1, 2);
  Td probe = random_tensor<double>(Shape::nchw(1, 3, 8, 8), rng);

  std::vector<Tensor<double>> leaves = {h, xl};
  for (auto& e : store.entries()) leaves.push_back(e.tensor);
  Rng fr(49);
  auto res = finite_difference_check<double>(
      [&](Tape<double>& t) { return sum_all(t, mul(t, asm_mod.fuse(t, xl, h, label), probe)); }, leaves, 1e-5, 24, fr);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("discriminator: spectral normalization against known singular values") {
  // diag(3,1): sigma converges to 3 and the normalized matrix has norm 1
  Tensor<double> w = Tensor<double>::from_data(Shape{2, 2}, {3.0, 0.0, 0.0, 1.0});
  Tensor<double> u = Tensor<double>::from_data(Shape{2}, {0.6, 0.8});
  Tape<double> t(false);
  Tensor<double> wn;
  for (int i = 0; i < 25; ++i) wn = spectral_normalize(t, w, u, true);
  CHECK(spectral_sigma(w, u) == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(svd_largest_singular_value(wn) == doctest::Approx(1.0).epsilon(1e-3));

  // identity stays the identity
  Tensor<double> eye = Tensor<double>::from_data(Shape{2, 2}, {1.0, 0.0, 0.0, 1.0});
  Tensor<double> ue = Tensor<double>::from_data(Shape{2}, {1.0, 0.0});
  Tensor<double> en = spectral_normalize(t, eye, ue, true);
  CHECK(max_abs_diff(en, eye) < 1e-12);

  // random 8x8 vs the brute-force SVD oracle after 50 iterations
  Rng rng(53);
  Tensor<double> m = random_tensor<double>(Shape{8, 8}, rng);
  Tensor<double> um = Tensor<double>::zeros(Shape{8});
  for (double& v : um.data()) v = rng.normal();
  for (int i = 0; i < 50; ++i) spectral_normalize(t, m, um, true);
  CHECK(std::abs(spectral_sigma(m, um) - svd_largest_singular_value(m)) < 1e-4);

  // zero matrix: sigma clamped, no blowup
  Tensor<double> z = Tensor<double>::zeros(Shape{2, 3});
  Tensor<double> uz = Tensor<double>::from_data(Shape{2}, {1.0, 0.0});
  Tensor<double> zn = spectral_normalize(t, z, uz, true);
  CHECK(zn.all_finite());
}

TEST_CASE("discriminator: tap shapes for a 64x64 input") {
  Rng rng(59);
  DiscConfig dc;
  dc.widths = {4, 8, 8, 16, 16, 16};
  ParamStore<double> store;
  Discriminator<double> d(dc, store, rng);
  Td x = random_tensor<double>(Shape::nchw(1, 3, 64, 64), rng);
  Tape<double> t(false);
  auto taps = d.backbone(t, x, false);
  REQUIRE(taps.size() == 3);
  CHECK(taps[0].shape().h() == 16);
  CHECK(taps[1].shape().h() == 4);
  CHECK(taps[2].shape().h() == 1);
  // one octave below 2^n_blocks still runs, deepest taps clamped at 1x1
  Td half = random_tensor<double>(Shape::nchw(1, 3, 32, 32), rng);
  auto half_taps = d.backbone(t, half, false);
  CHECK(half_taps[2].shape().h() == 1);
  Td tiny = random_tensor<double>(Shape::nchw(1, 3, 16, 16), rng);
  CHECK_THROWS_AS(d.backbone(t, tiny, false), ShapeError);
}

TEST_CASE("discriminator: zero embeddings make the score label-free") {
  Rng rng(61);
  DiscConfig dc;
  dc.widths = {4, 8, 8, 16, 16, 16};
  ParamStore<double> store;
  Discriminator<double> d(dc, store, rng);
  for (auto& e : store.entries())
    if (e.name.find(".V") != std::string::npos && e.name.find(".u") == std::string::npos) fill_constant(e.tensor, 0.0);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 64, 64), rng);
  Tape<double> t(false);
  Td s0 = d.project_score(t, x, StyleLabel(0, 2), false);
  Td s1 = d.project_score(t, x, StyleLabel(1, 2), false);
  CHECK(bitwise_equal(s0, s1));
}

TEST_CASE("discriminator: score is affine in the label vector") {
  Rng rng(67);
  DiscConfig dc;
  dc.widths = {4, 8, 8, 16, 16, 16};
  ParamStore<double> store;
  Discriminator<double> d(dc, store, rng);
  Td x = random_tensor<double>(Shape::nchw(2, 3, 64, 64), rng);
  Tape<double> t(false);
  const double a = 0.37, b = -1.21;
  Td c0 = Td::from_data(Shape{2}, {1.0, 0.0});
  Td c1 = Td::from_data(Shape{2}, {0.0, 1.0});
  Td zero = Td::zeros(Shape{2});
  Td mix = Td::from_data(Shape{2}, {a, b});
  Td s_mix = d.project_score_vec(t, x, mix, false);
  Td s0 = d.project_score_vec(t, x, c0, false);
  Td s1 = d.project_score_vec(t, x, c1, false);
  Td sz = d.project_score_vec(t, x, zero, false);
  for (int64_t i = 0; i < s_mix.numel(); ++i) {
    double want = a * s0[i] + b * s1[i] + (1.0 - a - b) * sz[i];
    CHECK(std::abs(s_mix[i] - want) / std::max({std::abs(want), std::abs(s_mix[i]), 1e-30}) < 1e-10);
  }
}

TEST_CASE("discriminator: single-scale config equals a direct reference of the projection score") {
  Rng rng(71);
  DiscConfig dc;
  dc.widths = {4, 8, 8, 16, 16, 16};
  dc.scale_taps = {6};
  dc.scale_weights = {1.0};
  ParamStore<double> store;
  Discriminator<double> d(dc, store, rng);
  Td x = random_tensor<double>(Shape::nchw(3, 3, 64, 64), rng);
  StyleLabel label(1, 2);

  Tape<double> t(false);
  Td got = d.project_score(t, x, label, false);

  // reference: same backbone feature, head math recomputed sequentially
  auto taps = d.backbone(t, x, false);
  REQUIRE(taps.size() == 1);
  const Td& feat = taps[0];
  const int64_t n = feat.shape().n(), c = feat.shape().c(), m = feat.shape().h() * feat.shape().w();
  auto spectral_scale = [](const Tensor<double>& w, const Tensor<double>& u) {
    const int64_t rows = w.shape()[0], cols = w.numel() / rows;
    std::vector<double> v(static_cast<size_t>(cols), 0.0);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t cc = 0; cc < cols; ++cc) v[static_cast<size_t>(cc)] += u[r] * w[r * cols + cc];
    double nrm = 0;
    for (double vv : v) nrm += vv * vv;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-20) nrm = 1e-20;
    for (double& vv : v) vv /= nrm;
    double sigma = 0;
    for (int64_t r = 0; r < rows; ++r) {
      double s = 0;
      for (int64_t cc = 0; cc < cols; ++cc) s += w[r * cols + cc] * v[static_cast<size_t>(cc)];
      sigma += u[r] * s;
    }
    if (sigma < 1e-12) sigma = 1e-12;
    return sigma;
  };
  const Tensor<double>& V = *store.find("disc.head6.V");
  const Tensor<double>& Vu = *store.find("disc.head6.V.u");
  const Tensor<double>& psi_w = *store.find("disc.head6.psi.w");
  const Tensor<double>& psi_u = *store.find("disc.head6.psi.u");
  const Tensor<double>& psi_b = *store.find("disc.head6.psi.b");
  const double v_sigma = spectral_scale(V, Vu);
  const double p_sigma = spectral_scale(psi_w, psi_u);

  for (int64_t i = 0; i < n; ++i) {
    // phi: global average pool, sequential sum then multiply by 1/m
    std::vector<double> phi(static_cast<size_t>(c), 0.0);
    const double inv = 1.0 / static_cast<double>(m);
    for (int64_t ch = 0; ch < c; ++ch) {
      double s = 0;
      for (int64_t j = 0; j < m; ++j) s += feat[(i * c + ch) * m + j];
      phi[static_cast<size_t>(ch)] = s * inv;
    }
    // c^T (V/sigma) phi with the one-hot label selecting row 1
    std::vector<double> e(static_cast<size_t>(c), 0.0);
    for (int64_t j = 0; j < c; ++j) e[static_cast<size_t>(j)] += 1.0 * (V[1 * c + j] * (1.0 / v_sigma));
    double proj = 0;
    for (int64_t j = 0; j < c; ++j) proj += e[static_cast<size_t>(j)] * phi[static_cast<size_t>(j)];
    // psi: one spectrally normalized linear map to a scalar
    double psi = 0;
    for (int64_t j = 0; j < c; ++j) psi += phi[static_cast<size_t>(j)] * (psi_w[j] * (1.0 / p_sigma));
    psi += psi_b[0];
    const double want = (proj + psi) * 1.0 + 0.0;
    CHECK(got[i] == want);  // bit-for-bit
  }
}

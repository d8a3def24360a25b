#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asma/gradcheck.hpp"
#include "asma/losses.hpp"
#include "support/testutil.hpp"

using namespace asma;
using namespace asma::testing;

using Td = Tensor<double>;

namespace {

GeneratorConfig tiny_gen() {
  GeneratorConfig gc;
  gc.base_channels = 4;
  gc.channel_cap = 8;
  gc.num_styles = 2;
  gc.asm_placement = AsmPlacement::kNone;
  return gc;
}

}  // namespace

TEST_CASE("content_loss: zero at identity, nonnegative, symmetric, recomputable") {
  Rng rng(101);
  ParamStore<double> store;
  Generator<double> g(tiny_gen(), store, rng);
  Td a = random_tensor<double>(Shape::nchw(1, 3, 32, 32), rng);
  Td b = random_tensor<double>(Shape::nchw(1, 3, 32, 32), rng);

  Tape<double> t(false);
  CHECK(content_loss(t, g, a, a).item() == 0.0);
  double lab = content_loss(t, g, a, b).item();
  double lba = content_loss(t, g, b, a).item();
  CHECK(lab >= 0.0);
  CHECK(lab == doctest::Approx(lba).epsilon(1e-12));

  // direct recomputation from the encodings
  Td ea = g.encode(t, a).h;
  Td eb = g.encode(t, b).h;
  double want = 0;
  for (int64_t i = 0; i < ea.numel(); ++i) want += std::abs(ea[i] - eb[i]);
  want /= static_cast<double>(ea.numel());
  CHECK(std::abs(lab - want) < 1e-10);

  Td odd = random_tensor<double>(Shape::nchw(1, 3, 32, 48), rng);
  CHECK_THROWS_AS(content_loss(t, g, a, odd), ShapeError);
}

TEST_CASE("transform_loss: identity, constant offset, brute-force recomputation") {
  Rng rng(103);
  Td a = random_tensor<double>(Shape::nchw(2, 3, 32, 32), rng);
  Tape<double> t(false);
  CHECK(transform_loss(t, a, a, 8, 8).item() == 0.0);

  const double delta = 0.37;
  Td shifted = Td::zeros(a.shape());
  for (int64_t i = 0; i < a.numel(); ++i) shifted[i] = a[i] + delta;
  CHECK(transform_loss(t, a, shifted, 8, 8).item() == doctest::Approx(delta).epsilon(1e-12));

  Td b = random_tensor<double>(Shape::nchw(2, 3, 32, 32), rng);
  double got = transform_loss(t, a, b, 8, 8).item();
  Td pa = avg_pool(t, a, 8, 8);
  Td pb = avg_pool(t, b, 8, 8);
  double want = 0;
  for (int64_t i = 0; i < pa.numel(); ++i) want += std::abs(pa[i] - pb[i]);
  want /= static_cast<double>(pa.numel());
  CHECK(std::abs(got - want) < 1e-10);
  CHECK(got == doctest::Approx(transform_loss(t, b, a, 8, 8).item()).epsilon(1e-12));
}

TEST_CASE("d_hinge_loss: margin saturation and the all-zero point") {
  Tape<double> t(false);
  Td good_real = Td::scalar(2.0), good_photo = Td::scalar(-2.0), good_fake = Td::scalar(-2.0);
  CHECK(d_hinge_loss(t, good_real, good_photo, good_fake).item() == 0.0);
  Td z = Td::scalar(0.0);
  CHECK(d_hinge_loss(t, z, z, z).item() == doctest::Approx(3.0));
}

TEST_CASE("d_hinge_loss: subgradient w.r.t. the real score") {
  for (double s : {0.4, 1.7}) {
    Td sr = Td::scalar(s);
    sr.set_requires_grad(true);
    sr.ensure_grad();
    Td sp = Td::scalar(-2.0), sf = Td::scalar(-2.0);
    Tape<double> t;
    Td loss = d_hinge_loss(t, sr, sp, sf);
    t.backward(loss);
    CHECK(sr.grad()[0] == doctest::Approx(s < 1.0 ? -1.0 : 0.0));
  }
  // finite-difference corroboration away from the hinge corner
  Rng fr(1);
  Td sr = Td::scalar(0.4);
  sr.set_requires_grad(true);
  sr.ensure_grad();
  auto r2 = finite_difference_check<double>(
      [&](Tape<double>& t) { return d_hinge_loss(t, sr, Td::scalar(-2.0), Td::scalar(-2.0)); }, {sr}, 1e-6, 1, fr);
  CHECK(r2.max_rel_err < 1e-6);
}

TEST_CASE("g_adv_loss: negated mean score") {
  Tape<double> t(false);
  CHECK(g_adv_loss(t, Td::scalar(0.0)).item() == 0.0);
  CHECK(g_adv_loss(t, Td::scalar(3.0)).item() == doctest::Approx(-3.0));
  Td batch = Td::from_data(Shape{2}, {1.0, 3.0});
  CHECK(g_adv_loss(t, batch).item() == doctest::Approx(-2.0));
}

TEST_CASE("total_g_objective: paper weights and recomputation") {
  LossWeights<double> w;
  CHECK(w.lambda_C == 90.0);
  CHECK(w.lambda_T == 100.0);

  Tape<double> t(false);
  Td zero = Td::scalar(0.0);
  CHECK(total_g_objective(t, zero, zero, zero, w).item() == 0.0);

  Td ga = Td::scalar(-0.25), lc = Td::scalar(0.125), lt = Td::scalar(0.0625);
  double got = total_g_objective(t, ga, lc, lt, w).item();
  double want = -0.25 + 90.0 * 0.125 + 100.0 * 0.0625;
  CHECK(std::abs(got - want) < 1e-12);
}

#pragma once

#include <string>
#include <vector>

#include "asma/layers.hpp"

namespace asma {

struct DiscConfig {
  int n_blocks = 6;                                    // conv5-stride2-SN-LeakyReLU blocks
  std::vector<int> widths = {8, 16, 32, 64, 64, 128};  // desk scale
  std::vector<int> scale_taps = {2, 4, 6};             // 1-based block indices feeding projection heads
  std::vector<double> scale_weights = {1.0, 1.0, 1.0};
  int num_styles = 2;
  int in_channels = 3;
  double leaky_slope = 0.2;

  void validate() const {
    if (n_blocks < 1) throw ConfigError("DiscConfig: n_blocks must be >= 1");
    if (static_cast<int>(widths.size()) != n_blocks) throw ConfigError("DiscConfig: widths must list one channel count per block");
    if (scale_taps.empty()) throw ConfigError("DiscConfig: at least one scale tap required");
    if (scale_weights.size() != scale_taps.size()) throw ConfigError("DiscConfig: scale_weights must match scale_taps");
    int prev = 0;
    for (int t : scale_taps) {
      if (t <= prev || t > n_blocks) throw ConfigError("DiscConfig: scale_taps must be strictly increasing and <= n_blocks");
      prev = t;
    }
  }
};

// Shared spectrally-normalized conv backbone with per-scale projection
// heads: D(x, c) = sum_i w_i * (c^T V_i phi_i(x) + psi_i(phi_i(x))), where
// phi_i is the globally averaged tap feature. Power iteration advances only
// when update_u is set (one D training step); scoring is otherwise pure in
// (x, label, parameters, u states).
template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscConfig& cfg, ParamStore<T>& store, Rng& rng) : cfg_(cfg) {
    cfg.validate();
    int in_ch = cfg.in_channels;
    for (int i = 0; i < cfg.n_blocks; ++i) {
      blocks_.push_back(make_spectral_conv<T>(store, rng, "disc.block" + std::to_string(i + 1), in_ch, cfg.widths[static_cast<size_t>(i)],
                                              5, 2, 2, cfg.leaky_slope));
      in_ch = cfg.widths[static_cast<size_t>(i)];
    }
    for (size_t i = 0; i < cfg.scale_taps.size(); ++i) {
      const int c = cfg.widths[static_cast<size_t>(cfg.scale_taps[i] - 1)];
      std::string name = "disc.head" + std::to_string(cfg.scale_taps[i]);
      Head h;
      h.v = store.create(name + ".V", Shape{cfg.num_styles, c});
      fill_normal(h.v, rng, 0.02);
      h.v_u = store.create_state(name + ".V.u", Shape{cfg.num_styles});
      fill_unit_normalized(h.v_u, rng);
      h.psi = make_spectral_linear<T>(store, rng, name + ".psi", c, 1);
      heads_.push_back(h);
    }
  }

  // Features tapped after each configured block (post-activation).
  std::vector<Tensor<T>> backbone(Tape<T>& tape, const Tensor<T>& x, bool update_u) const {
    if (x.shape().rank() != 4 || x.shape().c() != cfg_.in_channels)
      throw ShapeError("Discriminator: expected (N," + std::to_string(cfg_.in_channels) + ",H,W) input");
    const int64_t min_side = int64_t(1) << (cfg_.n_blocks - 1);  // deepest taps clamp at 1x1
    if (x.shape().h() < min_side || x.shape().w() < min_side)
      throw ShapeError("Discriminator: input " + x.shape().str() + " below the backbone minimum " +
                       std::to_string(min_side));
    std::vector<Tensor<T>> taps;
    Tensor<T> cur = x;
    size_t next_tap = 0;
    for (int i = 0; i < cfg_.n_blocks; ++i) {
      cur = leaky_relu(tape, blocks_[static_cast<size_t>(i)](tape, cur, update_u), static_cast<T>(cfg_.leaky_slope));
      if (next_tap < cfg_.scale_taps.size() && cfg_.scale_taps[next_tap] == i + 1) {
        taps.push_back(cur);
        ++next_tap;
      }
    }
    return taps;
  }

  // Per-sample scores (N). The label enters only through the projection
  // term; raw (non-one-hot) label vectors are legal, the score is affine in
  // them.
  Tensor<T> project_score_vec(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& label_vec, bool update_u) const {
    std::vector<Tensor<T>> taps = backbone(tape, x, update_u);
    Tensor<T> total;
    for (size_t i = 0; i < taps.size(); ++i) {
      Tensor<T> phi = global_avg_pool(tape, taps[i]);
      Tensor<T> vn = spectral_normalize(tape, heads_[i].v, const_cast<Tensor<T>&>(heads_[i].v_u), update_u);
      Tensor<T> proj = label_projection(tape, phi, vn, label_vec);
      Tensor<T> psi = reshape(tape, heads_[i].psi(tape, phi, update_u), Shape{phi.shape()[0]});
      Tensor<T> s = add(tape, proj, psi);
      s = affine(tape, s, static_cast<T>(cfg_.scale_weights[i]), T(0));
      total = total.defined() ? add(tape, total, s) : s;
    }
    return total;
  }

  Tensor<T> project_score(Tape<T>& tape, const Tensor<T>& x, const StyleLabel& label, bool update_u) const {
    if (label.num_classes() != cfg_.num_styles) throw ConfigError("Discriminator: label class count mismatch");
    return project_score_vec(tape, x, label.one_hot_tensor<T>(), update_u);
  }

  const DiscConfig& config() const { return cfg_; }
  const std::vector<SpectralConvLayer<T>>& blocks() const { return blocks_; }

  struct Head {
    Tensor<T> v;    // (K, C) embedding
    Tensor<T> v_u;  // power-iteration state for V
    SpectralLinearLayer<T> psi;
  };
  const std::vector<Head>& heads() const { return heads_; }

 private:
  DiscConfig cfg_;
  std::vector<SpectralConvLayer<T>> blocks_;
  std::vector<Head> heads_;
};

}  // namespace asma

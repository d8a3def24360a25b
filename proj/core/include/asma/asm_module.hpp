#pragma once

#include <string>

#include "asma/layers.hpp"

namespace asma {

// Where the stroke-fusion module taps the encoder pyramid.
enum class AsmPlacement { kNone, kAsm1, kAsm2, kAsm3 };

inline int asm_stage(AsmPlacement p) {
  switch (p) {
    case AsmPlacement::kAsm1: return 1;  // 1/2 resolution
    case AsmPlacement::kAsm2: return 2;  // 1/4
    case AsmPlacement::kAsm3: return 3;  // 1/8
    default: return 0;
  }
}

struct AsmConfig {
  int stage = 2;             // encoder stage whose feature is fused (1..3)
  int hidden_channels = 0;   // channels of the bottleneck state h
  int out_channels = 0;      // channels of the encoder feature x^l
  int num_styles = 1;
  bool disable_reset_gate = false;   // ablation: r treated as all-ones
  bool disable_update_gate = false;  // ablation: output is the candidate
  double leaky_slope = 0.2;
};

// Gated fusion of a shallow encoder feature (fine stroke) with the
// upsampled, label-conditioned bottleneck state (coarse stroke):
//
//   h_hat = W_T * [h, c]
//   r     = sigmoid(W_r * gate_stats([h_hat, x]))
//   h_til = tanh(W * [r o h_hat, x])
//   z     = sigmoid(W_z * gate_stats([h_hat, x]))
//   x_hat = z o h_til + (1 - z) o h_hat
//
// The gates are spatial: per-pixel channel mean and max of the concat feed
// a 7x7 conv producing a single-channel mask broadcast over channels.
template <typename T>
class AsmModule {
 public:
  AsmModule() = default;

  AsmModule(const AsmConfig& cfg, ParamStore<T>& store, Rng& rng, const std::string& prefix = "asm")
      : cfg_(cfg) {
    if (cfg.stage < 1 || cfg.stage > 3) throw ConfigError("AsmModule: stage must be 1..3");
    const int stride = 1 << (4 - cfg.stage);  // lift from 1/16 to the tap resolution
    lift_ = make_conv_transposed<T>(store, rng, prefix + ".lift", cfg.hidden_channels + cfg.num_styles,
                                    cfg.out_channels, stride, stride, 0, cfg.leaky_slope);
    if (!cfg.disable_reset_gate) reset_gate_ = make_conv<T>(store, rng, prefix + ".reset", 2, 1, 7, 1, 3, PadMode::kReflect, 0.0);
    if (!cfg.disable_update_gate) update_gate_ = make_conv<T>(store, rng, prefix + ".update", 2, 1, 7, 1, 3, PadMode::kReflect, 0.0);
    merge_ = make_conv<T>(store, rng, prefix + ".merge", 2 * cfg.out_channels, cfg.out_channels, 3, 1, 1,
                          PadMode::kReflect, cfg.leaky_slope);
  }

  // h_hat = W_T * [h, c]: one transposed conv on the channel-concat of the
  // bottleneck state and constant label maps.
  Tensor<T> lift_hidden(Tape<T>& tape, const Tensor<T>& h, const StyleLabel& label) const {
    if (label.num_classes() != cfg_.num_styles)
      throw ConfigError("AsmModule: label class count mismatches configuration");
    Tensor<T> maps = broadcast_label_nchw<T>(label, static_cast<int>(h.shape().n()), static_cast<int>(h.shape().h()),
                                             static_cast<int>(h.shape().w()));
    return lift_(tape, concat_channels(tape, h, maps));
  }

  // Single-channel attention mask in (0,1) from [h_hat, x] statistics.
  Tensor<T> spatial_gate(Tape<T>& tape, const Tensor<T>& h_hat, const Tensor<T>& x, const ConvLayer<T>& gate) const {
    if (h_hat.shape() != x.shape())
      throw ShapeError("spatial_gate: operands must share shape, got " + h_hat.shape().str() + " vs " + x.shape().str());
    Tensor<T> cat = concat_channels(tape, h_hat, x);
    Tensor<T> stats = concat_channels(tape, channel_mean(tape, cat), channel_max(tape, cat));
    return sigmoid(tape, gate(tape, stats));
  }

  Tensor<T> fuse(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& h, const StyleLabel& label) const {
    Tensor<T> h_hat = lift_hidden(tape, h, label);
    if (h_hat.shape() != x.shape())
      throw ShapeError("AsmModule::fuse: lifted state " + h_hat.shape().str() + " does not match encoder feature " +
                       x.shape().str());
    Tensor<T> reset_input = h_hat;
    if (!cfg_.disable_reset_gate) {
      Tensor<T> r = spatial_gate(tape, h_hat, x, reset_gate_);
      reset_input = scale_by_mask(tape, h_hat, r);
    }
    Tensor<T> candidate = tanh_op(tape, merge_(tape, concat_channels(tape, reset_input, x)));
    if (cfg_.disable_update_gate) return candidate;
    Tensor<T> z = spatial_gate(tape, h_hat, x, update_gate_);
    Tensor<T> keep = affine(tape, z, T(-1), T(1));  // 1 - z
    return add(tape, scale_by_mask(tape, candidate, z), scale_by_mask(tape, h_hat, keep));
  }

  const AsmConfig& config() const { return cfg_; }
  const ConvLayer<T>& reset_gate() const { return reset_gate_; }
  const ConvLayer<T>& update_gate() const { return update_gate_; }
  const ConvTransposedLayer<T>& lift() const { return lift_; }

 private:
  AsmConfig cfg_;
  ConvTransposedLayer<T> lift_;
  ConvLayer<T> reset_gate_, update_gate_, merge_;
};

}  // namespace asma

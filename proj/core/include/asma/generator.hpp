#pragma once

#include <string>
#include <vector>

#include "asma/asm_module.hpp"
#include "asma/layers.hpp"

namespace asma {

struct GeneratorConfig {
  int base_channels = 32;   // first conv output channels
  int n_resblocks = 5;      // plain residual blocks before the conditional one
  int downsample_stages = 4;
  int channel_cap = 256;    // widths double per stage up to this cap
  int num_styles = 2;
  AsmPlacement asm_placement = AsmPlacement::kAsm2;
  bool asm_disable_reset_gate = false;
  bool asm_disable_update_gate = false;
  double leaky_slope = 0.2;

  // Channels after stage l (stage 0 = the stride-1 stem).
  int stage_channels(int stage) const {
    int c = base_channels;
    for (int i = 0; i < stage; ++i) c = std::min(c * 2, channel_cap);
    return c;
  }
};

// Encoder pyramid: stage[l-1] holds x^l (after the l-th stride-2 block),
// h aliases the deepest feature (1/16 resolution, the bottleneck input).
template <typename T>
struct EncoderFeatures {
  std::vector<Tensor<T>> stages;
  Tensor<T> h;

  const Tensor<T>& stage(int l) const { return stages.at(static_cast<size_t>(l - 1)); }
};

// Conditional generator: Encoder -> Resblocks (+ conditional Resblock) ->
// Decoder, reflect padding throughout, style injected via CIN. When an ASM
// placement is configured the fused tensor is consumed in place of the
// decoder feature at that resolution, so the deeper decoder stages are
// bypassed and never built.
template <typename T>
class Generator {
 public:
  Generator(const GeneratorConfig& cfg, ParamStore<T>& store, Rng& rng) : cfg_(cfg) {
    if (cfg.downsample_stages != 4)
      throw ConfigError("Generator: 4 downsample stages expected, got " + std::to_string(cfg.downsample_stages));
    const int stage_of_asm = asm_stage(cfg.asm_placement);
    if (stage_of_asm > cfg.downsample_stages) throw ConfigError("Generator: ASM stage beyond encoder depth");
    const double sl = cfg.leaky_slope;

    stem_conv_ = make_conv<T>(store, rng, "enc.stem.conv", 3, cfg.stage_channels(0), 3, 1, 1, PadMode::kReflect, sl);
    stem_norm_ = make_instance_norm<T>(store, "enc.stem.norm", cfg.stage_channels(0));
    for (int l = 1; l <= 4; ++l) {
      std::string name = "enc.down" + std::to_string(l);
      enc_convs_.push_back(
          make_conv<T>(store, rng, name + ".conv", cfg.stage_channels(l - 1), cfg.stage_channels(l), 3, 2, 1, PadMode::kReflect, sl));
      enc_norms_.push_back(make_instance_norm<T>(store, name + ".norm", cfg.stage_channels(l)));
    }

    const int cb = cfg.stage_channels(4);
    for (int i = 0; i < cfg.n_resblocks; ++i) {
      std::string name = "res" + std::to_string(i);
      ResBlock rb;
      rb.conv1 = make_conv<T>(store, rng, name + ".conv1", cb, cb, 3, 1, 1, PadMode::kReflect, sl);
      rb.norm1 = make_instance_norm<T>(store, name + ".norm1", cb);
      // last conv zero-initialized: each block starts as identity
      rb.conv2 = make_conv<T>(store, rng, name + ".conv2", cb, cb, 3, 1, 1, PadMode::kReflect, sl, /*zero_init=*/true);
      rb.norm2 = make_instance_norm<T>(store, name + ".norm2", cb);
      resblocks_.push_back(rb);
    }
    cond_block_.conv1 = make_conv<T>(store, rng, "condres.conv1", cb, cb, 3, 1, 1, PadMode::kReflect, sl);
    cond_block_.norm1 = make_cond_instance_norm<T>(store, "condres.norm1", cfg.num_styles, cb);
    cond_block_.conv2 = make_conv<T>(store, rng, "condres.conv2", cb, cb, 3, 1, 1, PadMode::kReflect, sl, /*zero_init=*/true);
    cond_block_.norm2 = make_cond_instance_norm<T>(store, "condres.norm2", cfg.num_styles, cb);

    if (stage_of_asm > 0) {
      AsmConfig ac;
      ac.stage = stage_of_asm;
      ac.hidden_channels = cb;
      ac.out_channels = cfg.stage_channels(stage_of_asm);
      ac.num_styles = cfg.num_styles;
      ac.disable_reset_gate = cfg.asm_disable_reset_gate;
      ac.disable_update_gate = cfg.asm_disable_update_gate;
      ac.leaky_slope = sl;
      asm_ = AsmModule<T>(ac, store, rng, "asm");
    }

    // Decoder stages from 1/2^l up to full resolution; with ASM at stage s
    // only stages l <= s exist.
    const int first_stage = stage_of_asm > 0 ? stage_of_asm : 4;
    for (int l = first_stage; l >= 1; --l) {
      std::string name = "dec.up" + std::to_string(l);
      dec_convs_.push_back(
          make_conv<T>(store, rng, name + ".conv", cfg.stage_channels(l), cfg.stage_channels(l - 1), 3, 1, 1, PadMode::kReflect, sl));
      dec_norms_.push_back(make_instance_norm<T>(store, name + ".norm", cfg.stage_channels(l - 1)));
    }
    color_conv_ = make_conv<T>(store, rng, "dec.color.conv", cfg.stage_channels(0), 3, 3, 1, 1, PadMode::kReflect, sl);
  }

  EncoderFeatures<T> encode(Tape<T>& tape, const Tensor<T>& x) const {
    if (x.shape().rank() != 4 || x.shape().c() != 3) throw ShapeError("Generator::encode: expected (N,3,H,W) input");
    if (x.shape().h() % 16 != 0 || x.shape().w() % 16 != 0)
      throw ShapeError("Generator::encode: spatial dims must be divisible by 16, got " + x.shape().str());
    EncoderFeatures<T> f;
    Tensor<T> cur = leaky_relu(tape, stem_norm_(tape, stem_conv_(tape, x)), static_cast<T>(cfg_.leaky_slope));
    for (size_t l = 0; l < enc_convs_.size(); ++l) {
      cur = leaky_relu(tape, enc_norms_[l](tape, enc_convs_[l](tape, cur)), static_cast<T>(cfg_.leaky_slope));
      f.stages.push_back(cur);
    }
    f.h = cur;
    return f;
  }

  Tensor<T> bottleneck(Tape<T>& tape, const Tensor<T>& h, const StyleLabel& label) const {
    if (label.num_classes() != cfg_.num_styles) throw ConfigError("Generator: label class count mismatch");
    Tensor<T> cur = h;
    for (const auto& rb : resblocks_) {
      Tensor<T> t = leaky_relu(tape, rb.norm1(tape, rb.conv1(tape, cur)), static_cast<T>(cfg_.leaky_slope));
      t = leaky_relu(tape, rb.norm2(tape, rb.conv2(tape, t)), static_cast<T>(cfg_.leaky_slope));
      cur = add(tape, cur, t);
    }
    Tensor<T> t = leaky_relu(tape, cond_block_.norm1(tape, cond_block_.conv1(tape, cur), label), static_cast<T>(cfg_.leaky_slope));
    t = leaky_relu(tape, cond_block_.norm2(tape, cond_block_.conv2(tape, t), label), static_cast<T>(cfg_.leaky_slope));
    return add(tape, cur, t);
  }

  // features: bottleneck output at 1/16. skip: the fused ASM tensor when a
  // placement is configured (must match the tap stage's shape).
  Tensor<T> decode(Tape<T>& tape, const Tensor<T>& features, const Tensor<T>& skip = Tensor<T>()) const {
    const int stage_of_asm = asm_stage(cfg_.asm_placement);
    Tensor<T> cur;
    if (stage_of_asm > 0) {
      if (!skip.defined()) throw ConfigError("Generator::decode: ASM placement configured but no fused skip given");
      const int64_t want_c = cfg_.stage_channels(stage_of_asm);
      if (skip.shape().rank() != 4 || skip.shape().c() != want_c)
        throw ShapeError("Generator::decode: fused skip " + skip.shape().str() + " does not carry " +
                         std::to_string(want_c) + " channels");
      cur = skip;
    } else {
      if (skip.defined()) throw ConfigError("Generator::decode: skip given but no ASM placement configured");
      cur = features;
    }
    for (size_t i = 0; i < dec_convs_.size(); ++i) {
      cur = upsample_nearest(tape, cur, 2);
      cur = leaky_relu(tape, dec_norms_[i](tape, dec_convs_[i](tape, cur)), static_cast<T>(cfg_.leaky_slope));
    }
    return tanh_op(tape, color_conv_(tape, cur));
  }

  Tensor<T> generate(Tape<T>& tape, const Tensor<T>& x, const StyleLabel& label) const {
    EncoderFeatures<T> f = encode(tape, x);
    Tensor<T> latent = bottleneck(tape, f.h, label);
    const int stage_of_asm = asm_stage(cfg_.asm_placement);
    if (stage_of_asm > 0) {
      Tensor<T> fused = asm_.fuse(tape, f.stage(stage_of_asm), latent, label);
      return decode(tape, latent, fused);
    }
    return decode(tape, latent);
  }

  const GeneratorConfig& config() const { return cfg_; }
  const AsmModule<T>& asm_module() const { return asm_; }
  const CondInstanceNormLayer<T>& cond_norm1() const { return cond_block_.norm1; }
  const CondInstanceNormLayer<T>& cond_norm2() const { return cond_block_.norm2; }

 private:
  struct ResBlock {
    ConvLayer<T> conv1, conv2;
    InstanceNormLayer<T> norm1, norm2;
  };
  struct CondResBlock {
    ConvLayer<T> conv1, conv2;
    CondInstanceNormLayer<T> norm1, norm2;
  };

  GeneratorConfig cfg_;
  ConvLayer<T> stem_conv_;
  InstanceNormLayer<T> stem_norm_;
  std::vector<ConvLayer<T>> enc_convs_;
  std::vector<InstanceNormLayer<T>> enc_norms_;
  std::vector<ResBlock> resblocks_;
  CondResBlock cond_block_;
  AsmModule<T> asm_;
  std::vector<ConvLayer<T>> dec_convs_;
  std::vector<InstanceNormLayer<T>> dec_norms_;
  ConvLayer<T> color_conv_;
};

}  // namespace asma

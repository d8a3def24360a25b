#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "asma/checkpoint.hpp"
#include "asma/dataset.hpp"
#include "asma/losses.hpp"

namespace asma {

struct ResolutionPhase {
  int resolution = 32;
  int64_t steps = 0;
};

struct TrainConfig {
  double lr = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int batch_size = 4;
  int d_steps_per_g = 3;  // 0 means generator-only steps
  std::vector<ResolutionPhase> resolution_schedule{{32, 1500}, {64, 1500}};
  uint64_t seed = 1234;
  double lambda_C = 90.0;
  double lambda_T = 100.0;
  double adv_weight = 1.0;
  int pool_kernel = 8;
  int pool_stride = 8;
  int64_t checkpoint_interval = 500;
  bool reset_moments_on_resolution_jump = false;
  GeneratorConfig gen;
  DiscConfig disc;

  void validate() const;
  int64_t total_steps() const;
};

// Alternating optimization: d_steps_per_g discriminator updates per
// generator update, Adam on both sides, progressive-resolution schedule.
// One step = one optimizer update. Deterministic for a fixed seed at thread
// count 1; checkpoints capture everything a resumed run needs to continue
// bit-identically.
template <typename T>
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  // One Adam update of D. The generator is frozen: fakes are produced under
  // a non-recording tape. SN u-states advance exactly once (on the real
  // batch's forward pass).
  T train_step_d(const Tensor<T>& content, const Tensor<T>& style, const StyleLabel& label);

  struct GLosses {
    T g_adv, l_c, l_t;
  };
  // One Adam update of G (+ ASM + CIN) with adv_weight*L_G + lambda_C*L_C +
  // lambda_T*L_T; D is frozen for the pass.
  GLosses train_step_g(const Tensor<T>& content, const StyleLabel& label);

  // Runs the remaining schedule from the current step (resume-aware),
  // emitting one log line per step and periodic checkpoints when out_dir is
  // nonempty. stop_after_step pauses early (resume later or inspect state);
  // a NaN loss aborts after writing a diagnostic dump.
  void run_schedule(const ArtistDataset& ds, std::ostream* log, const std::string& out_dir = "",
                    int64_t stop_after_step = -1);

  Tensor<T> stylize(const Tensor<T>& content, const StyleLabel& label) const;

  void save_checkpoint_file(const std::string& path) const;
  void load_checkpoint_file(const std::string& path);

  bool is_d_step(int64_t step) const;
  int resolution_at(int64_t step) const;

  int64_t step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }
  uint64_t config_hash() const { return config_hash_; }
  Generator<T>& generator() { return *gen_; }
  const Generator<T>& generator() const { return *gen_; }
  Discriminator<T>& discriminator() { return *disc_; }
  const Discriminator<T>& discriminator() const { return *disc_; }
  ParamStore<T>& gen_store() { return gen_store_; }
  ParamStore<T>& disc_store() { return disc_store_; }
  Adam<T>& opt_g() { return opt_g_; }
  Adam<T>& opt_d() { return opt_d_; }
  Rng& rng() { return rng_; }

  static std::string log_header();

 private:
  void append_log(std::ostream* log, int64_t step, int res, bool dstep, T d_loss, const GLosses& g);

  TrainConfig cfg_;
  uint64_t config_hash_ = 0;
  LossWeights<T> weights_;
  ParamStore<T> gen_store_, disc_store_;
  std::unique_ptr<Generator<T>> gen_;
  std::unique_ptr<Discriminator<T>> disc_;
  Adam<T> opt_g_, opt_d_;
  Rng rng_;
  int64_t step_ = 0;
  std::string last_finite_line_;
};

}  // namespace asma

#include "asma/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "asma/config_file.hpp"

namespace asma {

namespace {

template <typename T>
std::string fmt_loss(T v) {
  char buf[40];
  if constexpr (sizeof(T) == 4)
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  else
    std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
  return buf;
}

constexpr uint64_t kTrainRngSalt = 0x517cc1b727220a95ULL;

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (d_steps_per_g < 0) throw ConfigError("TrainConfig: d_steps_per_g must be >= 0");
  if (resolution_schedule.empty()) throw ConfigError("TrainConfig: empty resolution schedule");
  // deepest discriminator features may clamp at 1x1 (conv5-s2-p2 maps 1->1),
  // so one resolution octave below 2^n_blocks is still well-formed
  const int64_t min_side = int64_t(1) << (disc.n_blocks - 1);
  for (const auto& p : resolution_schedule) {
    if (p.steps <= 0) throw ConfigError("TrainConfig: phase step counts must be positive");
    if (p.resolution % 16 != 0) throw ConfigError("TrainConfig: resolutions must be divisible by 16");
    if (p.resolution < min_side)
      throw ConfigError("TrainConfig: resolution " + std::to_string(p.resolution) + " below discriminator minimum " +
                        std::to_string(min_side));
    if (pool_kernel > p.resolution) throw ConfigError("TrainConfig: pool_kernel exceeds phase resolution");
  }
  if (pool_kernel < 1 || pool_stride < 1) throw ConfigError("TrainConfig: pooling parameters must be >= 1");
  if (gen.num_styles != disc.num_styles) throw ConfigError("TrainConfig: generator/discriminator style counts differ");
  if (lambda_C < 0 || lambda_T < 0) throw ConfigError("TrainConfig: loss weights must be nonnegative");
  disc.validate();
}

int64_t TrainConfig::total_steps() const {
  int64_t t = 0;
  for (const auto& p : resolution_schedule) t += p.steps;
  return t;
}

template <typename T>
Trainer<T>::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      opt_g_(static_cast<T>(cfg.lr), static_cast<T>(cfg.adam_beta1), static_cast<T>(cfg.adam_beta2)),
      opt_d_(static_cast<T>(cfg.lr), static_cast<T>(cfg.adam_beta1), static_cast<T>(cfg.adam_beta2)),
      rng_(cfg.seed ^ kTrainRngSalt) {
  cfg_.validate();
  config_hash_ = train_config_hash(cfg_);
  weights_.lambda_C = static_cast<T>(cfg_.lambda_C);
  weights_.lambda_T = static_cast<T>(cfg_.lambda_T);
  Rng init_rng(cfg_.seed);
  gen_ = std::make_unique<Generator<T>>(cfg_.gen, gen_store_, init_rng);
  disc_ = std::make_unique<Discriminator<T>>(cfg_.disc, disc_store_, init_rng);
  opt_g_.attach(gen_store_);
  opt_d_.attach(disc_store_);
}

template <typename T>
bool Trainer<T>::is_d_step(int64_t step) const {
  if (cfg_.d_steps_per_g == 0) return false;
  return step % (cfg_.d_steps_per_g + 1) < cfg_.d_steps_per_g;
}

template <typename T>
int Trainer<T>::resolution_at(int64_t step) const {
  int64_t acc = 0;
  for (const auto& p : cfg_.resolution_schedule) {
    acc += p.steps;
    if (step < acc) return p.resolution;
  }
  return cfg_.resolution_schedule.back().resolution;
}

template <typename T>
T Trainer<T>::train_step_d(const Tensor<T>& content, const Tensor<T>& style, const StyleLabel& label) {
  Tensor<T> fake;
  {
    Tape<T> frozen(false);  // generator fixed for this step
    fake = gen_->generate(frozen, content, label);
  }
  Tape<T> tape;
  Tensor<T> s_real = disc_->project_score(tape, style, label, /*update_u=*/true);
  Tensor<T> s_photo = disc_->project_score(tape, content, label, /*update_u=*/false);
  Tensor<T> s_fake = disc_->project_score(tape, fake, label, /*update_u=*/false);
  Tensor<T> loss = d_hinge_loss(tape, s_real, s_photo, s_fake);
  const T v = loss.item();
  if (!std::isfinite(static_cast<double>(v)))
    throw NumericError("train_step_d: non-finite loss at trainer step " + std::to_string(step_));
  disc_store_.zero_grads();
  tape.backward(loss);
  opt_d_.step();
  return v;
}

template <typename T>
typename Trainer<T>::GLosses Trainer<T>::train_step_g(const Tensor<T>& content, const StyleLabel& label) {
  disc_store_.set_requires_grad(false);  // D frozen, gradients reach only G/ASM/CIN
  GLosses out{};
  try {
    Tape<T> tape;
    Tensor<T> fake = gen_->generate(tape, content, label);
    Tensor<T> s_fake = disc_->project_score(tape, fake, label, /*update_u=*/false);
    Tensor<T> g_adv = g_adv_loss(tape, s_fake);
    Tensor<T> l_c = content_loss(tape, *gen_, content, fake);
    Tensor<T> l_t = transform_loss(tape, content, fake, cfg_.pool_kernel, cfg_.pool_stride);
    Tensor<T> total = total_g_objective(tape, g_adv, l_c, l_t, weights_, static_cast<T>(cfg_.adv_weight));
    out.g_adv = g_adv.item();
    out.l_c = l_c.item();
    out.l_t = l_t.item();
    const T tv = total.item();
    if (!std::isfinite(static_cast<double>(tv)))
      throw NumericError("train_step_g: non-finite loss at trainer step " + std::to_string(step_));
    gen_store_.zero_grads();
    tape.backward(total);
    opt_g_.step();
  } catch (...) {
    disc_store_.set_requires_grad(true);
    throw;
  }
  disc_store_.set_requires_grad(true);
  return out;
}

template <typename T>
Tensor<T> Trainer<T>::stylize(const Tensor<T>& content, const StyleLabel& label) const {
  Tape<T> eval(false);
  return gen_->generate(eval, content, label);
}

template <typename T>
std::string Trainer<T>::log_header() {
  return "# step\tres\td_loss\tg_adv\tl_c\tl_t";
}

template <typename T>
void Trainer<T>::append_log(std::ostream* log, int64_t step, int res, bool dstep, T d_loss, const GLosses& g) {
  std::ostringstream line;
  line << step << '\t' << res << '\t';
  if (dstep)
    line << fmt_loss(d_loss) << "\t-\t-\t-";
  else
    line << "-\t" << fmt_loss(g.g_adv) << '\t' << fmt_loss(g.l_c) << '\t' << fmt_loss(g.l_t);
  last_finite_line_ = line.str();
  if (log) *log << last_finite_line_ << '\n';
}

template <typename T>
void Trainer<T>::run_schedule(const ArtistDataset& ds, std::ostream* log, const std::string& out_dir,
                              int64_t stop_after_step) {
  if (ds.num_artists() != cfg_.gen.num_styles)
    throw ConfigError("run_schedule: dataset has " + std::to_string(ds.num_artists()) + " artists but the model expects " +
                      std::to_string(cfg_.gen.num_styles));
  if (ds.content.empty()) throw ConfigError("run_schedule: content set is empty");
  for (const auto& p : ds.portfolios)
    if (p.empty()) throw ConfigError("run_schedule: empty artist portfolio");

  const int64_t total = cfg_.total_steps();
  if (log && step_ == 0) *log << log_header() << '\n';

  int prev_res = resolution_at(step_);
  while (step_ < total && (stop_after_step < 0 || step_ < stop_after_step)) {
    const int res = resolution_at(step_);
    if (res != prev_res && cfg_.reset_moments_on_resolution_jump) {
      for (auto& s : opt_g_.slots()) {
        std::fill(s.m.begin(), s.m.end(), T(0));
        std::fill(s.v.begin(), s.v.end(), T(0));
      }
      for (auto& s : opt_d_.slots()) {
        std::fill(s.m.begin(), s.m.end(), T(0));
        std::fill(s.v.begin(), s.v.end(), T(0));
      }
      opt_g_.set_step_count(0);
      opt_d_.set_step_count(0);
    }
    prev_res = res;

    const bool dstep = is_d_step(step_);
    // Draw order is fixed: label, content indices, then style indices.
    const int artist = static_cast<int>(rng_.uniform_int(cfg_.gen.num_styles));
    StyleLabel label(artist, cfg_.gen.num_styles);
    std::vector<const ImageU8*> content_ptrs;
    for (int i = 0; i < cfg_.batch_size; ++i)
      content_ptrs.push_back(&ds.content[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(ds.content.size())))]);
    Tensor<T> content = make_batch<T>(content_ptrs, res);

    T d_loss = T(0);
    GLosses g{};
    try {
      if (dstep) {
        const auto& portfolio = ds.portfolios[static_cast<size_t>(artist)];
        std::vector<const ImageU8*> style_ptrs;
        for (int i = 0; i < cfg_.batch_size; ++i)
          style_ptrs.push_back(&portfolio[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(portfolio.size())))]);
        Tensor<T> style = make_batch<T>(style_ptrs, res);
        d_loss = train_step_d(content, style, label);
      } else {
        g = train_step_g(content, label);
      }
    } catch (const NumericError&) {
      if (!out_dir.empty()) {
        std::ofstream dump(out_dir + "/nan_dump.txt");
        dump << "aborted at step " << step_ + 1 << " resolution " << res << "\n"
             << "last finite step record: " << (last_finite_line_.empty() ? "(none)" : last_finite_line_) << "\n";
      }
      throw;
    }

    ++step_;
    append_log(log, step_, res, dstep, d_loss, g);
    if (!out_dir.empty() && cfg_.checkpoint_interval > 0 && step_ % cfg_.checkpoint_interval == 0)
      save_checkpoint_file(out_dir + "/checkpoint.asma");
  }
  if (!out_dir.empty()) save_checkpoint_file(out_dir + "/checkpoint.asma");
}

template <typename T>
void Trainer<T>::save_checkpoint_file(const std::string& path) const {
  CheckpointInfo info;
  info.step = static_cast<uint64_t>(step_);
  info.config_hash = config_hash_;
  info.rng_state = rng_.serialize();
  save_checkpoint<T>(path, info, gen_store_, disc_store_, opt_g_, opt_d_);
}

template <typename T>
void Trainer<T>::load_checkpoint_file(const std::string& path) {
  CheckpointInfo info = load_checkpoint<T>(path, gen_store_, disc_store_, opt_g_, opt_d_);
  if (info.config_hash != config_hash_)
    throw ConfigError("checkpoint was written under a different configuration (hash mismatch)");
  step_ = static_cast<int64_t>(info.step);
  rng_.deserialize(info.rng_state);
}

template class Trainer<float>;
template class Trainer<double>;

}  // namespace asma

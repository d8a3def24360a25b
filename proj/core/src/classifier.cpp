#include "asma/classifier.hpp"

#include "asma/ops.hpp"

namespace asma {

template <typename T>
StyleClassifier<T>::StyleClassifier(const ClassifierConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  cfg_.backbone.validate();
  if (cfg.patch_size < (1 << cfg.backbone.n_blocks))
    throw ConfigError("StyleClassifier: patch size below 2^n_blocks");
  int in_ch = cfg_.backbone.in_channels;
  for (int i = 0; i < cfg_.backbone.n_blocks; ++i) {
    blocks_.push_back(make_spectral_conv<T>(store_, rng_, "clf.block" + std::to_string(i + 1), in_ch,
                                            cfg_.backbone.widths[static_cast<size_t>(i)], 5, 2, 2,
                                            cfg_.backbone.leaky_slope));
    in_ch = cfg_.backbone.widths[static_cast<size_t>(i)];
  }
  head_w = store_.create("clf.head.w", Shape{cfg_.backbone.num_styles, in_ch});
  head_b = store_.create("clf.head.b", Shape{cfg_.backbone.num_styles});
  fill_he_normal(head_w, rng_, in_ch, 0.0);
}

template <typename T>
Tensor<T> StyleClassifier<T>::logits(Tape<T>& tape, const Tensor<T>& batch, bool update_u) const {
  Tensor<T> cur = batch;
  for (const auto& b : blocks_) cur = leaky_relu(tape, b(tape, cur, update_u), static_cast<T>(cfg_.backbone.leaky_slope));
  return linear(tape, global_avg_pool(tape, cur), head_w, head_b);
}

template <typename T>
void StyleClassifier<T>::train(const ArtistDataset& ds, std::ostream* log) {
  if (ds.num_artists() != cfg_.backbone.num_styles)
    throw ConfigError("StyleClassifier: dataset has " + std::to_string(ds.num_artists()) + " artists, expected " +
                      std::to_string(cfg_.backbone.num_styles));
  Adam<T> opt(static_cast<T>(cfg_.lr), T(0.5), T(0.999));
  opt.attach(store_);
  const int k = ds.num_artists();
  for (int step = 0; step < cfg_.train_steps; ++step) {
    std::vector<T> batch_data;
    std::vector<int> targets;
    Tensor<T> batch = Tensor<T>::zeros(Shape::nchw(cfg_.batch_size, 3, cfg_.patch_size, cfg_.patch_size));
    auto bd = batch.data();
    const int64_t per = static_cast<int64_t>(3) * cfg_.patch_size * cfg_.patch_size;
    for (int i = 0; i < cfg_.batch_size; ++i) {
      int artist = static_cast<int>(rng_.uniform_int(k));
      const auto& portfolio = ds.portfolios[static_cast<size_t>(artist)];
      const ImageU8& img = portfolio[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(portfolio.size())))];
      Tensor<T> patch = random_crop<T>(img, cfg_.patch_size, rng_);
      auto pd = patch.data();
      std::copy(pd.begin(), pd.end(), bd.begin() + i * per);
      targets.push_back(artist);
    }
    Tape<T> tape;
    Tensor<T> out = logits(tape, batch, /*update_u=*/true);
    Tensor<T> loss = softmax_cross_entropy(tape, out, targets);
    store_.zero_grads();
    tape.backward(loss);
    opt.step();
    if (log && (step + 1) % 100 == 0) *log << "classifier step " << step + 1 << " loss " << loss.item() << "\n";
  }
  trained_ = true;
}

template <typename T>
int StyleClassifier<T>::predict(const Tensor<T>& patch3hw) const {
  if (patch3hw.shape().rank() != 3 || patch3hw.shape()[0] != 3)
    throw ShapeError("StyleClassifier::predict: expected (3,p,p) patch");
  Tape<T> tape(false);
  Tensor<T> batch = reshape(tape, patch3hw, Shape::nchw(1, 3, patch3hw.shape()[1], patch3hw.shape()[2]));
  Tensor<T> out = logits(tape, batch, /*update_u=*/false);
  auto d = out.data();
  int best = 0;
  for (int j = 1; j < cfg_.backbone.num_styles; ++j)
    if (d[static_cast<size_t>(j)] > d[static_cast<size_t>(best)]) best = j;
  return best;
}

template <typename T>
StyleAccuracyReport style_accuracy(const std::vector<std::vector<Tensor<T>>>& patches_per_artist,
                                   const StyleClassifier<T>& clf) {
  if (!clf.trained())
    throw ConfigError("style_accuracy: classifier is untrained; run StyleClassifier::train on real artwork first");
  const int k = static_cast<int>(patches_per_artist.size());
  StyleAccuracyReport rep;
  rep.confusion.assign(static_cast<size_t>(k), std::vector<int64_t>(static_cast<size_t>(k), 0));
  rep.per_artist.assign(static_cast<size_t>(k), 0.0);
  double sum = 0.0;
  for (int a = 0; a < k; ++a) {
    const auto& patches = patches_per_artist[static_cast<size_t>(a)];
    for (const auto& p : patches) ++rep.confusion[static_cast<size_t>(a)][static_cast<size_t>(clf.predict(p))];
    int64_t correct = rep.confusion[static_cast<size_t>(a)][static_cast<size_t>(a)];
    rep.per_artist[static_cast<size_t>(a)] = patches.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(patches.size());
    sum += rep.per_artist[static_cast<size_t>(a)];
  }
  rep.average = k > 0 ? sum / k : 0.0;
  return rep;
}

template class StyleClassifier<float>;
template class StyleClassifier<double>;
template StyleAccuracyReport style_accuracy<float>(const std::vector<std::vector<Tensor<float>>>&,
                                                   const StyleClassifier<float>&);
template StyleAccuracyReport style_accuracy<double>(const std::vector<std::vector<Tensor<double>>>&,
                                                    const StyleClassifier<double>&);

}  // namespace asma

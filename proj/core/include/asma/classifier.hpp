#pragma once

#include <string>
#include <vector>

#include "asma/dataset.hpp"
#include "asma/discriminator.hpp"

namespace asma {

struct ClassifierConfig {
  DiscConfig backbone;    // isomorphic to the discriminator backbone
  int patch_size = 64;    // must be >= 2^n_blocks
  int train_steps = 400;
  int batch_size = 8;
  double lr = 1e-3;
  uint64_t seed = 7;
};

struct StyleAccuracyReport {
  std::vector<std::vector<int64_t>> confusion;  // [target artist][predicted]
  std::vector<double> per_artist;
  double average = 0.0;
};

// Artistic-style classifier: the discriminator's conv backbone plus a
// softmax head over K artists, trained on random patches of real artwork.
template <typename T>
class StyleClassifier {
 public:
  explicit StyleClassifier(const ClassifierConfig& cfg);

  // Trains on random patches drawn from the portfolios; marks the
  // classifier trained.
  void train(const ArtistDataset& ds, std::ostream* log = nullptr);

  Tensor<T> logits(Tape<T>& tape, const Tensor<T>& batch, bool update_u) const;  // (N,K)
  int predict(const Tensor<T>& patch3hw) const;
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }  // for chance-level baselines
  const ClassifierConfig& config() const { return cfg_; }

 private:
  ClassifierConfig cfg_;
  ParamStore<T> store_;
  std::vector<SpectralConvLayer<T>> blocks_;
  Tensor<T> head_w, head_b;
  Rng rng_;
  bool trained_ = false;
};

// Fraction of patches classified as their target artist. Patches are
// (3,p,p) tensors grouped by the artist label they were stylized toward.
// An untrained classifier is refused.
template <typename T>
StyleAccuracyReport style_accuracy(const std::vector<std::vector<Tensor<T>>>& patches_per_artist,
                                   const StyleClassifier<T>& clf);

}  // namespace asma

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "asma/image_io.hpp"
#include "asma/rng.hpp"
#include "asma/tensor.hpp"

namespace asma {

// Per-artist portfolios plus the photograph pool. Artist order is the
// sorted directory order and defines the label indices.
struct ArtistDataset {
  std::vector<std::string> artist_names;
  std::vector<std::vector<ImageU8>> portfolios;
  std::vector<ImageU8> content;

  int num_artists() const { return static_cast<int>(artist_names.size()); }
  int artist_index(const std::string& name) const;  // -1 if unknown
};

// Directory layout: root/styles/<artist>/*.{png,ppm}, root/content/*.{png,ppm}.
// Corrupt images are skipped with a warning on `warnings`; an artist whose
// directory yields no decodable image is an error.
ArtistDataset ingest(const std::string& root, std::ostream* warnings = nullptr);

// Deterministic resize to res x res: center-crop to the largest multiple of
// res, then box-average. The image must be at least res x res.
template <typename T>
Tensor<T> resize_to(const ImageU8& img, int res);

// Stack images into an (N,3,res,res) batch.
template <typename T>
Tensor<T> make_batch(const std::vector<const ImageU8*>& imgs, int res);

// Random res x res crop (top-left drawn uniformly), for patch sampling.
template <typename T>
Tensor<T> random_crop(const ImageU8& img, int res, Rng& rng);

}  // namespace asma

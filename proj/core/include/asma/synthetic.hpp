#pragma once

#include <string>

#include "asma/dataset.hpp"

namespace asma {

// Procedurally generated toy corpus: two synthetic "artists" with strongly
// separated palettes and stroke statistics, plus neutral geometric
// photographs. Stands in for the full-scale photo/artwork corpora at desk
// scale; everything is deterministic in the seed.
struct ToyDataSpec {
  int image_size = 64;
  int paintings_per_artist = 8;
  int n_content = 16;
  uint64_t seed = 99;
};

inline constexpr const char* kToyArtistNames[2] = {"ochre", "viridian"};

// artist 0 "ochre": warm low-frequency blobs. artist 1 "viridian": cool
// palette with high-frequency vertical striping.
ImageU8 synth_artwork(int artist, int size, Rng& rng);

// Neutral-toned geometric scene (rectangles, disks, gradient background).
ImageU8 synth_photo(int size, Rng& rng);

ArtistDataset make_toy_dataset(const ToyDataSpec& spec);

// Writes the same corpus as PPM files under root/styles/<artist>/ and
// root/content/.
void write_toy_dataset(const std::string& root, const ToyDataSpec& spec);

}  // namespace asma

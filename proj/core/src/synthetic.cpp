#include "asma/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace asma {

namespace {

struct Canvas {
  int size;
  std::vector<double> rgb;  // size*size*3, [0,1]

  explicit Canvas(int s) : size(s), rgb(static_cast<size_t>(s) * s * 3, 0.0) {}
  double& at(int y, int x, int c) { return rgb[static_cast<size_t>((y * size + x) * 3 + c)]; }

  ImageU8 quantize() const {
    ImageU8 img;
    img.height = size;
    img.width = size;
    img.rgb.resize(rgb.size());
    for (size_t i = 0; i < rgb.size(); ++i) {
      double v = rgb[i];
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      img.rgb[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    return img;
  }
};

void fill_background(Canvas& c, double r, double g, double b) {
  for (int y = 0; y < c.size; ++y)
    for (int x = 0; x < c.size; ++x) {
      c.at(y, x, 0) = r;
      c.at(y, x, 1) = g;
      c.at(y, x, 2) = b;
    }
}

void add_blob(Canvas& c, double cx, double cy, double radius, double r, double g, double b) {
  for (int y = 0; y < c.size; ++y)
    for (int x = 0; x < c.size; ++x) {
      double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      double w = std::exp(-d2 / (2.0 * radius * radius));
      if (w < 1e-3) continue;
      c.at(y, x, 0) = (1 - w) * c.at(y, x, 0) + w * r;
      c.at(y, x, 1) = (1 - w) * c.at(y, x, 1) + w * g;
      c.at(y, x, 2) = (1 - w) * c.at(y, x, 2) + w * b;
    }
}

}  // namespace

ImageU8 synth_artwork(int artist, int size, Rng& rng) {
  Canvas c(size);
  if (artist == 0) {
    // ochre: warm palette, soft large blobs, gentle luminance waves
    fill_background(c, rng.uniform(0.6, 0.9), rng.uniform(0.35, 0.55), rng.uniform(0.08, 0.28));
    const int blobs = 4 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < blobs; ++i)
      add_blob(c, rng.uniform(0, size), rng.uniform(0, size), rng.uniform(size / 8.0, size / 3.0),
               rng.uniform(0.6, 1.0), rng.uniform(0.3, 0.6), rng.uniform(0.0, 0.3));
    const double freq = rng.uniform(1.0, 3.0), phase = rng.uniform(0, 2 * std::numbers::pi);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double m = 0.06 * std::sin(2 * std::numbers::pi * freq * (x + y) / size + phase);
        for (int ch = 0; ch < 3; ++ch) c.at(y, x, ch) += m;
      }
  } else {
    // viridian: cool palette, high-frequency vertical striping and strokes
    fill_background(c, rng.uniform(0.02, 0.18), rng.uniform(0.45, 0.7), rng.uniform(0.3, 0.6));
    const double freq = rng.uniform(6.0, 14.0), phase = rng.uniform(0, 2 * std::numbers::pi);
    const double amp = rng.uniform(0.15, 0.3);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double m = amp * std::sin(2 * std::numbers::pi * freq * x / size + phase);
        for (int ch = 0; ch < 3; ++ch) c.at(y, x, ch) += m;
      }
    const int strokes = 3 + static_cast<int>(rng.uniform_int(3));
    for (int i = 0; i < strokes; ++i) {
      int x0 = static_cast<int>(rng.uniform_int(size));
      int width = 1 + static_cast<int>(rng.uniform_int(2));
      double dark = rng.uniform(0.3, 0.6);
      for (int y = 0; y < size; ++y)
        for (int x = x0; x < std::min(size, x0 + width); ++x)
          for (int ch = 0; ch < 3; ++ch) c.at(y, x, ch) *= 1.0 - dark;
    }
  }
  for (double& v : c.rgb) v += rng.uniform(-0.01, 0.01);
  return c.quantize();
}

ImageU8 synth_photo(int size, Rng& rng) {
  Canvas c(size);
  const double g0 = rng.uniform(0.25, 0.55), g1 = rng.uniform(0.35, 0.75);
  for (int y = 0; y < size; ++y) {
    double g = g0 + (g1 - g0) * y / (size - 1);
    for (int x = 0; x < size; ++x)
      for (int ch = 0; ch < 3; ++ch) c.at(y, x, ch) = g;
  }
  const int shapes = 3 + static_cast<int>(rng.uniform_int(4));
  for (int i = 0; i < shapes; ++i) {
    double level = rng.uniform(0.1, 0.9);
    double tint = rng.uniform(-0.04, 0.04);
    if (rng.uniform() < 0.5) {
      int w = 4 + static_cast<int>(rng.uniform_int(size / 2));
      int h = 4 + static_cast<int>(rng.uniform_int(size / 2));
      int x0 = static_cast<int>(rng.uniform_int(std::max(1, size - w)));
      int y0 = static_cast<int>(rng.uniform_int(std::max(1, size - h)));
      for (int y = y0; y < std::min(size, y0 + h); ++y)
        for (int x = x0; x < std::min(size, x0 + w); ++x) {
          c.at(y, x, 0) = level + tint;
          c.at(y, x, 1) = level;
          c.at(y, x, 2) = level - tint;
        }
    } else {
      double cx = rng.uniform(0, size), cy = rng.uniform(0, size);
      double rad = rng.uniform(size / 10.0, size / 4.0);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= rad * rad) {
            c.at(y, x, 0) = level + tint;
            c.at(y, x, 1) = level;
            c.at(y, x, 2) = level - tint;
          }
    }
  }
  for (double& v : c.rgb) v += rng.uniform(-0.01, 0.01);
  return c.quantize();
}

ArtistDataset make_toy_dataset(const ToyDataSpec& spec) {
  Rng rng(spec.seed);
  ArtistDataset ds;
  for (int a = 0; a < 2; ++a) {
    ds.artist_names.push_back(kToyArtistNames[a]);
    std::vector<ImageU8> portfolio;
    for (int i = 0; i < spec.paintings_per_artist; ++i) portfolio.push_back(synth_artwork(a, spec.image_size, rng));
    ds.portfolios.push_back(std::move(portfolio));
  }
  for (int i = 0; i < spec.n_content; ++i) ds.content.push_back(synth_photo(spec.image_size, rng));
  return ds;
}

void write_toy_dataset(const std::string& root, const ToyDataSpec& spec) {
  namespace fs = std::filesystem;
  ArtistDataset ds = make_toy_dataset(spec);
  for (size_t a = 0; a < ds.artist_names.size(); ++a) {
    fs::path dir = fs::path(root) / "styles" / ds.artist_names[a];
    fs::create_directories(dir);
    for (size_t i = 0; i < ds.portfolios[a].size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "art_%03zu.ppm", i);
      save_image((dir / name).string(), ds.portfolios[a][i]);
    }
  }
  fs::path cdir = fs::path(root) / "content";
  fs::create_directories(cdir);
  for (size_t i = 0; i < ds.content.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "photo_%03zu.ppm", i);
    save_image((cdir / name).string(), ds.content[i]);
  }
}

}  // namespace asma

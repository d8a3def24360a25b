#include "asma/dataset.hpp"

#include <algorithm>
#include <filesystem>

namespace fs = std::filesystem;

namespace asma {

namespace {

bool supported_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ".png" || e == ".ppm";
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && supported_ext(entry.path())) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ImageU8> load_dir(const fs::path& dir, std::ostream* warnings) {
  std::vector<ImageU8> out;
  for (const auto& p : sorted_images(dir)) {
    try {
      out.push_back(load_image(p.string()));
    } catch (const std::exception& e) {
      if (warnings) *warnings << "warning: skipping " << p.string() << ": " << e.what() << "\n";
    }
  }
  return out;
}

}  // namespace

int ArtistDataset::artist_index(const std::string& name) const {
  for (size_t i = 0; i < artist_names.size(); ++i)
    if (artist_names[i] == name) return static_cast<int>(i);
  return -1;
}

ArtistDataset ingest(const std::string& root, std::ostream* warnings) {
  fs::path base(root);
  fs::path styles = base / "styles";
  fs::path content = base / "content";
  if (!fs::is_directory(styles)) throw ConfigError("ingest: missing styles/ directory under " + root);

  ArtistDataset ds;
  std::vector<fs::path> artist_dirs;
  for (const auto& entry : fs::directory_iterator(styles))
    if (entry.is_directory()) artist_dirs.push_back(entry.path());
  std::sort(artist_dirs.begin(), artist_dirs.end());
  if (artist_dirs.empty()) throw ConfigError("ingest: no artist directories under " + styles.string());

  for (const auto& dir : artist_dirs) {
    auto imgs = load_dir(dir, warnings);
    if (imgs.empty()) throw ConfigError("ingest: artist portfolio " + dir.string() + " has no decodable images");
    ds.artist_names.push_back(dir.filename().string());
    ds.portfolios.push_back(std::move(imgs));
  }
  if (fs::is_directory(content)) ds.content = load_dir(content, warnings);
  return ds;
}

template <typename T>
Tensor<T> resize_to(const ImageU8& img, int res) {
  if (res < 1) throw ConfigError("resize_to: non-positive resolution");
  if (img.height < res || img.width < res)
    throw ShapeError("resize_to: image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                     " smaller than target " + std::to_string(res));
  const int f = std::min(img.height, img.width) / res;  // box size
  const int side = f * res;
  const int y0 = (img.height - side) / 2, x0 = (img.width - side) / 2;
  Tensor<T> t = Tensor<T>::zeros(Shape{3, res, res});
  auto d = t.data();
  const double inv = 1.0 / (f * f);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x) {
        double s = 0;
        for (int by = 0; by < f; ++by)
          for (int bx = 0; bx < f; ++bx) s += img.at(y0 + y * f + by, x0 + x * f + bx, c);
        d[(c * res + y) * res + x] = static_cast<T>(s * inv / 255.0 * 2.0 - 1.0);
      }
  return t;
}

template <typename T>
Tensor<T> make_batch(const std::vector<const ImageU8*>& imgs, int res) {
  if (imgs.empty()) throw ConfigError("make_batch: empty image list");
  Tensor<T> batch = Tensor<T>::zeros(Shape::nchw(static_cast<int64_t>(imgs.size()), 3, res, res));
  auto bd = batch.data();
  const int64_t per = static_cast<int64_t>(3) * res * res;
  for (size_t i = 0; i < imgs.size(); ++i) {
    Tensor<T> one = resize_to<T>(*imgs[i], res);
    auto od = one.data();
    std::copy(od.begin(), od.end(), bd.begin() + static_cast<int64_t>(i) * per);
  }
  return batch;
}

template <typename T>
Tensor<T> random_crop(const ImageU8& img, int res, Rng& rng) {
  if (img.height < res || img.width < res)
    throw ShapeError("random_crop: image smaller than patch size " + std::to_string(res));
  const int y0 = static_cast<int>(rng.uniform_int(img.height - res + 1));
  const int x0 = static_cast<int>(rng.uniform_int(img.width - res + 1));
  Tensor<T> t = Tensor<T>::zeros(Shape{3, res, res});
  auto d = t.data();
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x)
        d[(c * res + y) * res + x] = static_cast<T>(img.at(y0 + y, x0 + x, c) / 255.0 * 2.0 - 1.0);
  return t;
}

template Tensor<float> resize_to<float>(const ImageU8&, int);
template Tensor<double> resize_to<double>(const ImageU8&, int);
template Tensor<float> make_batch<float>(const std::vector<const ImageU8*>&, int);
template Tensor<double> make_batch<double>(const std::vector<const ImageU8*>&, int);
template Tensor<float> random_crop<float>(const ImageU8&, int, Rng&);
template Tensor<double> random_crop<double>(const ImageU8&, int, Rng&);

}  // namespace asma

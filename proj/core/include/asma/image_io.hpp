#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asma/tensor.hpp"

namespace asma {

// Decoded 8-bit RGB image, row-major interleaved.
struct ImageU8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> rgb;  // height * width * 3

  uint8_t& at(int y, int x, int ch) { return rgb[static_cast<size_t>((y * width + x) * 3 + ch)]; }
  uint8_t at(int y, int x, int ch) const { return rgb[static_cast<size_t>((y * width + x) * 3 + ch)]; }
};

// Supported formats: PNG (8-bit RGB) and PPM (P6). Dispatch is by file
// content for reads and by extension for writes (.png -> PNG, else PPM).
ImageU8 load_image(const std::string& path);
void save_image(const std::string& path, const ImageU8& img);

ImageU8 decode_ppm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_ppm(const ImageU8& img);

// byte b -> v = b/255*2-1; v -> round((v+1)/2*255) clamped. Byte->float->byte
// round-trips exactly; float->byte->float error is at most 1/255.
template <typename T>
Tensor<T> image_to_tensor(const ImageU8& img) {
  Tensor<T> t = Tensor<T>::zeros(Shape{3, img.height, img.width});
  auto d = t.data();
  const int64_t m = static_cast<int64_t>(img.height) * img.width;
  for (int64_t p = 0; p < m; ++p)
    for (int64_t c = 0; c < 3; ++c)
      d[c * m + p] = static_cast<T>(img.rgb[static_cast<size_t>(p * 3 + c)] / T(255) * T(2) - T(1));
  return t;
}

template <typename T>
ImageU8 tensor_to_image(const Tensor<T>& t) {
  const Shape& s = t.shape();
  int h = 0, w = 0;
  int64_t off = 0;
  if (s.rank() == 3 && s[0] == 3) {
    h = static_cast<int>(s[1]);
    w = static_cast<int>(s[2]);
  } else if (s.rank() == 4 && s.n() == 1 && s.c() == 3) {
    h = static_cast<int>(s.h());
    w = static_cast<int>(s.w());
  } else {
    throw ShapeError("tensor_to_image: expected (3,H,W) or (1,3,H,W), got " + s.str());
  }
  ImageU8 img;
  img.height = h;
  img.width = w;
  img.rgb.resize(static_cast<size_t>(h) * w * 3);
  auto d = t.data();
  const int64_t m = static_cast<int64_t>(h) * w;
  for (int64_t p = 0; p < m; ++p)
    for (int64_t c = 0; c < 3; ++c) {
      double v = (static_cast<double>(d[off + c * m + p]) + 1.0) * 0.5 * 255.0;
      long q = std::lround(v);
      img.rgb[static_cast<size_t>(p * 3 + c)] = static_cast<uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
    }
  return img;
}

}  // namespace asma

#include "asma/metrics.hpp"

#include <cmath>

namespace asma {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

template <typename T>
DetailGrid detail_map(const Tensor<T>& image, int n) {
  if (image.shape().rank() != 3 || image.shape()[0] != 3)
    throw ShapeError("detail_map: expected (3,H,W) image, got " + image.shape().str());
  if (n < 1) throw ConfigError("detail_map: grid side must be >= 1");
  const int h = static_cast<int>(image.shape()[1]);
  const int w = static_cast<int>(image.shape()[2]);
  if (h < n || w < n) throw ShapeError("detail_map: image smaller than the patch grid");

  auto d = image.data();
  const int64_t m = static_cast<int64_t>(h) * w;
  std::vector<double> gray(static_cast<size_t>(m));
  for (int64_t p = 0; p < m; ++p)
    gray[static_cast<size_t>(p)] =
        (static_cast<double>(d[p]) + static_cast<double>(d[m + p]) + static_cast<double>(d[2 * m + p])) / 3.0;

  const int ph = h / n, pw = w / n;  // patch size; trailing pixels cropped
  DetailGrid grid;
  grid.n = n;
  grid.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int y = i * ph; y < (i + 1) * ph; ++y) {
        for (int x = j * pw; x < (j + 1) * pw; ++x) {
          double gx = (gray[static_cast<size_t>(y * w + clampi(x + 1, 0, w - 1))] -
                       gray[static_cast<size_t>(y * w + clampi(x - 1, 0, w - 1))]) *
                      0.5;
          double gy = (gray[static_cast<size_t>(clampi(y + 1, 0, h - 1) * w + x)] -
                       gray[static_cast<size_t>(clampi(y - 1, 0, h - 1) * w + x)]) *
                      0.5;
          acc += std::sqrt(gx * gx + gy * gy);
        }
      }
      grid.values[static_cast<size_t>(i * n + j)] = acc / (ph * pw);
    }
  }
  return grid;
}

double srr_from_grids(const DetailGrid& a, const DetailGrid& b, std::ostream* log) {
  if (a.n != b.n) throw ShapeError("srr: grid sizes differ");
  const int n = a.n;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < n; ++i) {
      sa += a.at(i, j);
      sb += b.at(i, j);
    }
    if (sa <= 0.0 || sb <= 0.0) {
      if (log) *log << "srr: zero-sum column " << j << " skipped\n";
      continue;
    }
    for (int i = 0; i < n; ++i) total += std::abs(a.at(i, j) / sa - b.at(i, j) / sb);
  }
  return total / (static_cast<double>(n) * n);
}

template <typename T>
double srr(const Tensor<T>& x_o, const Tensor<T>& x_c, int n, std::ostream* log) {
  if (x_o.shape() != x_c.shape())
    throw ShapeError("srr: image shapes differ, " + x_o.shape().str() + " vs " + x_c.shape().str());
  return srr_from_grids(detail_map(x_o, n), detail_map(x_c, n), log);
}

template DetailGrid detail_map<float>(const Tensor<float>&, int);
template DetailGrid detail_map<double>(const Tensor<double>&, int);
template double srr<float>(const Tensor<float>&, const Tensor<float>&, int, std::ostream*);
template double srr<double>(const Tensor<double>&, const Tensor<double>&, int, std::ostream*);

}  // namespace asma

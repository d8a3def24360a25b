#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace asma::testing {

namespace {

// mirrored-across-the-border-pixel reflection, written independently of the
// library's index mapping
int64_t mirror(int64_t i, int64_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

template <typename T>
T sample_padded(const Tensor<T>& x, int64_t img, int64_t ch, int64_t y, int64_t xx, PadMode mode) {
  const int64_t h = x.shape().h(), w = x.shape().w();
  if (mode == PadMode::kReflect) return x.at(img, ch, mirror(y, h), mirror(xx, w));
  if (y < 0 || y >= h || xx < 0 || xx >= w) return T(0);
  return x.at(img, ch, y, xx);
}

}  // namespace

template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad,
                       PadMode mode) {
  const int64_t n = x.shape().n(), ci = x.shape().c(), h = x.shape().h(), wi = x.shape().w();
  const int64_t co = w.shape()[0], k = w.shape()[2];
  const int64_t ho = (h + 2 * pad - k) / stride + 1;
  const int64_t wo = (wi + 2 * pad - k) / stride + 1;
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, co, ho, wo));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t oc = 0; oc < co; ++oc)
      for (int64_t oy = 0; oy < ho; ++oy)
        for (int64_t ox = 0; ox < wo; ++ox) {
          double acc = b.defined() ? static_cast<double>(b[oc]) : 0.0;
          for (int64_t ic = 0; ic < ci; ++ic)
            for (int64_t ky = 0; ky < k; ++ky)
              for (int64_t kx = 0; kx < k; ++kx)
                acc += static_cast<double>(w[((oc * ci + ic) * k + ky) * k + kx]) *
                       static_cast<double>(sample_padded(x, i, ic, oy * stride + ky - pad, ox * stride + kx - pad, mode));
          y.at(i, oc, oy, ox) = static_cast<T>(acc);
        }
  return y;
}

template <typename T>
Tensor<T> naive_conv2d_transposed(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad) {
  const int64_t n = x.shape().n(), ci = x.shape().c(), h = x.shape().h(), wi = x.shape().w();
  const int64_t co = w.shape()[1], k = w.shape()[2];
  const int64_t ho = (h - 1) * stride - 2 * pad + k;
  const int64_t wo = (wi - 1) * stride - 2 * pad + k;
  Tensor<T> y = Tensor<T>::zeros(Shape::nchw(n, co, ho, wo));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t ic = 0; ic < ci; ++ic)
      for (int64_t iy = 0; iy < h; ++iy)
        for (int64_t ix = 0; ix < wi; ++ix)
          for (int64_t oc = 0; oc < co; ++oc)
            for (int64_t ky = 0; ky < k; ++ky)
              for (int64_t kx = 0; kx < k; ++kx) {
                int64_t oy = iy * stride + ky - pad;
                int64_t ox = ix * stride + kx - pad;
                if (oy < 0 || oy >= ho || ox < 0 || ox >= wo) continue;
                y.at(i, oc, oy, ox) += w[((ic * co + oc) * k + ky) * k + kx] * x.at(i, ic, iy, ix);
              }
  if (b.defined())
    for (int64_t i = 0; i < n; ++i)
      for (int64_t oc = 0; oc < co; ++oc)
        for (int64_t oy = 0; oy < ho; ++oy)
          for (int64_t ox = 0; ox < wo; ++ox) y.at(i, oc, oy, ox) += b[oc];
  return y;
}

double svd_largest_singular_value(const std::vector<double>& w, int64_t rows, int64_t cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) m(r, c) = w[static_cast<size_t>(r * cols + c)];
  Eigen::MatrixXd gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

template <typename T>
DetailGrid naive_detail_map(const Tensor<T>& image, int n) {
  const int h = static_cast<int>(image.shape()[1]);
  const int w = static_cast<int>(image.shape()[2]);
  auto d = image.data();
  const int64_t m = static_cast<int64_t>(h) * w;
  auto gray_at = [&](int y, int x) {
    int64_t p = static_cast<int64_t>(y) * w + x;
    return (static_cast<double>(d[p]) + static_cast<double>(d[m + p]) + static_cast<double>(d[2 * m + p])) / 3.0;
  };
  auto clampv = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  const int ph = h / n, pw = w / n;
  DetailGrid grid;
  grid.n = n;
  grid.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int y = i * ph; y < (i + 1) * ph; ++y)
        for (int x = j * pw; x < (j + 1) * pw; ++x) {
          double gx = 0.5 * (gray_at(y, clampv(x + 1, 0, w - 1)) - gray_at(y, clampv(x - 1, 0, w - 1)));
          double gy = 0.5 * (gray_at(clampv(y + 1, 0, h - 1), x) - gray_at(clampv(y - 1, 0, h - 1), x));
          acc += std::hypot(gx, gy);
        }
      grid.values[static_cast<size_t>(i * n + j)] = acc / (ph * pw);
    }
  return grid;
}

double naive_srr(const DetailGrid& a, const DetailGrid& b) {
  const int n = a.n;
  double total = 0;
  for (int j = 0; j < n; ++j) {
    double sa = 0, sb = 0;
    for (int i = 0; i < n; ++i) {
      sa += a.at(i, j);
      sb += b.at(i, j);
    }
    if (sa <= 0 || sb <= 0) continue;
    for (int i = 0; i < n; ++i) total += std::abs(a.at(i, j) / sa - b.at(i, j) / sb);
  }
  return total / (static_cast<double>(n) * n);
}

template Tensor<float> naive_conv2d<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, int, int, PadMode);
template Tensor<double> naive_conv2d<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, int, int, PadMode);
template Tensor<float> naive_conv2d_transposed<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, int, int);
template Tensor<double> naive_conv2d_transposed<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, int, int);
template DetailGrid naive_detail_map<float>(const Tensor<float>&, int);
template DetailGrid naive_detail_map<double>(const Tensor<double>&, int);

}  // namespace asma::testing
